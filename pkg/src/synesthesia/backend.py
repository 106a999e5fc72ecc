"""Rendering kernel backend selection.

The stroke rasterization kernels exist twice with identical semantics: a
numba ``@njit`` implementation and a pure-numpy fallback.  The environment
variable ``SYNESTHESIA_BACKEND`` picks one:

    auto    use numba when importable, else numpy (default)
    numba   require numba, raise if it cannot be imported
    numpy   force the pure-numpy fallback

``SYNESTHESIA_THREADS`` caps the numba threading layer.  The kernels are
sequential today (a requirement of the bitwise determinism guarantees), so
the cap cannot change results; it is honored so future parallel kernels
inherit the contract.
"""

from __future__ import annotations

import os

from .errors import ParameterError

_VALID = ("auto", "numba", "numpy")
_cache: dict[str, object] = {}


def backend_name() -> str:
    """Resolved backend name, honoring SYNESTHESIA_BACKEND."""
    mode = os.environ.get("SYNESTHESIA_BACKEND", "auto").strip().lower()
    if mode not in _VALID:
        raise ParameterError(
            f"SYNESTHESIA_BACKEND must be one of {_VALID}, got {mode!r}")
    if mode != "auto":
        return mode
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        return "numpy"


def thread_cap() -> int | None:
    """Parsed SYNESTHESIA_THREADS value, or None when unset."""
    raw = os.environ.get("SYNESTHESIA_THREADS")
    if raw is None or raw.strip() == "":
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise ParameterError(f"SYNESTHESIA_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ParameterError(f"SYNESTHESIA_THREADS must be >= 1, got {n}")
    return n


def _apply_thread_cap() -> None:
    cap = thread_cap()
    if cap is None:
        return
    try:
        import numba
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass  # numpy path is single threaded already


def get_kernels(name: str | None = None):
    """Kernel module for ``name`` (or the env-selected backend when None)."""
    resolved = backend_name() if name is None else name
    if resolved == "auto":
        resolved = backend_name()
    if resolved not in ("numba", "numpy"):
        raise ParameterError(f"unknown backend {resolved!r}")
    mod = _cache.get(resolved)
    if mod is None:
        if resolved == "numba":
            _apply_thread_cap()
            from . import _kernels_numba as mod
        else:
            from . import _kernels_numpy as mod
        _cache[resolved] = mod
    return mod
