"""Exception types shared across the package."""


class SynesthesiaError(Exception):
    """Base class for all package errors."""


class ParameterError(SynesthesiaError):
    """Invalid argument, configuration value, or violated precondition."""


class FormatError(SynesthesiaError):
    """Malformed or unsupported file content (PNG, WAV, weight file, plan JSON)."""


class NumericError(SynesthesiaError):
    """Non-finite value produced during optimization or inference."""


class MappingError(ParameterError):
    """Unknown (dataset, label) pair in emotion label harmonization."""
