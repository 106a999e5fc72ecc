import numpy as np
import pytest

from oracles import brute_force_render
from synesthesia.backend import get_kernels
from synesthesia.errors import ParameterError
from synesthesia.render import render_plan, render_plan_vjp
from synesthesia.strokes import PaintingPlan, StrokeParams, init_plan


def single_stroke_plan(**kw):
    base = dict(x=0.5, y=0.5, orientation=0.3, length=0.25, bend=0.05,
                thickness=0.04, color=(0.0, 0.0, 0.0), opacity=1.0)
    base.update(kw)
    return PaintingPlan(canvas_width_px=32, canvas_height_px=28,
                        background=(1.0, 1.0, 1.0),
                        strokes=[StrokeParams(**base)], softness=0.004)


class TestRenderPlan:
    def test_empty_plan_is_background(self):
        plan = PaintingPlan(10, 8, (0.3, 0.5, 0.7), [], softness=0.01)
        img = render_plan(plan)
        assert img.shape == (8, 10, 3)
        assert np.allclose(img, (0.3, 0.5, 0.7))

    def test_opaque_stroke_covers_midpoint(self):
        plan = single_stroke_plan(bend=0.0, orientation=0.0, x=0.3, y=0.5)
        img = render_plan(plan)
        s = plan.strokes[0]
        diag = np.hypot(32, 28)
        mid_x = int(round(s.x * 32 + 0.5 * s.length * diag))
        mid_y = int(round(s.y * 28))
        assert np.all(img[mid_y, mid_x] < 0.01)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            plan = init_plan("uniform-random", 2, int(rng.integers(2**31)),
                             width_px=26, height_px=22, softness=0.01)
            ours = render_plan(plan)
            ref = brute_force_render(plan, n_samples=10000)
            assert np.abs(ours - ref).max() < 1e-3

    def test_output_within_color_hull(self, rng):
        plan = init_plan("uniform-random", 6, 3, width_px=20, height_px=20,
                         background=(0.2, 0.6, 0.9))
        img = render_plan(plan)
        colors = np.array([s.color for s in plan.strokes] + [plan.background])
        for c in range(3):
            assert img[..., c].min() >= colors[:, c].min() - 1e-12
            assert img[..., c].max() <= colors[:, c].max() + 1e-12

    def test_overlapping_order_matters(self):
        a = StrokeParams(x=0.5, y=0.5, orientation=0.0, length=0.3, bend=0.0,
                         thickness=0.05, color=(1.0, 0.0, 0.0), opacity=0.9)
        b = StrokeParams(x=0.5, y=0.5, orientation=1.0, length=0.3, bend=0.0,
                         thickness=0.05, color=(0.0, 0.0, 1.0), opacity=0.9)
        ab = render_plan(PaintingPlan(24, 24, (1, 1, 1), [a, b], softness=0.01))
        ba = render_plan(PaintingPlan(24, 24, (1, 1, 1), [b, a], softness=0.01))
        assert np.abs(ab - ba).max() > 0.05

    def test_disjoint_order_does_not_matter(self):
        a = StrokeParams(x=0.15, y=0.15, orientation=0.0, length=0.08, bend=0.0,
                         thickness=0.01, color=(1.0, 0.0, 0.0), opacity=0.9)
        b = StrokeParams(x=0.85, y=0.85, orientation=0.0, length=0.08, bend=0.0,
                         thickness=0.01, color=(0.0, 0.0, 1.0), opacity=0.9)
        ab = render_plan(PaintingPlan(60, 60, (1, 1, 1), [a, b], softness=0.004))
        ba = render_plan(PaintingPlan(60, 60, (1, 1, 1), [b, a], softness=0.004))
        assert np.abs(ab - ba).max() < 1e-9

    def test_opacity_moves_pixels_toward_stroke_color(self):
        lo = single_stroke_plan(opacity=0.3, color=(0.0, 0.0, 0.0))
        hi = single_stroke_plan(opacity=0.8, color=(0.0, 0.0, 0.0))
        img_lo, img_hi = render_plan(lo), render_plan(hi)
        # toward black on white: strictly darker wherever covered
        assert np.all(img_hi <= img_lo + 1e-12)

    def test_translation_consistency(self):
        base = single_stroke_plan(x=0.35, y=0.5, orientation=0.5)
        shift = 4
        moved = PaintingPlan(
            32, 28, base.background,
            [StrokeParams(x=base.strokes[0].x + shift / 32,
                          y=base.strokes[0].y,
                          orientation=base.strokes[0].orientation,
                          length=base.strokes[0].length,
                          bend=base.strokes[0].bend,
                          thickness=base.strokes[0].thickness,
                          color=base.strokes[0].color,
                          opacity=base.strokes[0].opacity)],
            softness=base.softness)
        a = render_plan(base)
        b = render_plan(moved)
        assert np.abs(b[:, shift:] - a[:, :-shift]).max() < 5e-3


class TestRenderPlanVjp:
    def test_zero_upstream_zero_grads(self, small_plan):
        g = render_plan_vjp(small_plan, np.zeros((20, 24, 3)))
        assert not g.geom.any() and not g.color.any()
        assert not g.opacity.any() and not g.background.any()

    def test_offcanvas_stroke_has_negligible_gradient(self):
        plan = single_stroke_plan(x=0.5, y=0.5)
        # render_plan is range-lenient, so the stroke can sit far off canvas
        far = PaintingPlan(
            32, 28, plan.background,
            plan.strokes + [StrokeParams(x=-1.5, y=-1.5, orientation=2.5,
                                         length=0.1, bend=0.0, thickness=0.002,
                                         color=(0.5, 0.5, 0.5), opacity=1.0)],
            softness=0.004)
        rng = np.random.default_rng(2)
        g = render_plan_vjp(far, rng.standard_normal((28, 32, 3)))
        assert np.abs(g.geom[1]).max() < 1e-6
        assert np.abs(g.color[1]).max() < 1e-6

    def test_shape_mismatch_rejected(self, small_plan):
        with pytest.raises(ParameterError):
            render_plan_vjp(small_plan, np.zeros((5, 5, 3)))

    def test_background_gradient_sums_uncovered_mass(self):
        plan = PaintingPlan(10, 10, (0.5, 0.5, 0.5), [], softness=0.01)
        up = np.random.default_rng(1).standard_normal((10, 10, 3))
        g = render_plan_vjp(plan, up)
        assert np.allclose(g.background, up.sum(axis=(0, 1)))


class TestBackends:
    def test_numpy_backend_selectable(self, small_plan, monkeypatch):
        monkeypatch.setenv("SYNESTHESIA_BACKEND", "numpy")
        img = render_plan(small_plan, kernels=get_kernels("numpy"))
        assert img.shape == (20, 24, 3)

    def test_backends_agree(self, small_plan):
        numba = pytest.importorskip("numba")
        del numba
        a = render_plan(small_plan, kernels=get_kernels("numpy"))
        b = render_plan(small_plan, kernels=get_kernels("numba"))
        assert np.abs(a - b).max() < 1e-9

    def test_vjp_backends_agree(self, small_plan):
        pytest.importorskip("numba")
        up = np.random.default_rng(5).standard_normal((20, 24, 3))
        ga = render_plan_vjp(small_plan, up, kernels=get_kernels("numpy"))
        gb = render_plan_vjp(small_plan, up, kernels=get_kernels("numba"))
        assert np.abs(ga.geom - gb.geom).max() < 1e-9
        assert np.abs(ga.background - gb.background).max() < 1e-9
