import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synesthesia.errors import FormatError, ParameterError
from synesthesia.strokes import (RANGES, PaintingPlan, StrokeParams, init_plan,
                                 load_plan, plan_from_dict, plan_to_dict,
                                 save_plan, stroke_geometry, wrap_orientation)


def stroke(**kw):
    base = dict(x=0.5, y=0.5, orientation=0.0, length=0.2, bend=0.0,
                thickness=0.02, color=(0.2, 0.4, 0.6), opacity=0.8)
    base.update(kw)
    return StrokeParams(**base)


class TestStrokeGeometry:
    def test_zero_bend_is_straight(self):
        p0, p1, p2 = stroke_geometry(stroke(bend=0.0, orientation=0.7), 80, 60)
        assert np.allclose(p1, 0.5 * (p0 + p2))

    def test_axis_aligned_control_points(self):
        p0, p1, p2 = stroke_geometry(stroke(orientation=0.0, length=0.2), 100, 100)
        diag = math.hypot(100, 100)
        assert np.allclose(p0, [50.0, 50.0])
        assert np.allclose(p2, [50.0 + 0.2 * diag, 50.0])

    def test_rotation_by_pi_reflects_endpoint(self):
        s = stroke(orientation=0.3, bend=0.0)
        p0, _, p2 = stroke_geometry(s, 64, 48)
        q0, _, q2 = stroke_geometry(stroke(orientation=0.3 - math.pi, bend=0.0),
                                    64, 48)
        assert np.allclose(q0, p0)
        assert np.allclose(q2, 2 * p0 - p2)

    def test_bend_is_perpendicular_offset(self):
        s0 = stroke(orientation=0.9, bend=0.0)
        sb = stroke(orientation=0.9, bend=0.1)
        _, p1a, _ = stroke_geometry(s0, 70, 70)
        _, p1b, _ = stroke_geometry(sb, 70, 70)
        offset = p1b - p1a
        e = np.array([math.cos(0.9), math.sin(0.9)])
        assert abs(offset @ e) < 1e-9
        assert np.linalg.norm(offset) == pytest.approx(0.1 * math.hypot(70, 70))


class TestWrapOrientation:
    def test_known_values(self):
        assert wrap_orientation(math.pi) == pytest.approx(-math.pi)
        assert wrap_orientation(-math.pi) == pytest.approx(-math.pi)
        assert wrap_orientation(0.25) == pytest.approx(0.25)

    @given(st.floats(-50.0, 50.0))
    def test_range_and_equivalence(self, theta):
        w = float(wrap_orientation(theta))
        assert -math.pi <= w < math.pi
        assert math.remainder(theta - w, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)


class TestInitPlan:
    def test_same_seed_identical(self):
        a = init_plan("uniform-random", 8, 5, width_px=40, height_px=30)
        b = init_plan("uniform-random", 8, 5, width_px=40, height_px=30)
        assert a == b

    def test_image_seeded_solid_target(self):
        target = np.zeros((20, 20, 3))
        target[:] = (1.0, 0.0, 0.0)
        plan = init_plan("image-seeded", 6, 1, target=target)
        for s in plan.strokes:
            assert s.color == pytest.approx((1.0, 0.0, 0.0))

    def test_uniform_within_ranges(self):
        plan = init_plan("uniform-random", 50, 9, width_px=32, height_px=32)
        for s in plan.strokes:
            for field in ("x", "y", "orientation", "length", "bend",
                          "thickness", "opacity"):
                lo, hi = RANGES[field]
                assert lo <= getattr(s, field) <= hi

    def test_errors(self):
        with pytest.raises(ParameterError):
            init_plan("uniform-random", 0, 0, width_px=10, height_px=10)
        with pytest.raises(ParameterError):
            init_plan("image-seeded", 3, 0, width_px=10, height_px=10)
        with pytest.raises(ParameterError):
            init_plan("spiral", 3, 0, width_px=10, height_px=10)


plan_strategy = st.builds(
    lambda seeds, w, h: init_plan("uniform-random", len(seeds) or 1,
                                  seeds[0] if seeds else 0,
                                  width_px=w, height_px=h),
    st.lists(st.integers(0, 2**31), min_size=1, max_size=3),
    st.integers(4, 80), st.integers(4, 80))


class TestPlanJson:
    def test_round_trip_bitwise(self, tmp_path, small_plan):
        path = tmp_path / "plan.json"
        save_plan(small_plan, path)
        assert load_plan(path) == small_plan
        # a second save of the loaded plan is byte-identical
        path2 = tmp_path / "plan2.json"
        save_plan(load_plan(path), path2)
        assert path.read_bytes() == path2.read_bytes()

    @settings(max_examples=30, deadline=None)
    @given(plan_strategy)
    def test_dict_round_trip_exact(self, plan):
        assert plan_from_dict(plan_to_dict(plan)) == plan

    def test_field_names(self, small_plan):
        doc = plan_to_dict(small_plan)
        assert set(doc) == {"canvas_width_px", "canvas_height_px",
                            "background", "softness", "strokes"}
        assert set(doc["strokes"][0]) == {"x", "y", "orientation", "length",
                                          "bend", "thickness", "color",
                                          "opacity"}

    def test_rejects_unknown_and_missing_keys(self, small_plan):
        doc = plan_to_dict(small_plan)
        doc["strokes"][0]["wobble"] = 1.0
        with pytest.raises(FormatError):
            plan_from_dict(doc)
        doc2 = plan_to_dict(small_plan)
        del doc2["strokes"][0]["x"]
        with pytest.raises(FormatError):
            plan_from_dict(doc2)

    def test_malformed_json_file(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(FormatError):
            load_plan(p)
