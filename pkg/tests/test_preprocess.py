import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_cornell_sample
from graspdet import dataset, preprocess
from graspdet.errors import OutOfFrame
from graspdet.geometry import GraspRect, angle_diff
from graspdet.preprocess import (
    NormTargetVec,
    compose_input,
    denormalize_target,
    normalize_channel,
    normalize_target,
)


class TestNormalizeChannel:
    def test_endpoints_and_midpoint(self):
        out = normalize_channel(np.array([[0.0, 127.5, 255.0]]))
        np.testing.assert_allclose(out, [[-1.0, 0.0, 1.0]])

    def test_constant_channel(self):
        out = normalize_channel(np.full((5, 5), 42.0))
        assert (out == 0.0).all()

    def test_depth_midpoint(self):
        out = normalize_channel(np.array([[0.4, 0.8, 1.2]]))
        assert out[0, 1] == pytest.approx(0.0)

    def test_bounds_exact(self):
        rng = np.random.default_rng(0)
        chan = rng.random((30, 40)) * 100
        out = normalize_channel(chan)
        assert out.min() == -1.0 and out.max() == 1.0


class TestComposeInput:
    def test_shapes_and_transform(self, tmp_path):
        make_cornell_sample(tmp_path, "pcd0100", size=(480, 640))
        s = dataset.load_sample(str(tmp_path), "pcd0100")
        inp, tf = compose_input(s)
        assert inp.tensor.shape == (224, 224, 3)
        assert tf.sx == pytest.approx(224 / 640)
        assert tf.sy == pytest.approx(224 / 480)

    def test_square_input_identity_scale(self, tmp_path):
        make_cornell_sample(tmp_path, "pcd0100", size=(224, 224),
                            rects=[GraspRect(112, 112, 0.2, 50, 25)])
        s = dataset.load_sample(str(tmp_path), "pcd0100")
        _, tf = compose_input(s)
        assert tf.sx == 1.0 and tf.sy == 1.0

    def test_channel_bounds(self, tmp_path):
        make_cornell_sample(tmp_path, "pcd0100")
        s = dataset.load_sample(str(tmp_path), "pcd0100")
        inp, _ = compose_input(s)
        for ch in range(3):
            assert inp.tensor[:, :, ch].min() == -1.0
            assert inp.tensor[:, :, ch].max() == 1.0

    def test_deterministic(self, tmp_path):
        make_cornell_sample(tmp_path, "pcd0100")
        s = dataset.load_sample(str(tmp_path), "pcd0100")
        a, _ = compose_input(s)
        b, _ = compose_input(s)
        assert (a.tensor == b.tensor).all()

    def test_depth_holes_map_to_minus_one(self, tmp_path):
        make_cornell_sample(tmp_path, "pcd0100", size=(224, 224))
        s = dataset.load_sample(str(tmp_path), "pcd0100")
        s.depth_missing[:50, :50] = True
        inp, _ = compose_input(s)
        assert inp.tensor[10, 10, 2] == -1.0

    def test_map_rect_anisotropic(self, tmp_path):
        make_cornell_sample(tmp_path, "pcd0100", size=(480, 640))
        s = dataset.load_sample(str(tmp_path), "pcd0100")
        _, tf = compose_input(s)
        r = GraspRect(320, 240, 0.0, 100, 50)
        m = tf.map_rect(r)
        assert m.x == pytest.approx(112)
        assert m.y == pytest.approx(112)
        assert m.w == pytest.approx(100 * 224 / 640)


class TestTargetNormalization:
    def test_direct_values(self):
        t = normalize_target(GraspRect(112, 112, 0.0, 112, 56))
        assert (t.x_n, t.y_n, t.s_n, t.c_n, t.w_n, t.h_n) == pytest.approx(
            (0.5, 0.5, 0.5, 1.0, 0.5, 0.25))

    def test_minus_half_pi(self):
        t = normalize_target(GraspRect(10, 10, -math.pi / 2, 5, 5))
        assert t.s_n == pytest.approx(0.0)
        assert t.c_n == pytest.approx(0.5)

    def test_endpoints(self):
        t = normalize_target(GraspRect(0, 224, 0.1, 10, 10))
        assert t.x_n == 0.0 and t.y_n == 1.0

    def test_out_of_frame(self):
        with pytest.raises(OutOfFrame):
            normalize_target(GraspRect(300, 10, 0, 10, 10))

    def test_output_in_unit_cube(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            r = GraspRect(rng.uniform(0, 224), rng.uniform(0, 224),
                          rng.uniform(-math.pi, math.pi),
                          rng.uniform(1, 224), rng.uniform(1, 224))
            arr = normalize_target(r).as_array()
            assert (arr >= 0).all() and (arr <= 1).all()

    def test_denormalize_inverse(self):
        t = NormTargetVec(0.5, 0.5, 0.5, 1.0, 0.5, 0.25)
        r = denormalize_target(t)
        assert (r.x, r.y, r.theta, r.w, r.h) == pytest.approx(
            (112, 112, 0, 112, 56))

    def test_degenerate_angle_vector(self):
        r = denormalize_target(NormTargetVec(0.5, 0.5, 0.5, 0.5, 0.5, 0.5))
        assert r.theta == 0.0

    def test_clamping_total(self):
        r = denormalize_target(NormTargetVec(-0.5, 1.7, 0.2, 0.9, -1.0, 2.0))
        assert r.x == 0.0 and r.y == 224.0
        assert r.w == 1.0 and r.h == 224.0

    @given(
        x=st.floats(0, 224), y=st.floats(0, 224),
        theta=st.floats(-math.pi, math.pi),
        w=st.floats(1, 224), h=st.floats(1, 224),
    )
    @settings(max_examples=300)
    def test_round_trip(self, x, y, theta, w, h):
        r = GraspRect(x, y, theta, w, h)
        back = denormalize_target(normalize_target(r))
        assert back.x == pytest.approx(r.x, abs=1e-9)
        assert back.y == pytest.approx(r.y, abs=1e-9)
        assert back.w == pytest.approx(r.w, abs=1e-9)
        assert back.h == pytest.approx(r.h, abs=1e-9)
        assert angle_diff(back, r) < 1e-9
