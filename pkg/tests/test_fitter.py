import math

import numpy as np
import pytest

from primsketch.affine import TransformParams, compose
from primsketch.distance_field import Grid, field
from primsketch.fitter import (
    FitConfig, Objective, anchor_of, coarse_lattice, curve_moments, fd_gradient, fit_all, fit_primitive,
    project, refine, transformed_primitive,
)
from primsketch.primitives import default_primitives, primitive_map
from primsketch.sketch_model import VOCABULARY, Stroke, normalize_stroke

from synth import brute_force, free_form, traced_stroke

PM = primitive_map()


class TestConfig:
    def test_defaults(self):
        c = FitConfig()
        assert (c.coarse_theta_steps, c.refine_top_k, c.max_refine_iters) == (12, 3, 200)
        assert c.fd_epsilon == 1e-3 and c.rel_tol == 1e-5

    @pytest.mark.parametrize("kw", [{"coarse_theta_steps": 0}, {"fd_epsilon": 0},
                                    {"coarse_scale_levels": (0.01,)}, {"refine_top_k": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            FitConfig(**kw)

    def test_from_dict_rejects_unknown_keys(self):
        assert FitConfig.from_dict({"refine_top_k": 5}).refine_top_k == 5
        with pytest.raises(ValueError):
            FitConfig.from_dict({"temperature": 1})


class TestLattice:
    def test_size_and_order(self):
        lat = coarse_lattice(FitConfig())
        # 12 theta1 x 3 anisotropic levels x 12 theta2, plus 12 pure rotations
        assert lat.shape == (12 * 3 * 12 + 12, 3)
        keys = [tuple(r) for r in lat]
        assert keys == sorted(keys)

    def test_project_clips_scale_only(self):
        v = project([[9.0, 3.0, -9.0], [1.0, 0.0, 1.0]])
        assert v.tolist() == [[9.0, 1.0, -9.0], [1.0, 0.05, 1.0]]


def test_placement_matches_target_moments():
    rng = np.random.default_rng(0)
    target = normalize_stroke(free_form(rng)).points
    anchor = anchor_of(target)
    params = rng.uniform([0, 0.05, 0], [6, 1, 6], (5, 3))
    polys, scale, offset = transformed_primitive(PM["u_shape"], params, anchor)
    center, radius = curve_moments(polys)
    np.testing.assert_allclose(center, np.tile(anchor.center, (5, 1)), atol=1e-12)
    np.testing.assert_allclose(radius, anchor.radius, rtol=1e-12)
    raw = np.einsum("ij,pj->pi", compose(TransformParams(*params[0])), PM["u_shape"].canonical_points)
    np.testing.assert_allclose(polys[0], scale[0] * raw + offset[0], atol=1e-12)


def test_numba_placement_matches_numpy():
    rng = np.random.default_rng(1)
    anchor = anchor_of(rng.normal(size=(6, 2)))
    for p in default_primitives():
        params = rng.uniform([0, 0.05, 0], [6, 1, 6], (4, 3))
        for a, b in zip(transformed_primitive(p, params, anchor),
                        transformed_primitive(p, params, anchor, fast=False)):
            np.testing.assert_allclose(a, b, atol=1e-12)


def test_curve_moments_ignore_sampling():
    coarse = np.array([[[0.0, 0.0], [4.0, 0.0]]])
    fine = np.linspace([0.0, 0.0], [4.0, 0.0], 17)[None]
    for a, b in zip(curve_moments(coarse), curve_moments(fine)):
        np.testing.assert_allclose(a, b, atol=1e-12)
    # uniform rod of length 4: RMS radius 4 / sqrt(12)
    assert curve_moments(coarse)[1][0] == pytest.approx(4 / math.sqrt(12))


def test_traced_primitive_is_representable():
    # placing the source transform on the traced stroke reproduces it exactly
    rng = np.random.default_rng(2)
    for p in default_primitives():
        s, rec = traced_stroke(p, rng)
        ns = normalize_stroke(s)
        polys, _, _ = transformed_primitive(p, [[rec.theta1, rec.sx, rec.theta2]], anchor_of(ns.points))
        np.testing.assert_allclose(polys[0], ns.points, atol=1e-9)


class TestGradient:
    def test_fd_gradient_of_quadratic_is_exact(self):
        a = np.array([[3.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, 1.0]])

        def obj(v):
            v = np.atleast_2d(v)
            return np.einsum("bi,ij,bj->b", v, a, v)

        v = np.array([0.3, -0.7, 1.1])
        np.testing.assert_allclose(fd_gradient(obj, v, 1e-3), 2 * a @ v, rtol=1e-9)

    def test_objective_counts_evaluations(self):
        s = normalize_stroke(free_form(np.random.default_rng(1)))
        obj = Objective(field(s.points, Grid(16)), PM["arc"], anchor_of(s.points))
        obj(np.zeros((4, 3)) + [0, 1, 0])
        fd_gradient(obj, np.array([0.1, 0.5, 0.2]), 1e-3)
        assert obj.evals == 10


class TestRefine:
    def test_history_is_monotone(self):
        rng = np.random.default_rng(2)
        s = normalize_stroke(free_form(rng))
        obj = Objective(field(s.points, Grid(32)), PM["u_shape"], anchor_of(s.points))
        v0 = np.array([0.3, 0.6, 1.0])
        f0 = float(obj(v0[None])[0])
        v, f, hist = refine(obj, v0, f0, FitConfig())
        assert hist[0] == f0 and hist[-1] == f <= f0
        assert all(b <= a for a, b in zip(hist, hist[1:]))
        assert 0.05 <= v[1] <= 1.0

    def test_zero_iterations_keeps_start(self):
        s = normalize_stroke(free_form(np.random.default_rng(3)))
        obj = Objective(field(s.points, Grid(16)), PM["arc"], anchor_of(s.points))
        v0 = np.array([0.0, 1.0, 0.0])
        v, f, hist = refine(obj, v0, 0.5, FitConfig(max_refine_iters=0))
        assert v.tolist() == v0.tolist() and hist == [0.5]


class TestFit:
    def test_straight_segment(self):
        s = normalize_stroke(Stroke([[0, 0], [3, 4]]))
        r = fit_primitive(s, PM["line"])
        assert r.loss <= 1e-3
        d = compose(r.params) @ np.array([1.0, 0.0])
        # the line is symmetric under a half turn, so compare directions up to sign
        assert abs(abs(d @ np.array([0.6, 0.8])) / np.linalg.norm(d) - 1) < 1e-3

    def test_circle_self_fit(self):
        s = normalize_stroke(Stroke(PM["circle"].canonical_points))
        r = fit_primitive(s, PM["circle"])
        assert r.loss <= 1e-3
        assert r.params.sx > 0.99

    def test_circle_beats_line_by_a_wide_margin(self):
        s = normalize_stroke(Stroke(PM["circle"].canonical_points * 7 + 3))
        circle = fit_primitive(s, PM["circle"]).loss
        line = fit_primitive(s, PM["line"]).loss
        assert line / max(circle, 1e-12) > 5

    def test_fit_all_order(self):
        s = normalize_stroke(free_form(np.random.default_rng(4)))
        res = fit_all(s, default_primitives(), Grid(16), cfg=FitConfig(coarse_theta_steps=6))
        assert [r.primitive_id for r in res] == list(VOCABULARY)

    def test_fit_all_requires_primitives(self):
        s = normalize_stroke(free_form(np.random.default_rng(4)))
        with pytest.raises(ValueError):
            fit_all(s, [])

    def test_deterministic(self):
        s = normalize_stroke(free_form(np.random.default_rng(5)))
        a = fit_primitive(s, PM["triangle"], Grid(24))
        b = fit_primitive(s, PM["triangle"], Grid(24))
        assert a == b

    def test_reported_loss_matches_field(self):
        s = normalize_stroke(free_form(np.random.default_rng(6)))
        g = Grid(32)
        r = fit_primitive(s, PM["corner"], g)
        poly, _, _ = transformed_primitive(PM["corner"], [[r.params.theta1, r.params.sx, r.params.theta2]],
                                           anchor_of(s.points))
        direct = np.abs(field(s.points, g).values - field(poly[0], g).values).mean()
        assert r.loss == pytest.approx(direct, rel=1e-9)

    def test_traced_square_recovered(self):
        s, _ = traced_stroke(PM["square"], np.random.default_rng(7))
        r = fit_primitive(normalize_stroke(s), PM["square"])
        assert r.loss <= 1e-3


def test_matches_brute_force_lattice():
    # reduced lattice for the unit suite; the acceptance run uses 180 x 180 x 20
    rng = np.random.default_rng(8)
    g = Grid(16)
    for pid in ("arc", "corner", "u_shape"):
        s = normalize_stroke(free_form(rng))
        oracle, _ = brute_force(s, PM[pid], g, n_theta=72, n_sx=12)
        got = fit_primitive(s, PM[pid], g).loss
        assert got <= oracle * 1.02
