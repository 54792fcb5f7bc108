import json
import math

import numpy as np
import pytest

from primsketch.affine import TransformParams, reconstruct
from primsketch.distance_field import Grid, dt_loss_mean, field
from primsketch.fitter import FitConfig, FitResult
from primsketch.matcher import (
    KAPPA, Compatibility, PrimitiveSketch, abstract_sketch, compatibility, dump_results, load_results,
    select, weighted_loss,
)
from primsketch.primitives import default_primitives, primitive_map
from primsketch.sketch_model import VOCABULARY, Sketch, Stroke, normalize_stroke

from synth import free_form, traced_stroke

PM = primitive_map()
FAST = FitConfig(coarse_theta_steps=8)


def fake_fits(losses, ids=None):
    ids = ids or VOCABULARY[:len(losses)]
    return [FitResult(i, TransformParams(), float(x), 0, 1.0, (0.0, 0.0)) for i, x in zip(ids, losses)]


class TestCompatibility:
    def test_uniform(self):
        c = compatibility(fake_fits([0.3] * 7))
        np.testing.assert_allclose(c.probs, 1 / 7)

    def test_two_way_closed_form(self):
        c = compatibility(fake_fits([0.0, 1.0]), kappa=0.2)
        sig5 = 1 / (1 + math.exp(-5))
        np.testing.assert_allclose(c.probs, [sig5, 1 - sig5], rtol=1e-12)
        np.testing.assert_allclose(c.probs, [0.99331, 0.00669], atol=1e-5)

    def test_argmax_is_argmin(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            losses = rng.uniform(0, 1, 7)
            assert int(np.argmax(compatibility(fake_fits(losses)).probs)) == int(np.argmin(losses))

    def test_lookup(self):
        c = compatibility(fake_fits([0.1, 0.2]))
        assert c["line"] > c["arc"]
        assert c.scores[0][0] == "line"

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            compatibility([])
        with pytest.raises(ValueError):
            compatibility(fake_fits([0.1]), kappa=0)

    def test_default_kappa(self):
        assert KAPPA == 0.2


class TestWeightedLoss:
    def test_point_mass(self):
        fits = fake_fits([0.4, 0.7])
        comp = Compatibility(("line", "arc"), np.array([1.0, 0.0]))
        assert weighted_loss(fits, comp) == 0.4

    def test_uniform_mean(self):
        fits = fake_fits([1.0, 2.0, 3.0])
        comp = Compatibility(("line", "arc", "circle"), np.full(3, 1 / 3))
        assert weighted_loss(fits, comp) == pytest.approx(2.0)

    def test_bounded(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            losses = rng.uniform(0, 2, 7)
            wl = weighted_loss(fake_fits(losses), compatibility(fake_fits(losses)))
            assert losses.min() - 1e-12 <= wl <= losses.max() + 1e-12

    def test_misaligned(self):
        with pytest.raises(ValueError):
            weighted_loss(fake_fits([1.0, 2.0]), Compatibility(("arc", "line"), np.array([0.5, 0.5])))


class TestSelect:
    def test_argmin(self):
        assert select(fake_fits([0.4, 0.1, 0.9])).primitive_id == "arc"

    def test_tie_goes_to_vocabulary_order(self):
        assert select(fake_fits([0.2, 0.2], ids=["arc", "line"])).primitive_id == "line"

    def test_traced_square(self):
        s, _ = traced_stroke(PM["square"], np.random.default_rng(2))
        sk = abstract_sketch(Sketch((s,)))
        assert sk.records[0].primitive_id == "square"


class TestAbstract:
    def test_round_trip_suite(self):
        rng = np.random.default_rng(3)
        strokes, ids = [], []
        for p in default_primitives():
            s, _ = traced_stroke(p, rng)
            strokes.append(s)
            ids.append(p.id)
        ps = abstract_sketch(Sketch(tuple(strokes), id="suite", category="synthetic"))
        assert [r.primitive_id for r in ps.records] == ids
        assert ps.stroke_indices == tuple(range(7)) and ps.skipped == ()
        assert all(r <= 1e-3 for r in ps.residuals)

    def test_reconstruction_consistency(self):
        rng = np.random.default_rng(4)
        sk = Sketch(tuple(free_form(rng) for _ in range(3)))
        g = Grid(32)
        ps = abstract_sketch(sk, grid=g, cfg=FAST)
        rec = reconstruct(ps.records)
        for src, drawn, res in zip(sk.strokes, rec.strokes, ps.residuals):
            ns = normalize_stroke(src)
            approx = field((drawn.points - ns.mu) / (ns.w / 2), g)
            assert dt_loss_mean(field(ns.points, g), approx) <= res + 1e-6

    def test_records_land_on_the_stroke(self):
        s, _ = traced_stroke(PM["triangle"], np.random.default_rng(5))
        ps = abstract_sketch(Sketch((s,)))
        drawn = reconstruct(ps.records).strokes[0].points
        lo, hi = s.points.min(axis=0), s.points.max(axis=0)
        side = np.max(hi - lo)
        np.testing.assert_allclose(drawn.min(axis=0), lo, atol=0.03 * side)
        np.testing.assert_allclose(drawn.max(axis=0), hi, atol=0.03 * side)

    def test_compat_rows_sum_to_one(self):
        ps = abstract_sketch(Sketch((free_form(np.random.default_rng(6)),)), grid=Grid(16), cfg=FAST)
        assert len(ps.compat[0]) == 7
        assert sum(ps.compat[0]) == pytest.approx(1.0)

    def test_sub_vocabulary(self):
        from primsketch.primitives import subset
        ps = abstract_sketch(Sketch((free_form(np.random.default_rng(7)),)), subset(["line", "arc"]),
                             Grid(16), cfg=FAST)
        assert ps.records[0].primitive_id in ("line", "arc")
        assert len(ps.compat[0]) == 2


def test_results_json_round_trip():
    rng = np.random.default_rng(8)
    sk = Sketch(tuple(free_form(rng) for _ in range(2)), id="k1", category="cat")
    ps = abstract_sketch(sk, grid=Grid(16), cfg=FAST)
    text = dump_results([ps])
    doc = json.loads(text)
    assert doc["format"] == "primsketch-records" and doc["primitive_ids"] == list(VOCABULARY)
    (back,) = load_results(text)
    assert back.sketch_id == "k1" and back.category == "cat"
    assert back.residuals == ps.residuals
    for a, b in zip(reconstruct(back.records).strokes, reconstruct(ps.records).strokes):
        np.testing.assert_allclose(a.points, b.points, atol=1e-9)


def test_primitive_sketch_defaults():
    ps = PrimitiveSketch(())
    assert ps.method == "pmn" and ps.records == ()
