"""Acceptance suite: one group of tests per criterion.

The terminal summary prints one PASS/FAIL line per criterion.
"""

import random
import time

import pytest

from corpus import same_layer_query, small_window_corpus
from pcid import (
    Vertex as V, decide_all_shifts, decide_bounded, enumerate_hedges, past_confounding, gw, gw_known_hedge,
    id_decide, lookback_constant, random_spec, reduce_latency, unroll, validate_hedge,
)
from pcid.bounded import CutPlan, compress_hedge, layer_signatures, phi_cut
from pcid.periodic import PeriodicSpec, distance, shift_set

pytestmark = pytest.mark.criterion

CORPUS = small_window_corpus(300)


# -- 1 ----------------------------------------------------------------------------


def test_criterion_1_unique_hedge_needs_the_past():
    t0 = time.perf_counter()
    spec = past_confounding()
    x, y = {V(1, 1)}, {V(2, 2)}
    full = decide_bounded(spec, x, y, "full")
    assert full.decision == "Unidentifiable"
    assert full.window == (0, 2)
    hedges = enumerate_hedges(unroll(spec, (0, 2)), x, y)
    assert len(hedges) == 1
    (h,) = hedges
    assert h.f_vertices == {V(0, 0), V(1, 1), V(2, 1), V(2, 2)}
    assert h.fprime_vertices == {V(2, 2)}
    assert full.witness.triple == h.triple
    zero = decide_bounded(spec, x, y, 0)
    assert zero.decision == "Identifiable"
    assert zero.window == (1, 2)
    assert time.perf_counter() - t0 < 1.0


# -- 2 ----------------------------------------------------------------------------


@pytest.mark.parametrize("w", [7, 10, 13])
def test_criterion_2_lower_bound_family(w):
    spec = gw(w)
    g = unroll(spec, (0, w - 2))
    x, y = {V(0, 0)}, {V(w - 1, w - 2)}
    res = id_decide(g, x, y)
    assert not res.identifiable
    assert validate_hedge(g, res.witness.subquery_x or x, y, res.witness) == []
    assert validate_hedge(g, x, y, res.witness, "classical") == []
    h, hx, hy = gw_known_hedge(w)
    assert (hx, hy) == (frozenset(x), frozenset(y))
    assert validate_hedge(g, hx, hy, h) == []

    near = (w // 3) - 1  # floor(w/3 - 1) for w = 3k + 1
    checked = 0
    for t in range(near + 1):
        gt = unroll(spec, (0, t))
        for j in range(w):
            v = V(j, t)
            if v == V(0, 0):
                continue
            assert distance(x, {v}) <= near
            assert id_decide(gt, x, {v}).identifiable, v
            checked += 1
    assert checked == w * (near + 1) - 1


# -- 3 ----------------------------------------------------------------------------


def test_criterion_3_oracle_equivalence():
    n = mismatches = unid = 0
    for case in CORPUS:
        assert len(case.graph) <= 12
        for x, y in case.queries:
            res = id_decide(case.graph, x, y)
            oracle = enumerate_hedges(case.graph, x, y, variant="classical", minimal=False, limit=1)
            n += 1
            if res.identifiable == bool(oracle):
                mismatches += 1
            if not res.identifiable:
                unid += 1
                assert validate_hedge(case.graph, x, y, res.witness, "classical") == []
    assert len(CORPUS) >= 300
    assert 0 < unid < n
    assert mismatches == 0, f"{mismatches}/{n} decisions disagree with the oracle"


# -- 4 ----------------------------------------------------------------------------


def _cut_cases(target=500):
    """(spec, hedge, x, y, plan, T) with signature-equal layers outside x and y."""
    out, compress_inputs = [], []
    seed = 0
    while len(out) < target or seed < 150:
        rng = random.Random(seed)
        w = rng.choice([1, 2, 3])
        T = rng.randint(6, 14)
        spec = random_spec(seed, w, 1, rng.uniform(0.2, 0.5), rng.uniform(0.3, 0.7))
        g = unroll(spec, (0, T))
        seed += 1
        for _ in range(3):
            tx = rng.randint(0, T)
            ty = rng.randint(tx, T)
            x, y = frozenset({V(rng.randrange(w), tx)}), frozenset({V(rng.randrange(w), ty)})
            if x == y:
                continue
            res = id_decide(g, x, y, minimize=rng.random() < 0.5)
            if res.identifiable:
                continue
            h = res.witness
            xe = h.subquery_x or x
            compress_inputs.append((spec, h, xe, y, T))
            sig = layer_signatures(g, h, xe, y)
            busy = {v.time for v in xe | y}
            for b in range(T):
                for top in range(b + 1, T + 1):
                    if top in busy:
                        break
                    if sig[b] == sig[top]:
                        out.append((spec, h, xe, y, CutPlan(b, top - b), T))
    return out, compress_inputs


def test_criterion_4_cut_and_compress_validity():
    cases, compress_inputs = _cut_cases()
    assert len(cases) >= 500
    bad = []
    for spec, h, x, y, plan, T in cases:
        h2, x2, y2 = phi_cut(spec, h, x, y, plan, window=(0, T))
        problems = validate_hedge(unroll(spec, (0, T - plan.delta)), x2, y2, h2)
        if problems:
            bad.append((plan, problems))
    assert not bad, f"{len(bad)}/{len(cases)} cuts broke the hedge: {bad[:3]}"

    nontrivial = 0
    for spec, h, x, y, T in compress_inputs:
        for region in ("past", "between"):
            c = compress_hedge(spec, h, x, y, region, window=(0, T))
            assert validate_hedge(unroll(spec, (0, T)), c.x, c.y, c.hedge) == []
            assert c.hedge.span <= h.span
            nontrivial += c.cuts > 0
    assert nontrivial > 0


# -- 5 ----------------------------------------------------------------------------


def test_criterion_5_auto_equals_full_at_3000():
    n = unid = 0
    for seed in range(24):
        rng = random.Random(seed)
        spec = random_spec(seed, 2, 1, rng.uniform(0.2, 0.6), rng.uniform(0.3, 0.7))
        assert lookback_constant(spec) == 2916
        for _ in range(2):
            rx, ry, dt = rng.randrange(2), rng.randrange(2), rng.randint(0, 3)
            if rx == ry and dt == 0:
                dt = 1
            x, y = {V(rx, 3000)}, {V(ry, 3000 + dt)}
            auto = decide_bounded(spec, x, y, "auto")
            full = decide_bounded(spec, x, y, "full")
            assert auto.window[0] == 84 and full.window[0] == 0
            assert auto.identifiable == full.identifiable, (seed, x, y)
            assert auto.label == full.label == "proved"
            n += 1
            unid += not full.identifiable
    assert n >= 20
    assert 0 < unid < n


# -- 6 ----------------------------------------------------------------------------


def test_criterion_6_all_shifts_consistency():
    checked = 0
    for case in CORPUS:
        q = same_layer_query(case)
        if q is None:
            continue
        x, y = q
        res = decide_all_shifts(case.spec, x, y, c_override=50)
        first = None
        for delta in range(50):
            r = decide_bounded(case.spec, x, shift_set(y, delta), lookback=50)
            if not r.identifiable:
                first = (delta, r.witness)
                break
        if first is None:
            assert res.all_identifiable
        else:
            assert not res.all_identifiable
            assert res.delta == first[0]
            assert res.witness == first[1]
        checked += 1
    assert checked >= 150


def test_criterion_6_g7_fails_at_shift_5():
    res = decide_all_shifts(gw(7), {V(0, 0)}, {V(6, 0)}, c_override=7)
    assert not res.all_identifiable
    assert res.delta == 5
    g = unroll(gw(7), res.window)
    assert validate_hedge(g, {V(0, 0)}, {V(6, 5)}, res.witness) == []
    assert res.label == "heuristic"


# -- 7 ----------------------------------------------------------------------------


def test_criterion_7_constants():
    assert lookback_constant(PeriodicSpec(1, 1)) == 32
    assert lookback_constant(PeriodicSpec(2, 1)) == 2916
    assert lookback_constant(PeriodicSpec(3, 1)) == 524288


def _edges(g):
    return g.directed_edges, g.bidirected_edges


def test_criterion_7_latency_reduction_bijection():
    specs = [c.spec for c in CORPUS if c.spec.latency == 2]
    specs += [random_spec(seed, 1 + seed % 3, 3) for seed in range(40)]
    assert len(specs) >= 100
    for spec in specs:
        red = reduce_latency(spec)
        L, w = spec.latency, spec.width
        assert red.reduced.latency == 1 and red.reduced.width == L * w
        n = 4
        g = unroll(spec, (0, L * n - 1))
        gr = unroll(red.reduced, (0, n - 1))
        fwd = {red.forward(v) for v in g}
        assert fwd == gr.vertices and len(fwd) == len(g)
        assert all(red.backward(red.forward(v)) == v for v in g)
        assert all(red.forward(red.backward(v)) == v for v in gr)
        d = {(red.forward(a), red.forward(b)) for a, b in g.directed_edges}
        assert d == gr.directed_edges
        bi = {frozenset((red.forward(a), red.forward(b))) for a, b in g.bidirected_edges}
        assert bi == {frozenset(e) for e in gr.bidirected_edges}
