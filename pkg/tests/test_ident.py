import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcid.admg import Vertex as V
from pcid.errors import DomainError, QueryError, RefusalError
from pcid.families import past_confounding, gw, gw_known_hedge, random_spec
from pcid.ident import Hedge, enumerate_hedges, id_decide, validate_hedge
from pcid.periodic import unroll
from strategies import graphs

PAST_F = frozenset({V(0, 0), V(1, 1), V(2, 1), V(2, 2)})


@pytest.fixture
def f2():
    return unroll(past_confounding(), (0, 2))


def test_past_confounding_witness(f2):
    res = id_decide(f2, {V(1, 1)}, {V(2, 2)})
    assert not res.identifiable
    assert res.decision == "Unidentifiable"
    h = res.witness
    assert h.f_vertices == PAST_F
    assert h.fprime_vertices == {V(2, 2)}
    assert h.roots == {V(2, 2)}
    assert h.subquery_x is None
    assert validate_hedge(f2, {V(1, 1)}, {V(2, 2)}, h) == []


def test_y_before_x_is_identifiable(f2):
    assert id_decide(f2, {V(0, 2)}, {V(2, 1)}).identifiable


def test_g7_examples():
    g = unroll(gw(7), (0, 5))
    assert not id_decide(g, {V(0, 0)}, {V(6, 5)}).identifiable
    g1 = unroll(gw(7), (0, 1))
    assert id_decide(g1, {V(0, 0)}, {V(1, 1)}).identifiable


def test_known_g7_hedge_validates():
    h, x, y = gw_known_hedge(7)
    assert h.f_vertices == {V(0, 0), V(0, 1), V(1, 1), V(4, 0), V(5, 0), V(6, 0), V(6, 1)}
    assert h.fprime_vertices == h.f_vertices - {V(0, 0)}
    assert h.roots == {V(0, 1), V(1, 1), V(6, 1)}
    assert validate_hedge(unroll(gw(7), (0, 5)), x, {V(6, 5)}, h) == []


def test_broken_hedge_is_reported(f2):
    ok = id_decide(f2, {V(1, 1)}, {V(2, 2)}).witness
    fp = frozenset({V(2, 1)})
    bad = Hedge(ok.f_vertices, dict(ok.f_child), fp, {}, fp)
    problems = validate_hedge(f2, {V(1, 1)}, {V(2, 2)}, bad)
    assert problems
    assert any("root" in p for p in problems)


def test_query_errors(f2):
    with pytest.raises(QueryError):
        id_decide(f2, {V(1, 1)}, set())
    with pytest.raises(QueryError):
        id_decide(f2, {V(1, 1)}, {V(1, 1)})
    with pytest.raises(DomainError):
        id_decide(f2, {V(1, 7)}, {V(2, 2)})


def test_enumerate_examples(f2):
    hs = enumerate_hedges(f2, {V(1, 1)}, {V(2, 2)})
    assert [h.triple for h in hs] == [(PAST_F, frozenset({V(2, 2)}), frozenset({V(2, 2)}))]
    # Without the minimality filter every superset triple is listed too.
    everything = enumerate_hedges(f2, {V(1, 1)}, {V(2, 2)}, minimal=False)
    assert len(everything) == 104
    assert all(validate_hedge(f2, {V(1, 1)}, {V(2, 2)}, h) == [] for h in everything)
    assert enumerate_hedges(f2, {V(0, 2)}, {V(2, 2)}) == []
    with pytest.raises(RefusalError):
        enumerate_hedges(unroll(gw(7), (0, 2)), {V(0, 0)}, {V(0, 1)})


def test_variant_is_about_x_outside_the_hedge():
    # X[0,0] cannot affect X[2,2] here, so under the strict variant no hedge
    # contains all of X, while the classical variant still finds one.
    g = unroll(past_confounding(), (0, 2))
    x, y = {V(1, 1), V(0, 2)}, {V(2, 2)}
    assert enumerate_hedges(g, x, y, variant="strict") == []
    assert len(enumerate_hedges(g, x, y, variant="classical")) == 1
    res = id_decide(g, x, y)
    assert not res.identifiable
    assert res.witness.subquery_x == {V(1, 1)}
    assert validate_hedge(g, x, y, res.witness, "classical") == []
    assert validate_hedge(g, res.witness.subquery_x, y, res.witness) == []


def test_oracle_agrees_on_8_vertex_graphs():
    n = 0
    for seed in range(150):
        rng = random.Random(seed)
        w = rng.choice([1, 2, 4])
        g = unroll(random_spec(seed, w, 1, 0.4, 0.5), (0, 8 // w - 1))
        verts = g.ordered_vertices
        y = {verts[-1]}
        x = set(rng.sample(verts[:-1], rng.choice([1, 2])))
        res = id_decide(g, x, y)
        oracle = enumerate_hedges(g, x, y, variant="classical", minimal=False, limit=1)
        assert res.identifiable == (not oracle)
        n += 1
    assert n == 150


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_witnesses_are_sound(data):
    g = data.draw(graphs(max_layers=4))
    verts = g.ordered_vertices
    y = frozenset({data.draw(st.sampled_from(verts))})
    rest = [v for v in verts if v not in y]
    if not rest:
        return
    x = frozenset(data.draw(st.lists(st.sampled_from(rest), min_size=1, max_size=2, unique=True)))
    res = id_decide(g, x, y)
    if res.identifiable:
        return
    h = res.witness
    assert validate_hedge(g, x, y, h, "classical") == []
    assert validate_hedge(g, h.subquery_x or x, y, h) == []
    # shuffled inputs give the same verdict
    assert validate_hedge(g, set(reversed(list(x))), set(y), h, "classical") == []


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_no_ancestor_in_x_means_identifiable(data):
    g = data.draw(graphs(max_layers=4))
    verts = g.ordered_vertices
    y = frozenset({verts[0]})
    x = frozenset(v for v in verts[1:] if v.time > verts[0].time)
    if x:
        assert id_decide(g, x, y).identifiable
