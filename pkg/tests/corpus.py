"""Seeded corpora shared by the property and acceptance suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from pcid.admg import SegmentGraph, Vertex
from pcid.families import random_spec
from pcid.periodic import PeriodicSpec, unroll


@dataclass(frozen=True)
class Case:
    seed: int
    spec: PeriodicSpec
    graph: SegmentGraph
    queries: tuple[tuple[frozenset[Vertex], frozenset[Vertex]], ...]


def small_window_corpus(n: int = 300, max_vertices: int = 12) -> list[Case]:
    """Random specs with w <= 3, L <= 2 on windows of at most ``max_vertices``.

    Each spec gets two singleton and two two-element intervention sets; the
    outcome is one vertex from the upper half of the window.
    """
    out = []
    for seed in range(n):
        rng = random.Random(seed)
        w = rng.choice([1, 2, 3])
        latency = rng.choice([1, 2])
        spec = random_spec(seed, w, latency, rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6))
        g = unroll(spec, (0, max_vertices // w - 1))
        verts = g.ordered_vertices
        queries = []
        for k in (1, 1, 2, 2):
            y = frozenset([rng.choice(verts[len(verts) // 2:])])
            x = frozenset(rng.sample([v for v in verts if v not in y], k))
            queries.append((x, y))
        out.append(Case(seed, spec, g, tuple(queries)))
    return out


def same_layer_query(case: Case) -> tuple[frozenset[Vertex], frozenset[Vertex]] | None:
    """A query with tmax(x) == tmin(y) on the case's spec, or None for w = 1."""
    w = case.spec.width
    if w < 2:
        return None
    rng = random.Random(10_000 + case.seed)
    t = rng.randint(0, 4)
    rx, ry = rng.sample(range(w), 2)
    return frozenset({Vertex(rx, t)}), frozenset({Vertex(ry, t)})
