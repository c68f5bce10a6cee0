"""Built-in periodic graphs: the lower-bound family, two small fixtures and
seeded random specs."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .admg import Vertex
from .errors import DomainError
from .ident import Hedge
from .periodic import PeriodicSpec


def gw(w: int) -> PeriodicSpec:
    """Width-``w`` latency-1 graph with rows wrapping modulo ``w``.

    Directed: row i feeds rows i and i+3 one step later.
    Bidirected: row i is confounded with rows i+1 and i+2 one step later.
    """
    if w < 4 or w % 3 != 1:
        raise DomainError(f"the lower-bound family needs w = 3k + 1 >= 4, got {w}")
    directed = [(i, i, 1) for i in range(w)] + [(i, (i + 3) % w, 1) for i in range(w)]
    bidirected = [(i, (i + 1) % w, 1) for i in range(w)] + [(i, (i + 2) % w, 1) for i in range(w)]
    return PeriodicSpec(w, 1, directed, bidirected)


def past_confounding() -> PeriodicSpec:
    """Three rows where the confounding reaches back one layer.

    P(X[2,2] | do X[1,1]) looks identifiable on layers 1..2 alone; the only
    hedge needs X[0,0].
    """
    return PeriodicSpec(
        3, 1,
        directed=[
            (0, 2, 1),  # X[0,t] -> X[2,t+1]
            (1, 2, 1),  # X[1,t] -> X[2,t+1]
            (2, 2, 1),  # X[2,t] -> X[2,t+1]
        ],
        bidirected=[
            (0, 1, 1),  # X[0,t] <-> X[1,t+1]
            (0, 2, 1),  # X[0,t] <-> X[2,t+1]
            (2, 2, 1),  # X[2,t] <-> X[2,t+1]
        ],
    )


def contemporaneous() -> PeriodicSpec:
    """Three rows with one contemporaneous edge X[0,t] -> X[1,t]."""
    return PeriodicSpec(
        3, 1,
        directed=[(0, 0, 1), (0, 1, 0), (1, 0, 1), (2, 1, 1), (2, 2, 1)],
        bidirected=[(1, 2, 1)],
    )


def random_spec(seed: int, w: int, latency: int = 1,
                density_dir: float = 0.3, density_bi: float = 0.3) -> PeriodicSpec:
    """Each possible template is kept independently with the given density.

    Contemporaneous directed templates that would close a cycle are skipped.
    """
    if w < 1 or latency < 1:
        raise DomainError("width and latency must be positive")
    rng = random.Random(seed)
    directed, bidirected = [], []
    reach = {i: {i} for i in range(w)}  # lag-0 descendants, for cycle rejection
    for lag in range(latency + 1):
        for a in range(w):
            for b in range(w):
                if a == b and lag == 0:
                    continue
                if rng.random() < density_dir:
                    if lag == 0:
                        if a in reach[b]:
                            continue
                        for i in range(w):
                            if a in reach[i]:
                                reach[i] |= reach[b]
                    directed.append((a, b, lag))
    for lag in range(latency + 1):
        for a in range(w):
            for b in range(a + 1 if lag == 0 else 0, w):
                if rng.random() < density_bi:
                    bidirected.append((a, b, lag))
    return PeriodicSpec(w, latency, directed, bidirected)


@dataclass(frozen=True)
class FamilyRequest:
    kind: str
    w: int | None = None
    seed: int = 0
    latency: int = 1
    density_dir: float = 0.3
    density_bi: float = 0.3


def generate(req: FamilyRequest) -> PeriodicSpec:
    kind = req.kind.lower()
    if kind == "gw":
        if req.w is None:
            raise DomainError("gw needs a width")
        return gw(req.w)
    if kind == "past-confounding":
        return past_confounding()
    if kind == "contemporaneous":
        return contemporaneous()
    if kind == "random":
        if req.w is None:
            raise DomainError("random needs a width")
        return random_spec(req.seed, req.w, req.latency, req.density_dir, req.density_bi)
    raise DomainError(f"unknown family {req.kind!r}")


def gw_known_hedge(w: int) -> tuple[Hedge, frozenset[Vertex], frozenset[Vertex]]:
    """The explicit hedge for do X[0,0] on X[w-1, w-2] in ``gw(w)``."""
    if w < 7 or w % 3 != 1:
        raise DomainError(f"the known hedge needs w = 3k + 1 >= 7, got {w}")
    V = Vertex
    x0 = V(0, 0)
    roots = frozenset({V(0, 1), V(1, 1), V(w - 1, 1)})
    child = {
        V(w - 3, 0): V(0, 1),  # w-3 + 3 wraps to row 0
        V(w - 2, 0): V(1, 1),
        V(w - 1, 0): V(w - 1, 1),
    }
    fprime = frozenset(child) | roots
    f_child = dict(child)
    f_child[x0] = V(0, 1)
    hedge = Hedge(fprime | {x0}, f_child, fprime, child, roots)
    return hedge, frozenset({x0}), frozenset({V(w - 1, w - 2)})
