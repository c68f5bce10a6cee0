"""Identification on periodic graphs through finite windows.

* ``decide_bounded`` looks back a bounded number of layers before X.
* ``decide_all_shifts`` checks P(Y shifted by d | do X) for every d >= 0.
* ``layer_signature`` / ``phi_cut`` / ``compress_hedge`` are the
  cut-and-glue machinery: two layers of a hedge with the same signature can
  be glued together after deleting everything in between, and the result
  is again a hedge.
"""

from __future__ import annotations

import os
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Union

from .admg import SegmentGraph, Vertex, canonical, reach_up, vset
from .errors import PreconditionError, QueryError, RefusalError
from .ident import Hedge, IdResult, Variant, _build_hedge, _roots_if_hedge, id_decide, validate_hedge
from .periodic import PeriodicSpec, lookback_constant, reduce_latency, shift_set, unroll

Lookback = Union[Literal["auto", "full"], int]
Region = Literal["past", "between"]
_REGION_ALIASES = {"past": "past", "pastofx": "past", "between": "between", "betweenxy": "between"}

DEFAULT_MAX_WINDOW = 100_000
NOT_STABILIZED = "NotStabilized"


def max_window_layers() -> int:
    """Window budget in layers, overridable through ``PCID_MAX_WINDOW``."""
    raw = os.environ.get("PCID_MAX_WINDOW")
    return int(raw) if raw else DEFAULT_MAX_WINDOW


# -- signatures ---------------------------------------------------------------------


@dataclass(frozen=True)
class LayerSignature:
    """Per-layer fingerprint of a hedge.

    ``alpha_f`` and ``alpha_fprime`` are ordered partitions of the rows into
    ``w + 1`` blocks: first the rows absent from the forest at this layer,
    then its left-connected groups sorted by smallest row, padded with empty
    blocks.  ``beta`` holds the rows that are ancestors of Y once edges into
    X are removed.
    """

    alpha_f: tuple[frozenset[int], ...]
    alpha_fprime: tuple[frozenset[int], ...]
    beta: frozenset[int]


def left_connected_blocks(g: SegmentGraph, vertices: Iterable[Vertex],
                          layers: Iterable[int]) -> dict[int, list[frozenset[int]]]:
    """Rows of each requested layer grouped by left-connectedness.

    Two vertices of layer t are left-connected when a bidirected path joins
    them through ``vertices`` using only layers <= t.  Layers are swept
    upward with a union-find, so all layers cost one pass.
    """
    verts = canonical(v for v in vertices if v in g)
    wanted = set(layers)
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    by_layer: dict[int, list[Vertex]] = {}
    for v in verts:
        by_layer.setdefault(v.time, []).append(v)
    out: dict[int, list[frozenset[int]]] = {}
    inside = set(verts)
    lo = g.window[0]
    hi = max(wanted | {lo})
    for t in range(lo, hi + 1):
        for v in by_layer.get(t, ()):
            for s in g.siblings(v):
                if s in inside and s.time <= t:
                    a, b = find(v), find(s)
                    if a != b:
                        parent[a] = b
        if t in wanted:
            groups: dict[Vertex, set[int]] = {}
            for v in by_layer.get(t, ()):
                groups.setdefault(find(v), set()).add(v.row)
            out[t] = sorted((frozenset(rows) for rows in groups.values()), key=min)
    return out


def _alpha(width: int, blocks: list[frozenset[int]]) -> tuple[frozenset[int], ...]:
    present = frozenset().union(*blocks) if blocks else frozenset()
    absent = frozenset(range(width)) - present
    padded = [absent, *blocks] + [frozenset()] * (width - len(blocks))
    return tuple(padded)


def layer_signatures(g: SegmentGraph, h: Hedge, x: Iterable[Vertex], y: Iterable[Vertex],
                     layers: Iterable[int] | None = None, check: bool = True,
                     variant: Variant = "strict") -> dict[int, LayerSignature]:
    x, y = vset(x), vset(y)
    if check:
        problems = validate_hedge(g, x, y, h, variant)
        if problems:
            raise QueryError("not a hedge: " + "; ".join(problems))
    lo, hi = g.window
    layers = list(range(lo, hi + 1)) if layers is None else list(layers)
    for t in layers:
        if not lo <= t <= hi:
            raise QueryError(f"layer {t} outside window {g.window}")
    fb = left_connected_blocks(g, h.f_vertices, layers)
    fpb = left_connected_blocks(g, h.fprime_vertices, layers)
    anc = g._vertices(reach_up(g._pa, range(len(g)), g._indices(y), blocked=g._indices(x)))
    beta: dict[int, set[int]] = {}
    for v in anc:
        beta.setdefault(v.time, set()).add(v.row)
    return {
        t: LayerSignature(
            _alpha(g.width, fb[t]), _alpha(g.width, fpb[t]), frozenset(beta.get(t, ())),
        )
        for t in layers
    }


def layer_signature(g: SegmentGraph, h: Hedge, x: Iterable[Vertex], y: Iterable[Vertex],
                    t: int, variant: Variant = "strict") -> LayerSignature:
    return layer_signatures(g, h, x, y, [t], variant=variant)[t]


# -- cutting ------------------------------------------------------------------------


@dataclass(frozen=True)
class CutPlan:
    """Delete layers ``b + 1 .. b + delta`` and glue layer b to b + delta + 1."""

    b: int
    delta: int

    def __post_init__(self):
        if self.delta < 1:
            raise PreconditionError(f"cut length must be positive, got {self.delta}")

    def covers(self, t: int) -> bool:
        return self.b < t <= self.b + self.delta

    def apply(self, v: Vertex) -> Vertex:
        if v.time <= self.b:
            return v
        if v.time > self.b + self.delta:
            return Vertex(v.row, v.time - self.delta)
        raise PreconditionError(f"{v} lies inside the removed layers")


def _hull(*sets: Iterable[Vertex]) -> tuple[int, int]:
    times = [v.time for s in sets for v in s]
    return (min(times), max(times))


def phi_cut(spec: PeriodicSpec, h: Hedge, x: Iterable[Vertex], y: Iterable[Vertex],
            plan: CutPlan, window: tuple[int, int] | None = None,
            variant: Variant = "strict") -> tuple[Hedge, frozenset[Vertex], frozenset[Vertex]]:
    """Cut ``plan``'s layers out of a hedge on a latency-1 periodic graph.

    The signatures at ``b`` and ``b + delta`` must agree and no vertex of X
    or Y may lie in the removed layers.  Child maps are chosen afresh on
    the glued vertex sets.  Returns the new hedge and the images of x, y; the
    new hedge lives in ``window`` shortened by ``delta`` layers.
    """
    if spec.latency != 1:
        raise PreconditionError("cutting needs a latency-1 graph; use reduce_latency first")
    x, y = vset(x), vset(y)
    window = window or _hull(h.f_vertices, x, y)
    b, delta = plan.b, plan.delta
    if not (window[0] <= b and b + delta <= window[1]):
        raise PreconditionError(f"cut {plan} does not fit window {window}")
    hit = [v for v in x | y if plan.covers(v.time)]
    if hit:
        raise PreconditionError(f"removed layers contain query vertices {canonical(hit)}")
    g = unroll(spec, window)
    sigs = layer_signatures(g, h, x, y, [b, b + delta], variant=variant)
    if sigs[b] != sigs[b + delta]:
        raise PreconditionError(f"signatures at layers {b} and {b + delta} differ")

    keep_f = [v for v in h.f_vertices if not plan.covers(v.time)]
    keep_fp = [v for v in h.fprime_vertices if not plan.covers(v.time)]
    g2 = unroll(spec, (window[0], window[1] - delta))
    nx, ny = frozenset(map(plan.apply, x)), frozenset(map(plan.apply, y))
    f = g2._indices(map(plan.apply, keep_f))
    fp = g2._indices(map(plan.apply, keep_fp))
    anc = reach_up(g2._pa, range(len(g2)), g2._indices(ny), blocked=g2._indices(nx))
    roots = _roots_if_hedge(g2._ch, g2._sib, f, fp, anc)
    if roots is not None:
        return _build_hedge(g2, f, fp, roots), nx, ny
    # Not expected to happen; hand back the transported structure so that
    # validate_hedge can say what broke.
    survivors = set(keep_f)

    def move(child):
        return {plan.apply(a): plan.apply(c) for a, c in child.items()
                if a in survivors and c in survivors}

    moved = Hedge(
        frozenset(map(plan.apply, keep_f)), move(h.f_child),
        frozenset(map(plan.apply, keep_fp)), move(h.fprime_child),
        frozenset(plan.apply(r) for r in h.roots if r in survivors),
    )
    return moved, nx, ny


@dataclass(frozen=True)
class Compression:
    """Result of ``compress_hedge``.

    ``hedge`` is a hedge for (``x``, ``y``); in the ``between`` region ``y``
    is the query's Y moved ``removed`` layers closer to X, in the ``past``
    region x and y are unchanged.
    """

    hedge: Hedge
    x: frozenset[Vertex]
    y: frozenset[Vertex]
    removed: int
    cuts: int


def _find_cut(sigs: dict[int, LayerSignature], lo_b: int, hi_top: int,
              blocked: set[int]) -> CutPlan | None:
    """First b with a partner layer, using the farthest partner for that b."""
    for b in range(lo_b, hi_top):
        best = None
        for top in range(b + 1, hi_top + 1):
            if top in blocked:
                break
            if sigs[top] == sigs[b]:
                best = top
        if best is not None:
            return CutPlan(b, best - b)
    return None


def compress_hedge(spec: PeriodicSpec, h: Hedge, x: Iterable[Vertex], y: Iterable[Vertex],
                   region: Region = "past", window: tuple[int, int] | None = None,
                   variant: Variant = "strict") -> Compression:
    """Shrink a hedge by repeated signature-equal cuts.

    ``past`` cuts between the start of the hedge and the first layer of X
    and shifts the lower part back up, so the query is unchanged.
    ``between`` cuts between the last layer of X and the first layer of Y
    and so moves Y towards X.  Higher-latency graphs are handled in
    aggregated coordinates.
    """
    try:
        region = _REGION_ALIASES[region.lower()]
    except KeyError:
        raise QueryError(f"unknown compression region {region!r}") from None
    x, y = vset(x), vset(y)
    window = window or _hull(h.f_vertices, x, y)
    g0 = unroll(spec, window)
    problems = validate_hedge(g0, x, y, h, variant)
    if problems:
        raise QueryError("not a hedge: " + "; ".join(problems))
    if region == "between" and max(v.time for v in x) > min(v.time for v in y):
        raise PreconditionError("between-region compression needs tmax(X) <= tmin(Y)")

    red = reduce_latency(spec)
    lat1 = red.reduced
    cur = h.map(red.forward)
    ax, ay = red.forward_set(x), red.forward_set(y)
    win = red.forward_window(window)
    removed = cuts = 0
    while True:
        g = unroll(lat1, win)
        sigs = layer_signatures(g, cur, ax, ay, check=False)
        blocked = {v.time for v in ax | ay}
        if region == "past":
            lo_b = min(v.time for v in cur.f_vertices)
            hi_top = min(v.time for v in ax) - 1
        else:
            lo_b = max(v.time for v in ax)
            hi_top = min(v.time for v in ay) - 1
        plan = _find_cut(sigs, lo_b, hi_top, blocked) if hi_top > lo_b else None
        if plan is None:
            break
        cur, nx, ny = phi_cut(lat1, cur, ax, ay, plan, window=win, variant=variant)
        cuts += 1
        removed += plan.delta
        if region == "past":
            cur = cur.shifted(plan.delta)
        else:
            ay = ny
            win = (win[0], win[1] - plan.delta)

    out = cur.map(red.backward)
    oy = red.backward_set(ay)
    return Compression(out, x, oy, removed * red.factor, cuts)


# -- bounded decisions --------------------------------------------------------------


def _check_sets(x, y):
    x, y = vset(x), vset(y)
    if not y:
        raise QueryError("outcome set Y must be non-empty")
    if x & y:
        raise QueryError(f"X and Y overlap in {canonical(x & y)}")
    return x, y


def decide_bounded(spec: PeriodicSpec, x: Iterable[Vertex], y: Iterable[Vertex],
                   lookback: Lookback = "auto", budget: int | None = None) -> IdResult:
    """Decide P(y | do x) on the window from ``tmin(x) - c`` to ``tmax(y)``.

    ``c`` is the lookback constant for ``"auto"``, ``tmin(x)`` for
    ``"full"`` (the whole past), or the given number of layers.  The window
    never starts below layer 0.  Answers are marked proved unless a hand
    chosen ``c`` stops short of both the constant and layer 0.
    """
    x, y = _check_sets(x, y)
    budget = max_window_layers() if budget is None else budget
    C = lookback_constant(spec)
    end = max(v.time for v in y)
    live_x = frozenset(v for v in x if v.time <= end)
    if not live_x:
        # nothing in X can precede Y in time
        return IdResult(True, window=None, constant=C, proved=True)
    t0 = min(v.time for v in x)
    if lookback == "auto":
        c = C
    elif lookback == "full":
        c = t0
    else:
        c = int(lookback)
        if c < 0:
            raise QueryError(f"lookback must be non-negative, got {c}")
    start = max(t0 - c, 0)
    proved = lookback in ("auto", "full") or c >= t0 or c >= C
    layers = end - start + 1
    if layers > budget:
        raise RefusalError(
            f"window [{start}, {end}] has {layers} layers, above the budget of {budget}; "
            f"the lookback constant is {C}; pass an explicit number of layers instead",
            constant=C,
        )
    g = unroll(spec, (start, end))
    res = id_decide(g, live_x, y)
    w = res.witness
    if w is not None and live_x != x and w.subquery_x is None:
        w = w.map(lambda v: v, subquery_x=x & w.f_vertices)
    return IdResult(res.identifiable, w, (start, end), C, proved)


@dataclass(frozen=True)
class AllShiftsResult:
    all_identifiable: bool
    delta: int | None
    witness: Hedge | None
    window: tuple[int, int] | None
    horizon: int
    constant: int
    proved: bool

    @property
    def label(self) -> str:
        return "proved" if self.proved else "heuristic"


def decide_all_shifts(spec: PeriodicSpec, x: Iterable[Vertex], y: Iterable[Vertex],
                      c_override: int | None = None, jobs: int = 1,
                      budget: int | None = None) -> AllShiftsResult:
    """Decide P(y shifted by d | do x) for all d >= 0 at once.

    Needs ``tmax(x) == tmin(y)``.  Shifts ``0 .. c - 1`` are checked with
    lookback ``c``; with the default ``c`` (the lookback constant) this
    covers every shift.  ``jobs > 1`` checks shifts on a thread pool; the
    smallest failing shift is reported regardless of completion order.
    """
    x, y = _check_sets(x, y)
    if not x:
        raise QueryError("intervention set X must be non-empty")
    if max(v.time for v in x) != min(v.time for v in y):
        raise QueryError("all-shifts queries need tmax(X) == tmin(Y)")
    C = lookback_constant(spec)
    c = C if c_override is None else int(c_override)
    if c < 1:
        raise QueryError(f"shift horizon must be at least 1, got {c}")
    proved = c >= C

    def check(delta: int) -> IdResult:
        return decide_bounded(spec, x, shift_set(y, delta), lookback=c, budget=budget)

    jobs = max(1, int(jobs))
    if jobs == 1:
        for delta in range(c):
            r = check(delta)
            if not r.identifiable:
                return AllShiftsResult(False, delta, r.witness, r.window, c, C, proved)
        return AllShiftsResult(True, None, None, None, c, C, proved)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for start in range(0, c, jobs):
            batch = range(start, min(start + jobs, c))
            results = list(pool.map(check, batch))
            for delta, r in zip(batch, results):
                if not r.identifiable:
                    return AllShiftsResult(False, delta, r.witness, r.window, c, C, proved)
    return AllShiftsResult(True, None, None, None, c, C, proved)


def minimal_lookback(spec: PeriodicSpec, x: Iterable[Vertex], y: Iterable[Vertex],
                     probe_limit: int, budget: int | None = None) -> int | str:
    """Smallest lookback from which the decision no longer changes.

    Decisions are probed for lookbacks ``0 .. probe_limit``.  Once the
    lookback reaches ``tmin(x)`` the window is the whole past and the answer
    is final.  If the whole past is out of reach and the last value was only
    seen at ``probe_limit`` itself, ``NOT_STABILIZED`` is returned.
    """
    x, y = _check_sets(x, y)
    if probe_limit < 0:
        raise QueryError("probe limit must be non-negative")
    if not x:
        return 0
    t0 = min(v.time for v in x)
    top = min(probe_limit, t0)
    decisions = [
        decide_bounded(spec, x, y, lookback=c, budget=budget).identifiable
        for c in range(top + 1)
    ]
    final = decisions[-1]
    m = top
    while m > 0 and decisions[m - 1] == final:
        m -= 1
    if t0 > probe_limit and m == top:
        return NOT_STABILIZED
    return m
