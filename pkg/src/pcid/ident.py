"""Boolean causal identification with hedge witnesses.

``id_decide`` runs the recursive ID procedure (restrict to ancestors of Y,
absorb vertices that only reach Y through X, decompose over the
C-components of G minus X, then the single-component cases).  Tail calls
are turned into loops, so segments with thousands of layers do not hit the
recursion limit.

``enumerate_hedges`` is an exhaustive search over vertex subsets and is
meant as an independent oracle for graphs with a dozen vertices or so.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Literal

from .admg import (
    SegmentGraph, Vertex, canonical, components_bi, reach_bi, reach_up, vkey, vset,
)
from .errors import DomainError, QueryError, RefusalError

Variant = Literal["strict", "classical"]


@dataclass(frozen=True, eq=False)
class Hedge:
    """A pair of C-forests ``F' ⊆ F`` sharing the root set ``roots``.

    ``f_child`` / ``fprime_child`` map every non-root vertex to its unique
    child.  ``subquery_x`` is set when the hedge only witnesses the effect
    of a subset of the queried intervention set.
    """

    f_vertices: frozenset[Vertex]
    f_child: Mapping[Vertex, Vertex]
    fprime_vertices: frozenset[Vertex]
    fprime_child: Mapping[Vertex, Vertex]
    roots: frozenset[Vertex]
    subquery_x: frozenset[Vertex] | None = field(default=None)

    @property
    def triple(self) -> tuple[frozenset[Vertex], frozenset[Vertex], frozenset[Vertex]]:
        return (self.f_vertices, self.fprime_vertices, self.roots)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hedge):
            return NotImplemented
        return (
            self.triple == other.triple
            and dict(self.f_child) == dict(other.f_child)
            and dict(self.fprime_child) == dict(other.fprime_child)
            and self.subquery_x == other.subquery_x
        )

    __hash__ = None

    @property
    def vertices(self) -> frozenset[Vertex]:
        return self.f_vertices

    @property
    def span(self) -> int:
        times = [v.time for v in self.f_vertices]
        return max(times) - min(times)

    def map(self, fn, subquery_x: frozenset[Vertex] | None = None) -> Hedge:
        """Apply a vertex map to every component."""
        sub = self.subquery_x if subquery_x is None else subquery_x
        return Hedge(
            frozenset(fn(v) for v in self.f_vertices),
            {fn(a): fn(b) for a, b in self.f_child.items()},
            frozenset(fn(v) for v in self.fprime_vertices),
            {fn(a): fn(b) for a, b in self.fprime_child.items()},
            frozenset(fn(v) for v in self.roots),
            None if sub is None else frozenset(fn(v) for v in sub),
        )

    def shifted(self, delta: int) -> Hedge:
        return self.map(lambda v: Vertex(v.row, v.time + delta))

    def __repr__(self) -> str:
        def fmt(s):
            return "{" + ", ".join(map(str, canonical(s))) + "}"
        return f"Hedge(F={fmt(self.f_vertices)}, F'={fmt(self.fprime_vertices)}, R={fmt(self.roots)})"


@dataclass
class IdResult:
    """Outcome of an identification query.

    The bounded procedures fill in ``window`` (the unrolled layers),
    ``constant`` (the lookback constant of the periodic graph) and ``proved``
    (False when the window was chosen by hand and may be too short).
    """

    identifiable: bool
    witness: Hedge | None = None
    window: tuple[int, int] | None = None
    constant: int | None = None
    proved: bool | None = None

    @property
    def decision(self) -> str:
        return "Identifiable" if self.identifiable else "Unidentifiable"

    @property
    def label(self) -> str | None:
        if self.proved is None:
            return None
        return "proved" if self.proved else "heuristic"


def _check_query(g: SegmentGraph, x: Iterable[Vertex], y: Iterable[Vertex]):
    x, y = vset(x), vset(y)
    if not y:
        raise QueryError("outcome set Y must be non-empty")
    if x & y:
        raise QueryError(f"X and Y overlap in {canonical(x & y)}")
    for v in x | y:
        if v not in g:
            raise DomainError(f"query vertex {v} is not in the graph")
    return x, y


# -- closed-form hedge admissibility on int sets ----------------------------


def _connected(sib, s: set[int]) -> bool:
    if not s:
        return False
    return len(reach_bi(sib, s, (next(iter(s)),))) == len(s)


def _sinks(ch, s: set[int]) -> set[int]:
    return {v for v in s if not any(c in s for c in ch[v])}


def _roots_if_hedge(ch, sib, f: set[int], fp: set[int], anc_mut: set[int]) -> set[int] | None:
    """Smallest admissible root set for the vertex sets ``(f, fp)``, or None.

    Any root set must contain the childless vertices of both sets; any
    superset inside ``fp ∩ anc_mut`` works as well, so the forced part is
    admissible exactly when some root set is.
    """
    if not fp or not fp <= f or not _connected(sib, f) or not _connected(sib, fp):
        return None
    roots = _sinks(ch, f) | _sinks(ch, fp)
    if not roots <= fp or not roots <= anc_mut:
        return None
    return roots


def _build_hedge(g: SegmentGraph, f: set[int], fp: set[int], roots: set[int]) -> Hedge:
    ch, order = g._ch, g._order

    def child_map(src, within):
        out = {}
        for v in src:
            if v in roots:
                continue
            c = next(c for c in ch[v] if c in within)
            out[order[v]] = order[c]
        return out

    # F' children are reused inside F so the two forests agree on F'.
    cp = child_map(fp, fp)
    cf = child_map(f - fp, f)
    cf.update(cp)
    return Hedge(g._vertices(f), cf, g._vertices(fp), cp, g._vertices(roots))


def _minimize(g: SegmentGraph, f: set[int], fp: set[int], x: set[int], anc_mut: set[int]):
    """Greedy single-vertex shrinking that keeps (f, fp) a hedge.

    Vertices of X are never removed, so X ∩ V(F) is preserved.
    """
    ch, sib = g._ch, g._sib
    f, fp = set(f), set(fp)
    changed = True
    while changed:
        changed = False
        for v in sorted(f):
            if v in x or v not in f:
                continue
            trials = [(f - {v}, fp - {v})]
            if v in fp:
                trials.append((f, fp - {v}))
            for nf, nfp in trials:
                if _roots_if_hedge(ch, sib, nf, nfp, anc_mut) is not None:
                    f, fp = nf, nfp
                    changed = True
                    break
    return f, fp, _roots_if_hedge(ch, sib, f, fp, anc_mut)


_LOCAL_LIMIT = 64


def _localize(g: SegmentGraph, f: set[int], fp: set[int], x: set[int], y: set[int]):
    """Look for a smaller hedge on windows reaching 0, 1, 2, 4, ... layers below X.

    A hedge of an induced subgraph is a hedge of ``g`` as well, so this only
    changes which witness is reported.  Greedy shrinking is quadratic, and a
    hedge spanning thousands of layers is common when nothing cuts the past
    off, so large hedges are first replaced by one found close to X.
    """
    if len(f) <= _LOCAL_LIMIT or not x:
        return f, fp
    order = g._order
    lo_x = min(order[i].time for i in x)
    hi_y = max(order[i].time for i in y)
    k = 0
    while lo_x - k > g.window[0]:
        lo = lo_x - k
        v = {i for i, u in enumerate(order) if lo <= u.time <= hi_y}
        found = _id(g, v, x & v, y)
        if found is not None and len(found[0]) < len(f):
            return found
        k = 1 if k == 0 else 2 * k
    return f, fp


# -- the ID recursion ---------------------------------------------------------


def _component_call(pa, sib, comp_of: dict[int, int], comps: list[set[int]], s: set[int]):
    """Decide ID(G[V], V \\ S, S) for a C-component S of G[V] minus X.

    Returns the hedge vertex set H (with F' = S) or None when identifiable.
    The search starts from the C-component of G[V] containing S instead of
    from all of V; both starting points converge to the same set because
    the two restrictions are monotone and only shrink the graph.
    """
    h = comps[comp_of[next(iter(s))]]
    if len(h) == len(s):
        return None
    while True:
        a = reach_up(pa, h, s)
        if len(a) == len(s):
            return None
        c = reach_bi(sib, a, s)
        if len(c) == len(a):
            return a
        if len(c) == len(s):
            return None
        h = c


def _id(g: SegmentGraph, v: set[int], x: set[int], y: set[int]):
    """Returns None (identifiable) or the pair (F, F') of int vertex sets."""
    pa, sib = g._pa, g._sib
    while True:
        if not x:
            return None
        anc = reach_up(pa, v, y)
        if len(anc) != len(v):
            v, x = anc, x & anc
            continue
        anc_m = reach_up(pa, v, y, blocked=x)
        w = v - x - anc_m
        if w:
            x = x | w
            continue
        rest = v - x
        parts = components_bi(sib, rest)
        if len(parts) > 1:
            comps = components_bi(sib, v)
            comp_of = {u: k for k, c in enumerate(comps) for u in c}
            for s in parts:
                h = _component_call(pa, sib, comp_of, comps, s)
                if h is not None:
                    return h, s
            return None
        s = parts[0]
        t = reach_bi(sib, v, s)
        if len(t) == len(v):
            return v, s
        if len(t) == len(s):
            return None
        v, x = t, x & t


def id_decide(g: SegmentGraph, x: Iterable[Vertex], y: Iterable[Vertex],
              minimize: bool = True) -> IdResult:
    """Decide whether P(y | do x) is identifiable in ``g``.

    An unidentifiable answer carries a hedge.  With ``minimize`` the hedge
    is shrunk until no single vertex can be dropped.  If the hedge does not
    contain every vertex of ``x`` its ``subquery_x`` records the part it
    does contain; it is then a hedge for that sub-query.
    """
    x, y = _check_query(g, x, y)
    xi, yi = g._indices(x), g._indices(y)
    found = _id(g, set(range(len(g))), set(xi), set(yi))
    if found is None:
        return IdResult(True)
    f, fp = found
    anc_mut = reach_up(g._pa, range(len(g)), yi, blocked=xi)
    if minimize:
        f, fp = _localize(g, f, fp, xi, yi)
        f, fp, roots = _minimize(g, f, fp, xi, anc_mut)
    else:
        roots = _roots_if_hedge(g._ch, g._sib, f, fp, anc_mut)
    assert roots is not None, "ID produced a vertex pair that is not a hedge"
    hedge = _build_hedge(g, f, fp, roots)
    inside = x & hedge.f_vertices
    if inside != x:
        hedge = hedge.map(lambda u: u, subquery_x=inside)
    return IdResult(False, hedge)


# -- validation -----------------------------------------------------------------


def _forest_violations(g: SegmentGraph, name: str, verts: frozenset[Vertex],
                       child: Mapping[Vertex, Vertex], roots: frozenset[Vertex]) -> list[str]:
    out = []
    if not verts:
        return [f"{name} is empty"]
    idx = g._indices(verts)
    if not _connected(g._sib, idx):
        out.append(f"{name} is not connected by bidirected edges inside its own vertices")
    for a, b in child.items():
        if a not in verts or b not in verts:
            out.append(f"{name} child map entry {a}->{b} leaves the vertex set")
        elif not g.has_directed(a, b):
            out.append(f"{name} child map entry {a}->{b} is not a directed edge of the graph")
    childless = verts - frozenset(child)
    if childless != roots:
        out.append(
            f"{name} childless vertices {canonical(childless)} differ from the root set {canonical(roots)}"
        )
    return out


def validate_hedge(g: SegmentGraph, x: Iterable[Vertex], y: Iterable[Vertex], h: Hedge,
                   variant: Variant = "strict") -> list[str]:
    """List every way in which ``h`` fails to be a hedge for (x, y) in ``g``.

    ``variant="strict"`` requires all of X inside F minus F'; ``"classical"``
    only requires F to meet X while F' avoids it.
    """
    x, y = vset(x), vset(y)
    out: list[str] = []
    outside = [v for v in h.f_vertices | h.fprime_vertices | h.roots | y if v not in g]
    if outside:
        return [f"vertices outside the graph: {canonical(outside)}"]

    if not h.fprime_vertices <= h.f_vertices:
        out.append("F' is not contained in F")

    if variant == "strict":
        missing = x - (h.f_vertices - h.fprime_vertices)
        if missing:
            out.append(f"X vertices {canonical(missing)} are not in V(F) minus V(F')")
    else:
        if not x & h.f_vertices:
            out.append("F does not meet X")
        if x & h.fprime_vertices:
            out.append(f"F' contains X vertices {canonical(x & h.fprime_vertices)}")

    out += _forest_violations(g, "F", h.f_vertices, h.f_child, h.roots)
    out += _forest_violations(g, "F'", h.fprime_vertices, h.fprime_child, h.roots)
    if not h.roots <= h.fprime_vertices:
        out.append("root set is not contained in F'")

    xi = g._indices(v for v in x if v in g)
    anc = g._vertices(reach_up(g._pa, range(len(g)), g._indices(y), blocked=xi))
    stray = h.roots - anc
    if stray:
        out.append(f"roots {canonical(stray)} are not ancestors of Y once edges into X are cut")
    return out


# -- brute-force oracle ---------------------------------------------------------------


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def enumerate_hedges(g: SegmentGraph, x: Iterable[Vertex], y: Iterable[Vertex],
                     max_vertices: int = 14, variant: Variant = "strict",
                     minimal: bool = True, limit: int | None = None) -> list[Hedge]:
    """Exhaustively list hedges for (x, y) in a small graph.

    With ``minimal`` only hedges whose (V(F), V(F'), R) triple contains no
    other hedge triple componentwise are returned, each with its forced root
    set.  Otherwise every admissible root set of every vertex-set pair is
    reported.  ``limit`` stops the search after that many raw hedges.
    An empty list proves that no hedge exists.
    """
    x, y = _check_query(g, x, y)
    if len(g) > max_vertices:
        raise RefusalError(f"oracle refuses graphs with more than {max_vertices} vertices ({len(g)} given)")
    n = len(g)
    ch_m = [sum(1 << c for c in g._ch[v]) for v in range(n)]
    sib_m = [sum(1 << s for s in g._sib[v]) for v in range(n)]
    xi, yi = g._indices(x), g._indices(y)
    xm = sum(1 << v for v in xi)
    cand = sum(1 << v for v in reach_up(g._pa, range(n), yi))
    anc_m = sum(1 << v for v in reach_up(g._pa, range(n), yi, blocked=xi))
    if variant == "strict" and xm & ~cand:
        return []

    conn_cache: dict[int, bool] = {}

    def connected(mask: int) -> bool:
        hit = conn_cache.get(mask)
        if hit is None:
            start = mask & -mask
            seen, frontier = start, start
            while frontier:
                nxt = 0
                for v in _bits(frontier):
                    nxt |= sib_m[v]
                nxt &= mask & ~seen
                seen |= nxt
                frontier = nxt
            hit = conn_cache[mask] = seen == mask
        return hit

    def sinks(mask: int) -> int:
        return sum(1 << v for v in _bits(mask) if not ch_m[v] & mask)

    raw: list[tuple[int, int, int]] = []
    fp_space = cand & ~xm
    sub = fp_space
    while sub:
        fp = sub
        sub = (sub - 1) & fp_space
        if not connected(fp):
            continue
        s_fp = sinks(fp)
        if s_fp & ~anc_m:
            continue
        free = cand & ~fp
        ext = free
        while ext:
            f = fp | ext
            ext = (ext - 1) & free
            if variant == "strict":
                if xm & ~f:
                    continue
            elif not f & xm:
                continue
            if not connected(f):
                continue
            r_min = sinks(f) | s_fp
            if r_min & ~(fp & anc_m):
                continue
            if minimal:
                raw.append((f, fp, r_min))
            else:
                optional = fp & anc_m & ~r_min
                extra = optional
                while True:
                    raw.append((f, fp, r_min | extra))
                    if not extra:
                        break
                    extra = (extra - 1) & optional
            if limit is not None and len(raw) >= limit:
                break
        if limit is not None and len(raw) >= limit:
            break

    if minimal:
        raw.sort(key=lambda t: (bin(t[0]).count("1") + bin(t[1]).count("1") + bin(t[2]).count("1"), t))
        kept: list[tuple[int, int, int]] = []
        for t in raw:
            if not any(k[0] & ~t[0] == 0 and k[1] & ~t[1] == 0 and k[2] & ~t[2] == 0 for k in kept):
                kept.append(t)
        raw = kept

    hedges = [_build_hedge(g, set(_bits(f)), set(_bits(fp)), set(_bits(r))) for f, fp, r in raw]
    hedges.sort(key=lambda h: (
        [vkey(v) for v in canonical(h.f_vertices)],
        [vkey(v) for v in canonical(h.fprime_vertices)],
        [vkey(v) for v in canonical(h.roots)],
    ))
    return hedges
