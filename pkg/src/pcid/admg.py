"""Finite acyclic directed mixed graphs over (row, time) vertices.

A :class:`SegmentGraph` is the finite object every algorithm in the package
runs on.  Vertices are :class:`Vertex` tuples; sets of vertices are plain
``frozenset`` values, with :func:`tmin` / :func:`tmax` supplying the layer
bookkeeping.  All outputs that are sequences use the canonical
``(time, row)`` order.
"""

from __future__ import annotations

from collections.abc import Iterable
from typing import NamedTuple

from .errors import DomainError, ValidationError


class Vertex(NamedTuple):
    row: int
    time: int

    def __str__(self) -> str:
        return f"X[{self.row},{self.time}]"


VertexSet = frozenset  # frozenset[Vertex]
Edge = tuple[Vertex, Vertex]


def vkey(v: Vertex) -> tuple[int, int]:
    """Canonical sort key: layer first, then row."""
    return (v.time, v.row)


def canonical(vertices: Iterable[Vertex]) -> list[Vertex]:
    return sorted(vertices, key=vkey)


def vset(vertices: Iterable[Vertex | tuple[int, int]]) -> frozenset[Vertex]:
    return frozenset(Vertex(*v) for v in vertices)


def tmin(s: Iterable[Vertex]) -> int:
    times = [v.time for v in s]
    if not times:
        raise DomainError("tmin of an empty vertex set")
    return min(times)


def tmax(s: Iterable[Vertex]) -> int:
    times = [v.time for v in s]
    if not times:
        raise DomainError("tmax of an empty vertex set")
    return max(times)


def _bikey(u: Vertex, v: Vertex) -> Edge:
    return (u, v) if vkey(u) <= vkey(v) else (v, u)


class SegmentGraph:
    """Immutable ADMG on a subset of the vertices of a time window.

    ``vertices`` defaults to the full rectangle ``width x [T, T']``.
    Bidirected edges are unordered and stored with the canonically smaller
    endpoint first.  Per-vertex adjacency is indexed by integer position in
    the canonical vertex order so that the identification code can work on
    plain ints.
    """

    __slots__ = (
        "width", "window", "vertices", "directed_edges", "bidirected_edges",
        "_order", "_pos", "_pa", "_ch", "_sib",
    )

    def __init__(
        self,
        width: int,
        window: tuple[int, int],
        directed: Iterable[Edge] = (),
        bidirected: Iterable[Edge] = (),
        vertices: Iterable[Vertex] | None = None,
    ):
        if width < 1:
            raise DomainError(f"width must be positive, got {width}")
        lo, hi = window
        if lo < 0 or lo > hi:
            raise DomainError(f"invalid window [{lo}, {hi}]")
        self.width = width
        self.window = (lo, hi)
        if vertices is None:
            order = [Vertex(i, t) for t in range(lo, hi + 1) for i in range(width)]
        else:
            order = canonical(set(Vertex(*v) for v in vertices))
            for v in order:
                if not (0 <= v.row < width and lo <= v.time <= hi):
                    raise DomainError(f"vertex {v} outside width {width} / window {self.window}")
        self._order = order
        self._pos = {v: k for k, v in enumerate(order)}
        self.vertices = frozenset(order)

        pos = self._pos
        n = len(order)
        pa: list[list[int]] = [[] for _ in range(n)]
        ch: list[list[int]] = [[] for _ in range(n)]
        sib: list[list[int]] = [[] for _ in range(n)]
        dset = set()
        for u, v in directed:
            u, v = Vertex(*u), Vertex(*v)
            if u not in pos or v not in pos:
                raise DomainError(f"directed edge {u}->{v} has an endpoint outside the graph")
            if u == v:
                raise ValidationError(f"directed self-loop at {u}")
            if u.time > v.time:
                raise ValidationError(f"directed edge {u}->{v} goes backward in time")
            if (u, v) in dset:
                continue
            dset.add((u, v))
            pa[pos[v]].append(pos[u])
            ch[pos[u]].append(pos[v])
        bset = set()
        for u, v in bidirected:
            u, v = Vertex(*u), Vertex(*v)
            if u not in pos or v not in pos:
                raise DomainError(f"bidirected edge {u}<->{v} has an endpoint outside the graph")
            if u == v:
                raise ValidationError(f"bidirected self-loop at {u}")
            e = _bikey(u, v)
            if e in bset:
                continue
            bset.add(e)
            sib[pos[u]].append(pos[v])
            sib[pos[v]].append(pos[u])
        for lst in (*pa, *ch, *sib):
            lst.sort()
        self._pa = pa
        self._ch = ch
        self._sib = sib
        self.directed_edges = frozenset(dset)
        self.bidirected_edges = frozenset(bset)
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        # Edges never go backward, so cycles can only live inside one layer.
        if _kahn(self._pa, self._ch, range(len(self._order))) is None:
            raise ValidationError("directed part contains a cycle within a layer")

    # -- accessors -----------------------------------------------------

    def __len__(self) -> int:
        return len(self._order)

    def __contains__(self, v: object) -> bool:
        return v in self._pos

    def __iter__(self):
        return iter(self._order)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentGraph):
            return NotImplemented
        return (
            self.width == other.width
            and self.window == other.window
            and self.vertices == other.vertices
            and self.directed_edges == other.directed_edges
            and self.bidirected_edges == other.bidirected_edges
        )

    def __hash__(self) -> int:
        return hash((self.width, self.window, self.vertices, self.directed_edges))

    def __repr__(self) -> str:
        return (
            f"SegmentGraph(width={self.width}, window={self.window}, "
            f"|V|={len(self)}, |D|={len(self.directed_edges)}, |B|={len(self.bidirected_edges)})"
        )

    @property
    def ordered_vertices(self) -> list[Vertex]:
        return list(self._order)

    def parents(self, v: Vertex) -> tuple[Vertex, ...]:
        return tuple(self._order[k] for k in self._pa[self._index(v)])

    def children(self, v: Vertex) -> tuple[Vertex, ...]:
        return tuple(self._order[k] for k in self._ch[self._index(v)])

    def siblings(self, v: Vertex) -> tuple[Vertex, ...]:
        return tuple(self._order[k] for k in self._sib[self._index(v)])

    def has_directed(self, u: Vertex, v: Vertex) -> bool:
        return (u, v) in self.directed_edges

    def has_bidirected(self, u: Vertex, v: Vertex) -> bool:
        return _bikey(u, v) in self.bidirected_edges

    def _index(self, v: Vertex) -> int:
        try:
            return self._pos[v]
        except KeyError:
            raise DomainError(f"vertex {v} is not in the graph") from None

    def _indices(self, vs: Iterable[Vertex]) -> set[int]:
        return {self._index(Vertex(*v)) for v in vs}

    def _vertices(self, idx: Iterable[int]) -> frozenset[Vertex]:
        order = self._order
        return frozenset(order[k] for k in idx)


def _kahn(pa, ch, nodes: Iterable[int]) -> list[int] | None:
    """Topological order of ``nodes`` with smallest-index-first tie breaking."""
    import heapq

    nodes = list(nodes)
    inside = set(nodes)
    indeg = {k: sum(1 for p in pa[k] if p in inside) for k in nodes}
    heap = [k for k in nodes if indeg[k] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        k = heapq.heappop(heap)
        out.append(k)
        for c in ch[k]:
            if c in inside:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
    return out if len(out) == len(nodes) else None


# -- int-level primitives used by the identification code -----------------


def reach_up(pa, within: set[int] | frozenset[int], targets: Iterable[int],
             blocked: set[int] | frozenset[int] = frozenset()) -> set[int]:
    """Ancestors of ``targets`` inside ``within``.

    Parents of vertices in ``blocked`` are not expanded, which is exactly
    ancestry in the graph with incoming edges of ``blocked`` removed.
    """
    seen = set(targets)
    stack = [v for v in seen if v not in blocked]
    while stack:
        v = stack.pop()
        for p in pa[v]:
            if p in within and p not in seen:
                seen.add(p)
                if p not in blocked:
                    stack.append(p)
    return seen


def reach_bi(sib, within: set[int] | frozenset[int], seeds: Iterable[int]) -> set[int]:
    """Bidirected-connected closure of ``seeds`` inside ``within``."""
    seen = set(seeds)
    stack = list(seen)
    while stack:
        v = stack.pop()
        for s in sib[v]:
            if s in within and s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def components_bi(sib, within: Iterable[int]) -> list[set[int]]:
    """C-components of the subgraph induced by ``within``, smallest index first."""
    within = set(within)
    left = set(within)
    comps = []
    for v in sorted(within):
        if v in left:
            comp = reach_bi(sib, within, (v,))
            left -= comp
            comps.append(comp)
    return comps


# -- public operations ------------------------------------------------------


def induced_subgraph(g: SegmentGraph, keep: Iterable[Vertex]) -> SegmentGraph:
    keep = vset(keep)
    for v in keep:
        g._index(v)
    return SegmentGraph(
        g.width,
        g.window,
        directed=[(u, v) for u, v in g.directed_edges if u in keep and v in keep],
        bidirected=[(u, v) for u, v in g.bidirected_edges if u in keep and v in keep],
        vertices=keep,
    )


def ancestors(g: SegmentGraph, targets: Iterable[Vertex]) -> frozenset[Vertex]:
    """All vertices with a directed path (possibly empty) into ``targets``."""
    idx = g._indices(targets)
    return g._vertices(reach_up(g._pa, range(len(g)), idx))


def mutilate_incoming(g: SegmentGraph, x: Iterable[Vertex]) -> SegmentGraph:
    """Remove directed edges pointing into ``x``; bidirected edges stay."""
    x = vset(x)
    for v in x:
        g._index(v)
    return SegmentGraph(
        g.width,
        g.window,
        directed=[(u, v) for u, v in g.directed_edges if v not in x],
        bidirected=g.bidirected_edges,
        vertices=g.vertices,
    )


def c_components(g: SegmentGraph) -> list[frozenset[Vertex]]:
    return [g._vertices(c) for c in components_bi(g._sib, range(len(g)))]


def topological_order(g: SegmentGraph) -> list[Vertex]:
    order = _kahn(g._pa, g._ch, range(len(g)))
    if order is None:
        raise ValidationError("directed part contains a cycle")
    return [g._order[k] for k in order]
