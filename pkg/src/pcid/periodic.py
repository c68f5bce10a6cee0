"""Periodic causal graphs given by lagged edge templates.

A template ``(a, b, lag)`` stands for every edge between ``X[a, t]`` and
``X[b, t + lag]``.  Directed templates point forward in time; bidirected
templates are unordered only when ``lag == 0`` and are then stored with
``a < b``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from .admg import SegmentGraph, Vertex, _kahn, vset
from .errors import DomainError, ValidationError

Template = tuple[int, int, int]


@dataclass(frozen=True)
class PeriodicSpec:
    width: int
    latency: int
    directed: frozenset[Template]
    bidirected: frozenset[Template]

    def __init__(self, width: int, latency: int,
                 directed: Iterable[Template] = (), bidirected: Iterable[Template] = ()):
        d = frozenset(tuple(int(c) for c in t) for t in directed)
        b = frozenset(_canon_bi(tuple(int(c) for c in t)) for t in bidirected)
        object.__setattr__(self, "width", int(width))
        object.__setattr__(self, "latency", int(latency))
        object.__setattr__(self, "directed", d)
        object.__setattr__(self, "bidirected", b)
        self._validate()

    def _validate(self) -> None:
        w, L = self.width, self.latency
        if w < 1:
            raise ValidationError(f"width must be positive, got {w}")
        if L < 1:
            raise ValidationError(f"latency must be positive, got {L}")
        for kind, temps in (("dir", self.directed), ("bi", self.bidirected)):
            for a, b, lag in temps:
                if not (0 <= a < w and 0 <= b < w):
                    raise ValidationError(f"{kind} template {(a, b, lag)} has a row outside [0, {w})")
                if not 0 <= lag <= L:
                    raise ValidationError(f"{kind} template {(a, b, lag)} has lag outside [0, {L}]")
                if a == b and lag == 0:
                    raise ValidationError(f"{kind} template {(a, b, lag)} is a self-loop")
        # lag-0 directed edges must be acyclic within a layer
        pa: list[list[int]] = [[] for _ in range(w)]
        ch: list[list[int]] = [[] for _ in range(w)]
        for a, b, lag in self.directed:
            if lag == 0:
                pa[b].append(a)
                ch[a].append(b)
        if _kahn(pa, ch, range(w)) is None:
            raise ValidationError("contemporaneous directed templates form a cycle")

    def sorted_directed(self) -> list[Template]:
        return sorted(self.directed, key=lambda t: (t[2], t[0], t[1]))

    def sorted_bidirected(self) -> list[Template]:
        return sorted(self.bidirected, key=lambda t: (t[2], t[0], t[1]))

    def __str__(self) -> str:
        return dumps_text(self)


def _canon_bi(t: Template) -> Template:
    a, b, lag = t
    if lag == 0 and a > b:
        return (b, a, 0)
    return (a, b, lag)


def unroll(spec: PeriodicSpec, window: tuple[int, int]) -> SegmentGraph:
    """Segment of the infinite graph on layers ``window[0] .. window[1]``.

    Edges with an endpoint outside the window are dropped, which is the
    same as taking the induced subgraph of the infinite graph.
    """
    lo, hi = window
    if lo < 0 or lo > hi:
        raise DomainError(f"invalid window [{lo}, {hi}]")
    directed = []
    for a, b, lag in spec.directed:
        for t in range(lo, hi - lag + 1):
            directed.append((Vertex(a, t), Vertex(b, t + lag)))
    bidirected = []
    for a, b, lag in spec.bidirected:
        for t in range(lo, hi - lag + 1):
            bidirected.append((Vertex(a, t), Vertex(b, t + lag)))
    return SegmentGraph(spec.width, (lo, hi), directed, bidirected)


def shift_set(s: Iterable[Vertex], delta: int) -> frozenset[Vertex]:
    s = vset(s)
    if s and min(v.time for v in s) + delta < 0:
        raise DomainError(f"shifting by {delta} moves a vertex below layer 0")
    return frozenset(Vertex(v.row, v.time + delta) for v in s)


def distance(a: Iterable[Vertex], b: Iterable[Vertex]) -> int:
    """Smallest layer difference between a vertex of ``a`` and one of ``b``."""
    ta = sorted({v.time for v in a})
    tb = sorted({v.time for v in b})
    if not ta or not tb:
        raise DomainError("distance needs two non-empty sets")
    best = None
    i = j = 0
    while i < len(ta) and j < len(tb):
        d = abs(ta[i] - tb[j])
        best = d if best is None or d < best else best
        if ta[i] < tb[j]:
            i += 1
        else:
            j += 1
    return best


def lookback_constant(spec: PeriodicSpec) -> int:
    """``L * 2^(L w) * (L w + 1)^(2 L w + 2)`` as an exact integer."""
    L, w = spec.latency, spec.width
    lw = L * w
    return L * 2**lw * (lw + 1) ** (2 * lw + 2)


@dataclass(frozen=True)
class LatencyReduction:
    """Aggregation of ``latency`` consecutive layers into one.

    Original ``X[i, t]`` becomes ``X[i + w * (t mod L), t // L]`` in a graph
    of width ``L * w`` and latency 1.
    """

    original: PeriodicSpec
    reduced: PeriodicSpec

    @property
    def factor(self) -> int:
        return self.original.latency

    def forward(self, v: Vertex) -> Vertex:
        w, L = self.original.width, self.factor
        return Vertex(v.row + w * (v.time % L), v.time // L)

    def backward(self, v: Vertex) -> Vertex:
        w, L = self.original.width, self.factor
        phase, row = divmod(v.row, w)
        return Vertex(row, v.time * L + phase)

    def forward_set(self, s: Iterable[Vertex]) -> frozenset[Vertex]:
        return frozenset(self.forward(v) for v in s)

    def backward_set(self, s: Iterable[Vertex]) -> frozenset[Vertex]:
        return frozenset(self.backward(v) for v in s)

    def forward_window(self, window: tuple[int, int]) -> tuple[int, int]:
        return (window[0] // self.factor, window[1] // self.factor)


def reduce_latency(spec: PeriodicSpec) -> LatencyReduction:
    L, w = spec.latency, spec.width
    if L == 1:
        return LatencyReduction(spec, spec)

    def lift(temps):
        out = set()
        for a, b, lag in temps:
            for p in range(L):
                q, carry = (p + lag) % L, (p + lag) // L
                out.add((a + w * p, b + w * q, carry))
        return out

    reduced = PeriodicSpec(L * w, 1, lift(spec.directed), lift(spec.bidirected))
    return LatencyReduction(spec, reduced)


# -- file formats -----------------------------------------------------------

_JSON_KEYS = {"width", "latency", "directed", "bidirected"}


def loads(text: str) -> PeriodicSpec:
    """Parse either the line-oriented text format or its JSON equivalent."""
    if text.lstrip().startswith("{"):
        return _loads_json(text)
    return _loads_text(text)


def _loads_json(text: str) -> PeriodicSpec:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValidationError("JSON graph must be an object")
    unknown = set(data) - _JSON_KEYS
    if unknown:
        raise ValidationError(f"unknown keys in JSON graph: {sorted(unknown)}")
    for key in ("width", "latency"):
        if key not in data:
            raise ValidationError(f"JSON graph is missing {key!r}")
    return PeriodicSpec(
        data["width"], data["latency"],
        [tuple(t) for t in data.get("directed", [])],
        [tuple(t) for t in data.get("bidirected", [])],
    )


def _loads_text(text: str) -> PeriodicSpec:
    width = latency = None
    directed, bidirected = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            nums = [int(tok) for tok in rest]
        except ValueError:
            raise ValidationError(f"line {lineno}: expected integers in {raw.strip()!r}") from None
        if head in ("width", "latency"):
            if len(nums) != 1:
                raise ValidationError(f"line {lineno}: {head} takes one integer")
            if head == "width":
                width = nums[0]
            else:
                latency = nums[0]
        elif head in ("dir", "bi"):
            if len(nums) != 3:
                raise ValidationError(f"line {lineno}: {head} takes three integers")
            (directed if head == "dir" else bidirected).append(tuple(nums))
        else:
            raise ValidationError(f"line {lineno}: unknown keyword {head!r}")
    if width is None or latency is None:
        raise ValidationError("graph file must declare width and latency")
    return PeriodicSpec(width, latency, directed, bidirected)


def dumps_text(spec: PeriodicSpec) -> str:
    lines = [f"width {spec.width}", f"latency {spec.latency}"]
    lines += [f"dir {a} {b} {lag}" for a, b, lag in spec.sorted_directed()]
    lines += [f"bi {a} {b} {lag}" for a, b, lag in spec.sorted_bidirected()]
    return "\n".join(lines) + "\n"


def dumps_json(spec: PeriodicSpec) -> str:
    return json.dumps({
        "width": spec.width,
        "latency": spec.latency,
        "directed": [list(t) for t in spec.sorted_directed()],
        "bidirected": [list(t) for t in spec.sorted_bidirected()],
    })


def load(path: str | Path) -> PeriodicSpec:
    return loads(Path(path).read_text(encoding="utf-8"))
