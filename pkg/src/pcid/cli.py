"""``pcid`` command-line front end.

JSON goes to standard output, one-line summaries to standard error.
Exit codes: 0 identifiable (or nothing to report), 10 unidentifiable,
2 usage error, 3 refusal.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import bounded, families, ident, periodic
from .admg import SegmentGraph, Vertex, canonical, vset
from .errors import PcidError, RefusalError
from .ident import Hedge

EXIT_OK = 0
EXIT_UNIDENTIFIABLE = 10
EXIT_USAGE = 2
EXIT_REFUSAL = 3


class UsageError(PcidError):
    pass


# -- parsing helpers ----------------------------------------------------------------


def parse_vertices(text: str) -> frozenset[Vertex]:
    """``"1@1,2@2"`` -> {X[1,1], X[2,2]}.  The empty string is the empty set."""
    out = set()
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        row, sep, t = tok.partition("@")
        try:
            if not sep:
                raise ValueError
            out.add(Vertex(int(row), int(t)))
        except ValueError:
            raise UsageError(f"bad vertex {tok!r}, expected row@time") from None
    return frozenset(out)


def format_vertices(vs) -> str:
    return ",".join(f"{v.row}@{v.time}" for v in canonical(vs))


def parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return (int(lo), int(hi))
    except ValueError:
        raise UsageError(f"bad window {text!r}, expected lo:hi") from None


def parse_lookback(text: str) -> bounded.Lookback:
    if text in ("auto", "full"):
        return text
    try:
        n = int(text)
    except ValueError:
        raise UsageError(f"bad lookback {text!r}, expected auto, full or a layer count") from None
    if n < 0:
        raise UsageError("lookback must be non-negative")
    return n


def spec_hash(spec: periodic.PeriodicSpec) -> str:
    return hashlib.sha256(periodic.dumps_text(spec).encode()).hexdigest()[:16]


# -- witnesses and reports --------------------------------------------------------


def _vlist(vs) -> list[list[int]]:
    return [[v.row, v.time] for v in canonical(vs)]


def _elist(child) -> list[list[list[int]]]:
    return [[[a.row, a.time], [b.row, b.time]] for a, b in sorted(child.items(), key=lambda e: (e[0].time, e[0].row))]


def hedge_to_json(h: Hedge) -> dict:
    out = {
        "F": _vlist(h.f_vertices),
        "F_prime": _vlist(h.fprime_vertices),
        "roots": _vlist(h.roots),
        "F_edges": _elist(h.f_child),
        "F_prime_edges": _elist(h.fprime_child),
    }
    if h.subquery_x is not None:
        out["subquery_x"] = _vlist(h.subquery_x)
    return out


def hedge_from_json(d: dict) -> Hedge:
    def vs(key):
        return vset(tuple(p) for p in d[key])

    def es(key):
        return {Vertex(*a): Vertex(*b) for a, b in d[key]}

    sub = vs("subquery_x") if "subquery_x" in d else None
    return Hedge(vs("F"), es("F_edges"), vs("F_prime"), es("F_prime_edges"), vs("roots"), sub)


@dataclass
class QueryReport:
    command: str
    spec_hash: str
    x: list[list[int]]
    y: list[list[int]]
    mode: str
    decision: str
    label: str | None = None
    window: list[int] | None = None
    constant: int | None = None
    witness: dict | None = None
    delta: int | None = None
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> QueryReport:
        return cls(**json.loads(text))


def witness_violations(report: QueryReport, spec: periodic.PeriodicSpec) -> list[str]:
    """Re-validate a report's witness on the re-unrolled window."""
    if report.witness is None:
        return [] if report.decision != "Unidentifiable" else ["unidentifiable report without witness"]
    h = hedge_from_json(report.witness)
    g = periodic.unroll(spec, tuple(report.window))
    x = h.subquery_x if h.subquery_x is not None else vset(tuple(p) for p in report.x)
    y = vset(tuple(p) for p in report.y)
    if report.delta is not None:
        y = periodic.shift_set(y, report.delta)
    return ident.validate_hedge(g, x, y, h)


# -- commands -----------------------------------------------------------------------


def _query(args) -> tuple[frozenset[Vertex], frozenset[Vertex]]:
    x, y = parse_vertices(args.do), parse_vertices(args.on)
    if x & y:
        raise UsageError(f"--do and --on overlap in {format_vertices(x & y)}")
    return x, y


def _load_graph(args) -> periodic.PeriodicSpec:
    path = args.graph_opt or args.graph
    if not path:
        raise UsageError("no graph given; pass a file or --graph FILE")
    try:
        return periodic.load(path)
    except OSError as e:
        raise UsageError(f"cannot read graph {path!r}: {e.strerror}") from None


def _emit(report: QueryReport, summary: str) -> None:
    print(report.to_json())
    print(summary, file=sys.stderr)


def cmd_id(args) -> int:
    x, y = _query(args)
    spec = _load_graph(args)
    lookback = parse_lookback(args.lookback)
    t0 = time.perf_counter()
    res = bounded.decide_bounded(spec, x, y, lookback)
    report = QueryReport(
        "id", spec_hash(spec), _vlist(x), _vlist(y), str(lookback), res.decision,
        label=res.label, window=list(res.window) if res.window else None, constant=res.constant,
        witness=hedge_to_json(res.witness) if res.witness else None,
        wall_time=round(time.perf_counter() - t0, 6),
    )
    _emit(report, f"{res.decision} ({res.label}) on window {res.window}")
    return EXIT_OK if res.identifiable else EXIT_UNIDENTIFIABLE


def cmd_all_shifts(args) -> int:
    x, y = _query(args)
    spec = _load_graph(args)
    if args.c_override is not None and args.c_override < 1:
        raise UsageError("--c-override must be at least 1")
    t0 = time.perf_counter()
    res = bounded.decide_all_shifts(spec, x, y, args.c_override, jobs=args.jobs)
    decision = "AllIdentifiable" if res.all_identifiable else "UnidentifiableAt"
    mode = "auto" if args.c_override is None else f"c={args.c_override}"
    report = QueryReport(
        "all-shifts", spec_hash(spec), _vlist(x), _vlist(y), mode,
        "Identifiable" if res.all_identifiable else "Unidentifiable",
        label=res.label, window=list(res.window) if res.window else None, constant=res.constant,
        witness=hedge_to_json(res.witness) if res.witness else None, delta=res.delta,
        wall_time=round(time.perf_counter() - t0, 6), extra={"result": decision, "horizon": res.horizon},
    )
    tail = "" if res.all_identifiable else f" delta={res.delta}"
    _emit(report, f"{decision}{tail} ({res.label})")
    return EXIT_OK if res.all_identifiable else EXIT_UNIDENTIFIABLE


def cmd_family(args) -> int:
    req = families.FamilyRequest(args.kind, args.w, args.seed, args.latency, args.density_dir, args.density_bi)
    spec = families.generate(req)
    text = periodic.dumps_json(spec) + "\n" if args.format == "json" else periodic.dumps_text(spec)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    x, y = _query(args)
    spec = _load_graph(args)
    g = periodic.unroll(spec, parse_window(args.window))
    hedges = ident.enumerate_hedges(g, x, y, max_vertices=args.max_vertices,
                                    variant=args.variant, minimal=not args.all)
    print(json.dumps({
        "spec_hash": spec_hash(spec), "x": _vlist(x), "y": _vlist(y), "window": list(g.window),
        "variant": args.variant, "minimal": not args.all,
        "hedges": [hedge_to_json(h) for h in hedges],
    }, indent=2))
    print(f"{len(hedges)} hedge(s)", file=sys.stderr)
    return EXIT_UNIDENTIFIABLE if hedges else EXIT_OK


def cmd_min_lookback(args) -> int:
    x, y = _query(args)
    spec = _load_graph(args)
    if args.probe < 0:
        raise UsageError("--probe must be non-negative")
    m = bounded.minimal_lookback(spec, x, y, args.probe)
    print(json.dumps(m))
    print(f"minimal lookback: {m}", file=sys.stderr)
    return EXIT_OK


def to_dot(g: SegmentGraph) -> str:
    """DOT text with one column per layer; directed solid, bidirected dashed."""
    lines = ["digraph G {", "  rankdir=LR;", "  node [shape=circle];"]
    lo, hi = g.window
    for t in range(lo, hi + 1):
        names = " ".join(f'"{v}";' for v in g if v.time == t)
        lines.append(f"  {{ rank=same; {names} }}")
    for u, v in sorted(g.directed_edges, key=lambda e: (e[0].time, e[0].row, e[1].time, e[1].row)):
        lines.append(f'  "{u}" -> "{v}" [style=solid];')
    for u, v in sorted(g.bidirected_edges, key=lambda e: (e[0].time, e[0].row, e[1].time, e[1].row)):
        lines.append(f'  "{u}" -> "{v}" [style=dashed, dir=both];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    spec = _load_graph(args)
    g = periodic.unroll(spec, parse_window(args.window))
    text = to_dot(g)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output} ({len(g)} nodes)", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", nargs="?", help="graph file (text or JSON)")
    p.add_argument("--graph", dest="graph_opt", metavar="FILE", help="graph file, alternative to the positional")


def _query_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--do", required=True, help="intervention set, e.g. 1@1,0@1")
    p.add_argument("--on", required=True, help="outcome set, e.g. 2@2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcid", description="Causal identification on periodic time-series graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("id", help="decide P(on | do) on a bounded window")
    _graph_args(p)
    _query_args(p)
    p.add_argument("--lookback", default="auto", help="auto, full, or a number of layers (default auto)")
    p.set_defaults(func=cmd_id)

    p = sub.add_parser("all-shifts", help="decide P(on shifted by d | do) for every d >= 0")
    _graph_args(p)
    _query_args(p)
    p.add_argument("--c-override", type=int, default=None, help="check only shifts below this horizon")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for the per-shift loop")
    p.set_defaults(func=cmd_all_shifts)

    p = sub.add_parser("family", help="write a built-in graph")
    p.add_argument("kind", choices=["gw", "past-confounding", "contemporaneous", "random"])
    p.add_argument("--w", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--latency", type=int, default=1)
    p.add_argument("--density-dir", type=float, default=0.3)
    p.add_argument("--density-bi", type=float, default=0.3)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("oracle", help="list every hedge by brute force on a small window")
    _graph_args(p)
    _query_args(p)
    p.add_argument("--window", required=True, help="layers lo:hi")
    p.add_argument("--variant", choices=["strict", "classical"], default="strict")
    p.add_argument("--all", action="store_true", help="also list hedges that contain a smaller one")
    p.add_argument("--max-vertices", type=int, default=14)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("min-lookback", help="smallest lookback after which the decision is stable")
    _graph_args(p)
    _query_args(p)
    p.add_argument("--probe", type=int, required=True, help="largest lookback to try")
    p.set_defaults(func=cmd_min_lookback)

    p = sub.add_parser("export-dot", help="write an unrolled window as Graphviz DOT")
    _graph_args(p)
    p.add_argument("--window", required=True, help="layers lo:hi")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RefusalError as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_REFUSAL
    except (PcidError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
