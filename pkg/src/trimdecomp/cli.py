"""Decomposition pipeline and command line front end.

decompose_document runs the whole flow on a parsed layout: conflict
detection, cut generation, optional stitch insertion, the graph
reductions, the exact solve, and reassembly into a report. main wraps it
with file handling, artifact export, and a benchmark mode over a
directory of layouts.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .endcut import generate_all_end_cuts, merged_cut_rects
from .geometry import Metric, SpatialIndex
from .graphs import (
    EndCutGraph,
    LayoutGraph,
    apply_joint,
    build_end_cut_graph,
    build_layout_graph,
    conflict_pairs,
    connected_components,
    end_cut_graph_dot,
    generate_stitch_candidates,
    layout_graph_dot,
    preselect_end_cuts,
    split_all_bridges,
)
from .ilp import (
    IlpModel,
    SolveStatus,
    build_model_no_stitch,
    build_model_with_stitch,
    export_lp,
    solve,
)
from .layout_io import (
    DecompositionReport,
    LayoutDocument,
    LayoutParseError,
    StitchPoint,
    VertexKey,
    emit_svg,
    fraction_to_decimal,
    parse_layout,
    write_report,
)


@dataclass(frozen=True)
class RunStats:
    wires: int
    components: int
    conflicts: int
    stitches: int
    cost: Fraction
    cpu_s: float
    status: SolveStatus
    nodes: int


@dataclass(frozen=True)
class DecompositionResult:
    document: LayoutDocument
    graph: LayoutGraph
    end_cuts: EndCutGraph
    report: DecompositionReport
    stats: RunStats
    stage_ms: tuple[tuple[str, int], ...]


def build_full_model(result: DecompositionResult) -> IlpModel:
    """The single unreduced model for the decomposition that was run."""
    doc = result.document
    if doc.params.stitch:
        return build_model_with_stitch(result.graph, result.end_cuts, doc.params.alpha)
    return build_model_no_stitch(result.graph, result.end_cuts)


def decompose_document(
    doc: LayoutDocument,
    *,
    stitch: bool | None = None,
    alpha: Fraction | None = None,
    use_components: bool = True,
    use_bridges: bool = True,
    use_preselect: bool = True,
    metric: Metric = Metric.CHEBYSHEV,
    time_limit: float | None = None,
    lexicographic: bool = True,
) -> DecompositionResult:
    """Decompose one layout exactly and package every output.

    The keyword switches exist to measure the graph reductions; all of
    them preserve the optimum, so any configuration returns the same cost.
    """
    t_start = time.perf_counter()
    deadline = t_start + time_limit if time_limit is not None else None
    stages: list[tuple[str, int]] = []
    last = t_start

    def stage(name: str) -> None:
        nonlocal last
        now = time.perf_counter()
        stages.append((name, int((now - last) * 1000)))
        last = now

    params = doc.params
    if stitch is not None or alpha is not None:
        params = dataclasses.replace(
            params,
            stitch=params.stitch if stitch is None else stitch,
            alpha=params.alpha if alpha is None else alpha,
        )
        doc = dataclasses.replace(doc, params=params)

    index = SpatialIndex.from_shapes(doc.shapes, max(params.dis_m, params.dis_c, 1))
    pairs = conflict_pairs(doc, index, metric)
    stage("pairs")
    cuts = generate_all_end_cuts(doc, pairs, index)
    stage("cuts")
    g = build_layout_graph(doc, pairs, cuts)
    if params.stitch:
        g = generate_stitch_candidates(doc, g, metric=metric)
    stage("graph")
    ecg = build_end_cut_graph(cuts, params, metric)
    stage("ecgraph")

    if use_preselect:
        reduced, preselected = preselect_end_cuts(g, ecg)
    else:
        reduced, preselected = g, ()
    pieces = connected_components(reduced, ecg) if use_components else [reduced]
    stage("reduce")

    colors: dict[VertexKey, int] = {}
    selected: set = set()
    piece_total = Fraction(0)
    nodes = 0
    status = SolveStatus.OPTIMAL
    for piece in pieces:
        subs, joints = split_all_bridges(piece, ecg) if use_bridges else ([piece], [])
        for sub in subs:
            if params.stitch:
                model = build_model_with_stitch(sub, ecg, params.alpha)
            else:
                model = build_model_no_stitch(sub, ecg)
            remaining = None
            if deadline is not None:
                remaining = max(deadline - time.perf_counter(), 0.001)
            sol = solve(model, time_limit=remaining, lexicographic=lexicographic)
            if sol.status is SolveStatus.TIMEOUT:
                status = SolveStatus.TIMEOUT
            piece_total += sol.objective
            nodes += sol.nodes
            colors.update(sol.colors)
            selected |= set(sol.selected)
        for joint in reversed(joints):
            apply_joint(colors, selected, joint)
    for (u, v), cand in preselected:
        if colors[u] == colors[v]:
            selected.add(cand.pair)
    stage("solve")

    conflicts = []
    for (u, v), cand in sorted(g.conflict_edges.items()):
        if colors[u] != colors[v]:
            continue
        if cand is not None and cand.pair in selected:
            continue
        conflicts.append((u, v))
    stitches: list[StitchPoint] = []
    for (u, v), sp in sorted(g.stitch_edges.items()):
        if colors[u] != colors[v]:
            stitches.append(sp)
    cost = Fraction(len(conflicts)) + params.alpha * len(stitches)
    if cost != piece_total:
        raise AssertionError(
            f"cost bookkeeping mismatch: recount {cost} != solved {piece_total}"
        )
    for pa, pb in ecg.ee_edges:
        if pa in selected and pb in selected:
            raise AssertionError(f"cuts {pa} and {pb} are too close to both print")

    report = DecompositionReport(
        masks={v: "AB"[colors[v]] for v in sorted(colors)},
        cuts=merged_cut_rects([cuts[p] for p in sorted(selected)], params),
        conflicts=tuple(conflicts),
        stitches=tuple(sorted(stitches)),
        cost=cost,
    )
    stage("report")
    stats = RunStats(
        wires=len(doc.shapes),
        components=len(pieces),
        conflicts=len(conflicts),
        stitches=len(stitches),
        cost=cost,
        cpu_s=time.perf_counter() - t_start,
        status=status,
        nodes=nodes,
    )
    return DecompositionResult(
        document=doc,
        graph=g,
        end_cuts=ecg,
        report=report,
        stats=stats,
        stage_ms=tuple(stages),
    )


def stats_line(stats: RunStats) -> str:
    return (
        f"wire# {stats.wires} comp# {stats.components} "
        f"conflict# {stats.conflicts} stitch# {stats.stitches} "
        f"cost {fraction_to_decimal(stats.cost)} CPU(s) {stats.cpu_s:.2f}"
    )


def _parse_alpha(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad weight {text!r}: {exc}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("stitch weight must be non-negative")
    return value


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trimdecomp",
        description="Assign layout features to two masks plus a trim mask of end-cuts.",
    )
    ap.add_argument("--input", required=True, help="layout file, or a directory of .lay files")
    ap.add_argument("--out", help="write the decomposition report here")
    ap.add_argument("--svg", help="render the decomposition to an SVG file")
    ap.add_argument("--lp-export", help="write the full 0-1 model in LP format")
    ap.add_argument(
        "--stitch",
        action="store_true",
        default=None,
        help="allow stitches even when the layout file does not ask for them",
    )
    ap.add_argument("--no-components", action="store_true", help="skip the component split")
    ap.add_argument("--no-bridges", action="store_true", help="skip bridge decomposition")
    ap.add_argument("--no-preselect", action="store_true", help="skip cut preselection")
    ap.add_argument("--alpha", type=_parse_alpha, help="stitch weight, e.g. 1/10 or 0.1")
    ap.add_argument("--time-limit", type=float, help="overall solve budget in seconds")
    ap.add_argument("--jobs", type=int, default=1, help="parallel layouts in directory mode")
    ap.add_argument(
        "--metric",
        choices=["chebyshev", "euclidean"],
        default="chebyshev",
        help="distance rule for spacing checks",
    )
    ap.add_argument("--dot", help="write conflict and cut graphs in DOT format")
    return ap


def _run_one(path: Path, args: argparse.Namespace) -> DecompositionResult:
    doc = parse_layout(path.read_text())
    return decompose_document(
        doc,
        stitch=args.stitch,
        alpha=args.alpha,
        use_components=not args.no_components,
        use_bridges=not args.no_bridges,
        use_preselect=not args.no_preselect,
        metric=Metric(args.metric),
        time_limit=args.time_limit,
    )


def _ec_dot_path(path: Path) -> Path:
    return path.with_name(path.stem + ".ec" + (path.suffix or ".dot"))


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    root = Path(args.input)
    if not root.exists():
        print(f"error: no such input: {root}", file=sys.stderr)
        return 1
    try:
        if root.is_dir():
            return _bench(root, args)
        result = _run_one(root, args)
    except (LayoutParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name, ms in result.stage_ms:
        print(f"stage={name} ms={ms}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(write_report(result.report))
    if args.svg:
        Path(args.svg).write_text(emit_svg(result.document, result.report))
    if args.lp_export:
        Path(args.lp_export).write_text(export_lp(build_full_model(result)))
    if args.dot:
        dot = Path(args.dot)
        dot.write_text(layout_graph_dot(result.graph))
        _ec_dot_path(dot).write_text(end_cut_graph_dot(result.end_cuts))
    print(stats_line(result.stats))
    return 0


def _bench(root: Path, args: argparse.Namespace) -> int:
    paths = sorted(root.glob("*.lay"))
    if not paths:
        print(f"error: no .lay files under {root}", file=sys.stderr)
        return 1

    def run(path: Path) -> tuple[str, RunStats]:
        return path.stem, _run_one(path, args).stats

    rows: list[tuple[str, RunStats]]
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(run, paths))
    else:
        rows = [run(p) for p in paths]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["circuit", "wire", "comp", "conflict", "stitch", "cost", "cpu_s"])
    for name, st in rows:
        writer.writerow(
            [name, st.wires, st.components, st.conflicts, st.stitches,
             fraction_to_decimal(st.cost), f"{st.cpu_s:.2f}"]
        )
    sys.stdout.write(buf.getvalue())
    return 0
