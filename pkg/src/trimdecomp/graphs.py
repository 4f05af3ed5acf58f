"""Conflict and end-cut graphs plus the optimality-preserving reductions.

The layout graph has one vertex per feature segment. Conflict edges join
segments of different features that sit within the same-mask spacing rule;
each may carry the candidate end-cut of its feature pair. Stitch edges
chain the consecutive segments of one split feature.

The end-cut graph has one vertex per candidate cut, spacing edges between
cuts that are too close to print separately, and merge edges between cuts
that could fuse into one trim shape.

Reductions: neutral candidate edges can be deleted up front, connected
components solve independently, and safe bridge edges split a component in
two with a small reconciliation joint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .geometry import (
    Metric,
    Rect,
    SpatialIndex,
    bounding_box,
    rectset_chebyshev_gap,
    rectset_within,
    shapes_within,
)
from .layout_io import (
    DecompositionParams,
    LayoutDocument,
    StitchPoint,
    VertexKey,
    split_feature_rects,
)
from .endcut import EndCutCandidate, mergeable_pair

EdgeKey = tuple[VertexKey, VertexKey]
PairKey = tuple[int, int]


def edge_key(u: VertexKey, v: VertexKey) -> EdgeKey:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class LayoutGraph:
    segments: dict[VertexKey, tuple[Rect, ...]]
    conflict_edges: dict[EdgeKey, EndCutCandidate | None]
    stitch_edges: dict[EdgeKey, StitchPoint]

    def vertices(self) -> list[VertexKey]:
        return sorted(self.segments)

    def all_edges(self) -> list[EdgeKey]:
        return sorted(self.conflict_edges) + sorted(self.stitch_edges)

    def adjacency(self) -> dict[VertexKey, list[VertexKey]]:
        adj: dict[VertexKey, list[VertexKey]] = {v: [] for v in self.segments}
        for u, v in list(self.conflict_edges) + list(self.stitch_edges):
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj.values():
            lst.sort()
        return adj

    def induced(self, verts: Iterable[VertexKey]) -> "LayoutGraph":
        keep = set(verts)
        return LayoutGraph(
            segments={v: self.segments[v] for v in sorted(keep)},
            conflict_edges={
                e: c for e, c in self.conflict_edges.items() if e[0] in keep and e[1] in keep
            },
            stitch_edges={
                e: sp for e, sp in self.stitch_edges.items() if e[0] in keep and e[1] in keep
            },
        )


class EndCutGraph:
    def __init__(
        self,
        candidates: Mapping[PairKey, EndCutCandidate],
        ee_edges: Iterable[tuple[PairKey, PairKey]],
        merge_edges: Iterable[tuple[PairKey, PairKey]],
    ):
        self.candidates = dict(candidates)
        self.ee_edges = frozenset(ee_edges)
        self.merge_edges = frozenset(merge_edges)
        adj: dict[PairKey, list[PairKey]] = {}
        for a, b in self.ee_edges:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        self._ee_adj = {p: tuple(sorted(ns)) for p, ns in adj.items()}

    def ee_degree(self, pair: PairKey) -> int:
        return len(self._ee_adj.get(pair, ()))

    def ee_neighbors(self, pair: PairKey) -> tuple[PairKey, ...]:
        return self._ee_adj.get(pair, ())


def conflict_pairs(
    doc: LayoutDocument, index: SpatialIndex, metric: Metric = Metric.CHEBYSHEV
) -> list[PairKey]:
    """Feature pairs within the same-mask spacing rule of each other."""
    by_id = {s.id: s for s in doc.shapes}
    d = doc.params.dis_m
    pairs: set[PairKey] = set()
    for s in doc.shapes:
        for oid in index.query(s.bbox, d):
            if oid <= s.id:
                continue
            if shapes_within(s, by_id[oid], d, metric):
                pairs.add((s.id, oid))
    return sorted(pairs)


def build_layout_graph(
    doc: LayoutDocument,
    pairs: Sequence[PairKey],
    cuts: Mapping[PairKey, EndCutCandidate],
) -> LayoutGraph:
    segments = {(s.id, 0): s.rects for s in doc.shapes}
    conflict_edges: dict[EdgeKey, EndCutCandidate | None] = {
        ((a, 0), (b, 0)): cuts.get((a, b)) for a, b in pairs
    }
    return LayoutGraph(segments=segments, conflict_edges=conflict_edges, stitch_edges={})


def _merge_intervals(ivals: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    out: list[list[int]] = []
    for lo, hi in sorted(ivals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def generate_stitch_candidates(
    doc: LayoutDocument,
    g: LayoutGraph,
    margin: int | None = None,
    metric: Metric = Metric.CHEBYSHEV,
) -> LayoutGraph:
    """Split features into stitched segments away from all conflict zones.

    A feature is cut only where the projections of its conflicting
    neighbours, widened by the spacing rule, leave an uncovered span of at
    least the margin along its long axis. Widening keeps every conflicting
    pair incident to exactly one segment of each feature, so splitting can
    never add a conflict the unsplit layout did not have.
    """
    params = doc.params
    d = params.dis_m
    if margin is None:
        margin = max(1, d // 2)
    by_id = {s.id: s for s in doc.shapes}

    neighbours: dict[int, set[int]] = {}
    for (u, v) in g.conflict_edges:
        neighbours.setdefault(u[0], set()).add(v[0])
        neighbours.setdefault(v[0], set()).add(u[0])

    segments: dict[VertexKey, tuple[Rect, ...]] = {}
    stitch_edges: dict[EdgeKey, StitchPoint] = {}
    seg_count: dict[int, int] = {}

    for shape in doc.shapes:
        fid = shape.id
        near = neighbours.get(fid)
        if not near:
            segments[(fid, 0)] = shape.rects
            seg_count[fid] = 1
            continue
        bb = shape.bbox
        axis = "x" if bb.width >= bb.height else "y"
        span = (bb.lo.x, bb.hi.x) if axis == "x" else (bb.lo.y, bb.hi.y)
        covered = []
        for nid in sorted(near):
            nb = by_id[nid].bbox
            lo, hi = (nb.lo.x, nb.hi.x) if axis == "x" else (nb.lo.y, nb.hi.y)
            lo, hi = max(lo - d, span[0]), min(hi + d, span[1])
            if lo < hi:
                covered.append((lo, hi))
        cuts: list[int] = []
        pos = span[0]
        for lo, hi in _merge_intervals(covered) + [(span[1], span[1])]:
            if lo - pos >= margin:
                cuts.append((pos + lo) // 2)
            pos = max(pos, hi)
        if not cuts:
            segments[(fid, 0)] = shape.rects
            seg_count[fid] = 1
            continue
        pieces = split_feature_rects(shape, cuts, axis)
        seg_count[fid] = len(pieces)
        for k, piece in enumerate(pieces):
            segments[(fid, k)] = piece
        for k, coord in enumerate(cuts):
            if axis == "x":
                spanning = [r for r in shape.rects if r.lo.x <= coord <= r.hi.x]
                cross = (
                    min(r.lo.y for r in spanning) + max(r.hi.y for r in spanning)
                ) // 2
                sp = StitchPoint(fid, coord, cross, "v")
            else:
                spanning = [r for r in shape.rects if r.lo.y <= coord <= r.hi.y]
                cross = (
                    min(r.lo.x for r in spanning) + max(r.hi.x for r in spanning)
                ) // 2
                sp = StitchPoint(fid, cross, coord, "h")
            stitch_edges[((fid, k), (fid, k + 1))] = sp

    conflict_edges: dict[EdgeKey, EndCutCandidate | None] = {}
    for (u, v), cand in sorted(g.conflict_edges.items()):
        f, gid = u[0], v[0]
        hits: list[EdgeKey] = []
        for i in range(seg_count[f]):
            for j in range(seg_count[gid]):
                if rectset_within(segments[(f, i)], segments[(gid, j)], d, metric):
                    hits.append(edge_key((f, i), (gid, j)))
        for e in hits:
            conflict_edges[e] = None
        if cand is not None and hits:
            cbox = [bounding_box(cand.rects)]
            best = min(
                hits,
                key=lambda e: (
                    rectset_chebyshev_gap(segments[e[0]], cbox)
                    + rectset_chebyshev_gap(segments[e[1]], cbox),
                    e,
                ),
            )
            conflict_edges[best] = cand

    return LayoutGraph(
        segments=segments, conflict_edges=conflict_edges, stitch_edges=stitch_edges
    )


def build_end_cut_graph(
    cuts: Mapping[PairKey, EndCutCandidate],
    params: DecompositionParams,
    metric: Metric = Metric.CHEBYSHEV,
) -> EndCutGraph:
    """Spacing and merge relations between candidate cuts."""
    order = sorted(cuts)
    d = params.dis_c
    index = SpatialIndex(max(d, 1))
    bboxes = []
    for i, p in enumerate(order):
        bb = bounding_box(cuts[p].rects)
        bboxes.append(bb)
        index.insert(i, bb)
    ee: set[tuple[PairKey, PairKey]] = set()
    merges: set[tuple[PairKey, PairKey]] = set()
    for i, pa in enumerate(order):
        ca = cuts[pa]
        for j in sorted(index.query(bboxes[i], d)):
            if j <= i:
                continue
            cb = cuts[order[j]]
            if not rectset_within(ca.rects, cb.rects, d, metric):
                continue
            if mergeable_pair(ca, cb, params):
                merges.add((pa, order[j]))
            else:
                ee.add((pa, order[j]))
    return EndCutGraph(cuts, ee, merges)


def preselect_end_cuts(
    g: LayoutGraph, ecg: EndCutGraph
) -> tuple[LayoutGraph, tuple[tuple[EdgeKey, EndCutCandidate], ...]]:
    """Remove conflict edges whose candidate cut constrains nothing else.

    Such a cut can always be selected after the fact if the two segments
    end up on the same mask, at zero cost, so deleting the edge preserves
    the optimum. The removed edges are returned for that later selection.
    """
    removed: list[tuple[EdgeKey, EndCutCandidate]] = []
    keep: dict[EdgeKey, EndCutCandidate | None] = {}
    for e, cand in sorted(g.conflict_edges.items()):
        if cand is not None and ecg.ee_degree(cand.pair) == 0:
            removed.append((e, cand))
        else:
            keep[e] = cand
    reduced = LayoutGraph(
        segments=dict(g.segments),
        conflict_edges=keep,
        stitch_edges=dict(g.stitch_edges),
    )
    return reduced, tuple(removed)


class _UnionFind:
    def __init__(self, items: Iterable):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def connected_components(g: LayoutGraph, ecg: EndCutGraph | None = None) -> list[LayoutGraph]:
    """Split into independently solvable subgraphs.

    Besides conflict and stitch connectivity, two parts are inseparable
    when a spacing edge ties a candidate in one to a candidate in the
    other: selecting one cut then constrains the other part.
    """
    uf = _UnionFind(g.segments)
    for u, v in list(g.conflict_edges) + list(g.stitch_edges):
        uf.union(u, v)
    if ecg is not None:
        attach = {c.pair: e for e, c in g.conflict_edges.items() if c is not None}
        for pa, pb in ecg.ee_edges:
            ea, eb = attach.get(pa), attach.get(pb)
            if ea is not None and eb is not None:
                uf.union(ea[0], eb[0])
    groups: dict[VertexKey, list[VertexKey]] = {}
    for v in g.segments:
        groups.setdefault(uf.find(v), []).append(v)
    pieces = [g.induced(vs) for vs in groups.values()]
    pieces.sort(key=lambda p: min(p.segments))
    return pieces


def find_bridges(g: LayoutGraph) -> list[EdgeKey]:
    """Conflict edges whose removal disconnects the graph, found with an
    iterative lowpoint search over conflict and stitch edges together."""
    edges = g.all_edges()
    adj: dict[VertexKey, list[tuple[VertexKey, int]]] = {v: [] for v in g.segments}
    for idx, (u, v) in enumerate(edges):
        adj[u].append((v, idx))
        adj[v].append((u, idx))

    disc: dict[VertexKey, int] = {}
    low: dict[VertexKey, int] = {}
    timer = 0
    bridges: set[int] = set()
    for root in g.vertices():
        if root in disc:
            continue
        stack: list[tuple[VertexKey, int, int]] = [(root, -1, 0)]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            v, in_edge, ptr = stack[-1]
            if ptr < len(adj[v]):
                stack[-1] = (v, in_edge, ptr + 1)
                w, eidx = adj[v][ptr]
                if eidx == in_edge:
                    continue
                if w in disc:
                    low[v] = min(low[v], disc[w])
                else:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, eidx, 0))
            else:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        bridges.add(in_edge)
    return sorted(e for i, e in enumerate(edges) if i in bridges and e in g.conflict_edges)


@dataclass(frozen=True)
class BridgeJoint:
    """Reconnection record for one split bridge edge.

    After both sides are solved, equal colours at the joint are repaired by
    selecting the carried cut, or by flipping every colour on flip_side
    when there is none; either way the joint itself costs nothing.
    """

    u: VertexKey
    v: VertexKey
    candidate: EndCutCandidate | None
    flip_side: frozenset[VertexKey]


def _side_of(g: LayoutGraph, e: EdgeKey) -> set[VertexKey]:
    """Vertices reachable from e's first endpoint without crossing e."""
    adj = g.adjacency()
    u, v = e
    seen = {u}
    work = [u]
    while work:
        w = work.pop()
        for n in adj[w]:
            if w == u and n == v or w == v and n == u:
                continue
            if (edge_key(w, n)) == e:
                continue
            if n not in seen:
                seen.add(n)
                work.append(n)
    return seen


def split_on_bridge(g: LayoutGraph, e: EdgeKey) -> tuple[LayoutGraph, LayoutGraph, BridgeJoint]:
    side_u = _side_of(g, e)
    side_v = set(g.segments) - side_u
    g1 = g.induced(side_u)
    g2 = g.induced(side_v)
    flip = side_v if len(side_v) <= len(side_u) else side_u
    joint = BridgeJoint(
        u=e[0], v=e[1], candidate=g.conflict_edges[e], flip_side=frozenset(flip)
    )
    return g1, g2, joint


def _splittable_bridge(g: LayoutGraph, ecg: EndCutGraph | None) -> EdgeKey | None:
    if len(g.segments) <= 2:
        return None
    bridges = find_bridges(g)
    if not bridges:
        return None
    if ecg is None or not ecg.ee_edges:
        return bridges[0]
    attach = {c.pair: e for e, c in g.conflict_edges.items() if c is not None}
    for e in bridges:
        cand = g.conflict_edges[e]
        if cand is not None and ecg.ee_degree(cand.pair) > 0:
            continue  # selecting or skipping this cut interacts with others
        side_u = _side_of(g, e)
        crossing = False
        for pa, pb in ecg.ee_edges:
            ea, eb = attach.get(pa), attach.get(pb)
            if ea is None or eb is None:
                continue
            if (ea[0] in side_u) != (eb[0] in side_u):
                crossing = True
                break
        if not crossing:
            return e
    return None


def split_all_bridges(
    g: LayoutGraph, ecg: EndCutGraph | None = None
) -> tuple[list[LayoutGraph], list[BridgeJoint]]:
    """Recursively split at safe bridges; joints are returned in creation
    order and must be reconciled in reverse."""
    work = [g]
    done: list[LayoutGraph] = []
    joints: list[BridgeJoint] = []
    while work:
        h = work.pop()
        e = _splittable_bridge(h, ecg)
        if e is None:
            done.append(h)
            continue
        g1, g2, joint = split_on_bridge(h, e)
        joints.append(joint)
        work.append(g1)
        work.append(g2)
    done.sort(key=lambda p: min(p.segments))
    return done, joints


def apply_joint(
    colors: dict[VertexKey, int],
    selected: set[PairKey],
    joint: BridgeJoint,
) -> None:
    if colors[joint.u] != colors[joint.v]:
        return
    if joint.candidate is not None:
        selected.add(joint.candidate.pair)
        return
    for w in joint.flip_side:
        colors[w] ^= 1


def layout_graph_dot(g: LayoutGraph) -> str:
    def node(v: VertexKey) -> str:
        return f'"{v[0]}/{v[1]}"'

    lines = ["graph layout {"]
    for v in g.vertices():
        lines.append(f"  {node(v)};")
    for (u, v), cand in sorted(g.conflict_edges.items()):
        attr = ' [label="cut"]' if cand is not None else ""
        lines.append(f"  {node(u)} -- {node(v)}{attr};")
    for u, v in sorted(g.stitch_edges):
        lines.append(f"  {node(u)} -- {node(v)} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def end_cut_graph_dot(ecg: EndCutGraph) -> str:
    def node(p: PairKey) -> str:
        return f'"{p[0]}-{p[1]}"'

    lines = ["graph endcuts {"]
    for p in sorted(ecg.candidates):
        lines.append(f"  {node(p)};")
    for a, b in sorted(ecg.ee_edges):
        lines.append(f"  {node(a)} -- {node(b)};")
    for a, b in sorted(ecg.merge_edges):
        lines.append(f"  {node(a)} -- {node(b)} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
