"""End-cut candidate generation.

Two features that sit closer than the same-mask spacing rule can still share
a mask if the trim exposure removes the sliver of material between them. A
candidate end-cut for a feature pair is a set of rectangular boxes filling
the gap between facing edges or between nearby convex corners. Every edge
pair of the two features is examined; the surviving boxes are deduplicated
and thinned so overlapping alternatives collapse to the cheapest usable set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .geometry import (
    Edge,
    Rect,
    RectilinearShape,
    SpatialIndex,
    interval_gap,
    rects_closed_intersect,
    rects_interior_intersect,
)
from .layout_io import DecompositionParams, LayoutDocument


class BoxKind(enum.Enum):
    EDGE_EDGE = "edge_edge"
    CORNER_CORNER = "corner_corner"


@dataclass(frozen=True)
class EndCutBox:
    """One rectangle of a candidate cut.

    run_axis is the axis along which the repaired facing run lies; for
    corner boxes it is fixed to 'x' and the dimensions are read literally.
    """

    rect: Rect
    kind: BoxKind
    run_axis: str

    def sort_key(self) -> tuple:
        return (self.rect, self.kind.value, self.run_axis)


def box_dims(box: EndCutBox) -> tuple[int, int]:
    """Semantic (w, h) of a box: w along the repaired run, h across the gap."""
    if box.run_axis == "y":
        return box.rect.height, box.rect.width
    return box.rect.width, box.rect.height


@dataclass(frozen=True)
class EndCutCandidate:
    pair: tuple[int, int]
    boxes: tuple[EndCutBox, ...]

    @property
    def rects(self) -> tuple[Rect, ...]:
        return tuple(b.rect for b in self.boxes)


def _make_edge_edge(rect: Rect, run_axis: str, p: DecompositionParams) -> EndCutBox | None:
    if run_axis == "y":
        run, gap = rect.height, rect.width
    else:
        run, gap = rect.width, rect.height
    if run > p.w_th:
        return None  # a cut cannot repair a facing run longer than the hotspot limit
    if not (p.w_low <= run <= p.w_high):
        return None
    if not (p.h_low <= gap <= p.h_high):
        return None
    return EndCutBox(rect, BoxKind.EDGE_EDGE, run_axis)


def _make_corner(rect: Rect, p: DecompositionParams) -> EndCutBox | None:
    if not (p.w_low <= rect.width <= p.w_high):
        return None
    if not (p.h_low <= rect.height <= p.h_high):
        return None
    return EndCutBox(rect, BoxKind.CORNER_CORNER, "x")


def _parallel_box(e1: Edge, e2: Edge, p: DecompositionParams) -> EndCutBox | None:
    if e1.pos == e2.pos:
        return None
    lo_e, hi_e = (e1, e2) if e1.pos < e2.pos else (e2, e1)
    axis = 0 if e1.orientation == "v" else 1
    if lo_e.normal[axis] != 1 or hi_e.normal[axis] != -1:
        return None  # edges do not face each other across the gap
    ov_lo = max(e1.lo, e2.lo)
    ov_hi = min(e1.hi, e2.hi)
    if ov_hi > ov_lo:
        # spans overlap: the gap strip between two facing edge runs
        if e1.orientation == "v":
            rect = Rect.of(lo_e.pos, ov_lo, hi_e.pos, ov_hi)
            return _make_edge_edge(rect, "y", p)
        rect = Rect.of(ov_lo, lo_e.pos, ov_hi, hi_e.pos)
        return _make_edge_edge(rect, "x", p)
    if ov_hi < ov_lo:
        # spans disjoint: the diagonal pocket between the two nearest corners
        if e1.orientation == "v":
            rect = Rect.of(lo_e.pos, ov_hi, hi_e.pos, ov_lo)
        else:
            rect = Rect.of(ov_hi, lo_e.pos, ov_lo, hi_e.pos)
        return _make_corner(rect, p)
    return None


def _perpendicular_box(ev: Edge, eh: Edge, p: DecompositionParams) -> EndCutBox | None:
    nx = ev.normal[0]
    ny = eh.normal[1]
    a, c = ev.pos, eh.pos
    if nx == 1:
        if eh.lo <= a:
            return None
        x_lo, x_hi = a, eh.lo
    else:
        if eh.hi >= a:
            return None
        x_lo, x_hi = eh.hi, a
    if ny == 1:
        if ev.lo <= c:
            return None
        y_lo, y_hi = c, ev.lo
    else:
        if ev.hi >= c:
            return None
        y_lo, y_hi = ev.hi, c
    return _make_corner(Rect.of(x_lo, y_lo, x_hi, y_hi), p)


def generate_end_cut_box(e1: Edge, e2: Edge, params: DecompositionParams) -> EndCutBox | None:
    """Candidate box between two boundary edges, or None when the pair's
    geometry admits no cut or the box violates the size rules."""
    if e1.orientation == e2.orientation:
        return _parallel_box(e1, e2, params)
    if e1.orientation == "v":
        return _perpendicular_box(e1, e2, params)
    return _perpendicular_box(e2, e1, params)


def resolve_box_overlaps(raw: Sequence[EndCutBox]) -> tuple[EndCutBox, ...]:
    """Thin a pile of candidate boxes for one feature pair.

    Identical rectangles collapse (an edge-to-edge box outranks a corner
    one). Within each group of touching or overlapping boxes, corner boxes
    that touch an edge-to-edge box are dropped as redundant, and boxes that
    still share interior area collapse to the smallest of them.
    """
    by_rect: dict[Rect, EndCutBox] = {}
    for box in sorted(raw, key=EndCutBox.sort_key):
        cur = by_rect.get(box.rect)
        if cur is None or (
            cur.kind is BoxKind.CORNER_CORNER and box.kind is BoxKind.EDGE_EDGE
        ):
            by_rect[box.rect] = box
    boxes = sorted(by_rect.values(), key=EndCutBox.sort_key)
    n = len(boxes)

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if rects_closed_intersect(boxes[i].rect, boxes[j].rect):
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    keep: list[EndCutBox] = []
    for members in groups.values():
        group = [boxes[i] for i in members]
        ee = [b for b in group if b.kind is BoxKind.EDGE_EDGE]
        if ee:
            group = ee + [
                b
                for b in group
                if b.kind is BoxKind.CORNER_CORNER
                and not any(rects_closed_intersect(b.rect, e.rect) for e in ee)
            ]
        # collapse interior-overlapping boxes to the smallest alternative
        m = len(group)
        sub = list(range(m))

        def sfind(i: int) -> int:
            while sub[i] != i:
                sub[i] = sub[sub[i]]
                i = sub[i]
            return i

        for i in range(m):
            for j in range(i + 1, m):
                if rects_interior_intersect(group[i].rect, group[j].rect):
                    sub[sfind(i)] = sfind(j)
        clusters: dict[int, list[EndCutBox]] = {}
        for i in range(m):
            clusters.setdefault(sfind(i), []).append(group[i])
        for cluster in clusters.values():
            keep.append(min(cluster, key=lambda b: (b.rect.area, b.sort_key())))
    return tuple(sorted(keep, key=EndCutBox.sort_key))


def _box_clear(
    rect: Rect,
    index: SpatialIndex,
    shapes_by_id: Mapping[int, RectilinearShape],
) -> bool:
    """A box is usable only when no feature material lies inside it;
    touching its boundary is fine."""
    for sid in index.query(rect):
        for r in shapes_by_id[sid].rects:
            if rects_interior_intersect(rect, r):
                return False
    return True


def generate_end_cut(
    s1: RectilinearShape,
    s2: RectilinearShape,
    params: DecompositionParams,
    index: SpatialIndex,
    shapes_by_id: Mapping[int, RectilinearShape],
) -> EndCutCandidate | None:
    raw: list[EndCutBox] = []
    for e1 in s1.edges:
        for e2 in s2.edges:
            box = generate_end_cut_box(e1, e2, params)
            if box is not None and _box_clear(box.rect, index, shapes_by_id):
                raw.append(box)
    if not raw:
        return None
    pair = (min(s1.id, s2.id), max(s1.id, s2.id))
    return EndCutCandidate(pair=pair, boxes=resolve_box_overlaps(raw))


def generate_all_end_cuts(
    doc: LayoutDocument,
    pairs: Iterable[tuple[int, int]],
    index: SpatialIndex,
) -> dict[tuple[int, int], EndCutCandidate]:
    shapes_by_id = {s.id: s for s in doc.shapes}
    cuts: dict[tuple[int, int], EndCutCandidate] = {}
    for a, b in sorted(pairs):
        cand = generate_end_cut(shapes_by_id[a], shapes_by_id[b], doc.params, index, shapes_by_id)
        if cand is not None:
            cuts[cand.pair] = cand
    return cuts


def merge_union(a: Rect, b: Rect, params: DecompositionParams) -> Rect | None:
    """Union of two cut rectangles when they can print as one trim shape:
    one contains the other, or they are aligned and touch or overlap and
    the combined run stays within the width cap."""
    if a.lo.x <= b.lo.x and a.lo.y <= b.lo.y and a.hi.x >= b.hi.x and a.hi.y >= b.hi.y:
        return a
    if b.lo.x <= a.lo.x and b.lo.y <= a.lo.y and b.hi.x >= a.hi.x and b.hi.y >= a.hi.y:
        return b
    if a.lo.y == b.lo.y and a.hi.y == b.hi.y:
        if interval_gap(a.lo.x, a.hi.x, b.lo.x, b.hi.x) == 0:
            u = Rect.of(min(a.lo.x, b.lo.x), a.lo.y, max(a.hi.x, b.hi.x), a.hi.y)
            return u if u.width <= params.w_high else None
    if a.lo.x == b.lo.x and a.hi.x == b.hi.x:
        if interval_gap(a.lo.y, a.hi.y, b.lo.y, b.hi.y) == 0:
            u = Rect.of(a.lo.x, min(a.lo.y, b.lo.y), a.hi.x, max(a.hi.y, b.hi.y))
            return u if u.height <= params.w_high else None
    return None


def mergeable_pair(a: EndCutCandidate, b: EndCutCandidate, params: DecompositionParams) -> bool:
    return any(
        merge_union(ra, rb, params) is not None for ra in a.rects for rb in b.rects
    )


def merged_cut_rects(
    selected: Iterable[EndCutCandidate], params: DecompositionParams
) -> tuple[Rect, ...]:
    """Final trim-mask geometry for the selected cuts, with touching
    aligned rectangles fused so each printed shape appears once."""
    rects = sorted({b.rect for c in selected for b in c.boxes})
    changed = True
    while changed:
        changed = False
        out: list[Rect] = []
        for r in rects:
            for k, q in enumerate(out):
                u = merge_union(q, r, params)
                if u is not None:
                    out[k] = u
                    changed = True
                    break
            else:
                out.append(r)
        rects = sorted(set(out))
    return tuple(rects)
