"""Integer rectilinear geometry kernel.

Everything in this module works on integer nanometer coordinates and every
predicate is exact. Floating point never enters the picture; the Euclidean
distance mode compares squared gaps against a squared threshold.

Distance between two disjoint rectilinear shapes is defined as the smallest,
over all pairs of constituent rectangles, of max(horizontal gap, vertical
gap). Two rectangles that overlap or touch in an axis have gap 0 in that
axis, so touching shapes are at distance 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence


class GeometryError(ValueError):
    """Invalid geometric input."""


class OverlappingInputShapes(GeometryError):
    """Two input shapes share interior area; the layout is malformed."""


class Metric(enum.Enum):
    CHEBYSHEV = "chebyshev"
    EUCLIDEAN = "euclidean"


class OverlapKind(enum.Enum):
    NONE = "none"
    TYPE1 = "type1"  # closures intersect, interiors stay disjoint
    TYPE2 = "type2"  # interiors intersect


@dataclass(frozen=True, order=True)
class Point:
    x: int
    y: int

    def __post_init__(self) -> None:
        if not isinstance(self.x, int) or not isinstance(self.y, int):
            raise GeometryError(f"point coordinates must be integers: ({self.x}, {self.y})")


@dataclass(frozen=True, order=True)
class Rect:
    """Axis-aligned rectangle with positive area.

    lo is the lower-left corner, hi the upper-right one. Zero-width or
    inverted rectangles are rejected at construction time.
    """

    lo: Point
    hi: Point

    def __post_init__(self) -> None:
        if self.lo.x >= self.hi.x or self.lo.y >= self.hi.y:
            raise GeometryError(f"rectangle has no area: {self.lo} .. {self.hi}")

    @classmethod
    def of(cls, x1: int, y1: int, x2: int, y2: int) -> "Rect":
        return cls(Point(x1, y1), Point(x2, y2))

    @property
    def width(self) -> int:
        return self.hi.x - self.lo.x

    @property
    def height(self) -> int:
        return self.hi.y - self.lo.y

    @property
    def area(self) -> int:
        return self.width * self.height

    def inflate(self, d: int) -> "Rect":
        return Rect(Point(self.lo.x - d, self.lo.y - d), Point(self.hi.x + d, self.hi.y + d))

    def corners(self) -> tuple[Point, Point, Point, Point]:
        return (
            Point(self.lo.x, self.lo.y),
            Point(self.hi.x, self.lo.y),
            Point(self.hi.x, self.hi.y),
            Point(self.lo.x, self.hi.y),
        )


def interval_gap(a_lo: int, a_hi: int, b_lo: int, b_hi: int) -> int:
    """Gap between two closed intervals; 0 when they overlap or touch."""
    if b_lo > a_hi:
        return b_lo - a_hi
    if a_lo > b_hi:
        return a_lo - b_hi
    return 0


def rect_gaps(a: Rect, b: Rect) -> tuple[int, int]:
    gx = interval_gap(a.lo.x, a.hi.x, b.lo.x, b.hi.x)
    gy = interval_gap(a.lo.y, a.hi.y, b.lo.y, b.hi.y)
    return gx, gy


def rect_chebyshev_gap(a: Rect, b: Rect) -> int:
    gx, gy = rect_gaps(a, b)
    return max(gx, gy)


def rects_interior_intersect(a: Rect, b: Rect) -> bool:
    return (
        a.lo.x < b.hi.x
        and b.lo.x < a.hi.x
        and a.lo.y < b.hi.y
        and b.lo.y < a.hi.y
    )


def rects_closed_intersect(a: Rect, b: Rect) -> bool:
    return (
        a.lo.x <= b.hi.x
        and b.lo.x <= a.hi.x
        and a.lo.y <= b.hi.y
        and b.lo.y <= a.hi.y
    )


def rect_overlap_kind(a: Rect, b: Rect) -> OverlapKind:
    """Classify how two rectangles overlap.

    TYPE2 means shared interior area, TYPE1 means they only touch along an
    edge or at a corner, NONE means fully disjoint closures.
    """
    if rects_interior_intersect(a, b):
        return OverlapKind.TYPE2
    if rects_closed_intersect(a, b):
        return OverlapKind.TYPE1
    return OverlapKind.NONE


@dataclass(frozen=True)
class Edge:
    """Directed boundary edge of a shape outline.

    The edge runs from a to b with the shape interior on its left, so the
    outward normal is the left-to-right direction rotated clockwise.
    """

    a: Point
    b: Point
    normal: tuple[int, int]

    @property
    def orientation(self) -> str:
        return "h" if self.a.y == self.b.y else "v"

    @property
    def pos(self) -> int:
        """Coordinate of the axis the edge lies on."""
        return self.a.y if self.orientation == "h" else self.a.x

    @property
    def lo(self) -> int:
        if self.orientation == "h":
            return min(self.a.x, self.b.x)
        return min(self.a.y, self.b.y)

    @property
    def hi(self) -> int:
        if self.orientation == "h":
            return max(self.a.x, self.b.x)
        return max(self.a.y, self.b.y)

    @property
    def length(self) -> int:
        return self.hi - self.lo


def _normalize_outline(points: Sequence[Point]) -> list[Point]:
    """Drop a repeated closing point, merge collinear runs, reject spikes."""
    pts = list(points)
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts.pop()
    if len(pts) < 4:
        raise GeometryError("outline needs at least 4 distinct vertices")

    for p, q in zip(pts, pts[1:] + pts[:1]):
        if p == q:
            raise GeometryError("outline repeats a vertex consecutively")
        if p.x != q.x and p.y != q.y:
            raise GeometryError(f"outline move {p} -> {q} is not axis-aligned")

    def direction(p: Point, q: Point) -> tuple[int, int]:
        dx = (q.x > p.x) - (q.x < p.x)
        dy = (q.y > p.y) - (q.y < p.y)
        return dx, dy

    merged: list[Point] = []
    n = len(pts)
    for i, p in enumerate(pts):
        prev = pts[i - 1]
        nxt = pts[(i + 1) % n]
        d_in = direction(prev, p)
        d_out = direction(p, nxt)
        if d_in == d_out:
            continue  # collinear, vertex is redundant
        if d_in == (-d_out[0], -d_out[1]):
            raise GeometryError(f"outline doubles back at {p}")
        merged.append(p)
    if len(merged) < 4 or len(merged) % 2 != 0:
        raise GeometryError("outline does not describe a rectilinear polygon")
    return merged


def _signed_area2(pts: Sequence[Point]) -> int:
    total = 0
    for p, q in zip(pts, list(pts[1:]) + [pts[0]]):
        total += p.x * q.y - q.x * p.y
    return total


def _check_simple(pts: Sequence[Point]) -> None:
    """Reject outlines whose boundary touches or crosses itself."""
    n = len(pts)
    segs = []
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        segs.append((min(p.x, q.x), min(p.y, q.y), max(p.x, q.x), max(p.y, q.y)))
    if len(set(pts)) != n:
        raise GeometryError("outline revisits a vertex")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            a = segs[i]
            b = segs[j]
            if a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]:
                raise GeometryError("outline self-intersects")


def _decompose_outline(pts: Sequence[Point]) -> tuple[Rect, ...]:
    """Slice a simple rectilinear polygon into horizontal slabs of rectangles."""
    ys = sorted({p.y for p in pts})
    verticals = []
    n = len(pts)
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        if p.x == q.x:
            verticals.append((p.x, min(p.y, q.y), max(p.y, q.y)))
    rects: list[Rect] = []
    for y0, y1 in zip(ys, ys[1:]):
        xs = sorted(x for x, vlo, vhi in verticals if vlo <= y0 and vhi >= y1)
        if len(xs) % 2 != 0:
            raise GeometryError("outline is not a valid simple polygon")
        for k in range(0, len(xs), 2):
            rects.append(Rect.of(xs[k], y0, xs[k + 1], y1))
    if not rects:
        raise GeometryError("outline encloses no area")
    return tuple(sorted(rects))


@dataclass(frozen=True)
class RectilinearShape:
    """A layout feature: a simple rectilinear polygon.

    Stored as the counter-clockwise outline plus a slab decomposition into
    axis-aligned rectangles whose union is exactly the polygon. Boundary
    edges carry outward normals and are derived straight from the outline.
    """

    id: int
    rects: tuple[Rect, ...]
    outline: tuple[Point, ...]
    edges: tuple[Edge, ...]

    @classmethod
    def from_outline(cls, sid: int, points: Iterable[tuple[int, int] | Point]) -> "RectilinearShape":
        pts = [p if isinstance(p, Point) else Point(p[0], p[1]) for p in points]
        pts = _normalize_outline(pts)
        if _signed_area2(pts) < 0:
            pts.reverse()
        _check_simple(pts)
        rects = _decompose_outline(pts)
        edges = []
        n = len(pts)
        for i in range(n):
            p, q = pts[i], pts[(i + 1) % n]
            dx = (q.x > p.x) - (q.x < p.x)
            dy = (q.y > p.y) - (q.y < p.y)
            edges.append(Edge(p, q, (dy, -dx)))
        return cls(sid, rects, tuple(pts), tuple(edges))

    @classmethod
    def from_rect(cls, sid: int, rect: Rect) -> "RectilinearShape":
        return cls.from_outline(sid, rect.corners())

    @property
    def bbox(self) -> Rect:
        return bounding_box(self.rects)

    @property
    def min_dimension(self) -> int:
        return min(min(r.width, r.height) for r in self.rects)

    def __repr__(self) -> str:  # keep noise down in test failures
        return f"RectilinearShape(id={self.id}, rects={len(self.rects)})"


def bounding_box(rects: Sequence[Rect]) -> Rect:
    if not rects:
        raise GeometryError("bounding box of nothing")
    return Rect(
        Point(min(r.lo.x for r in rects), min(r.lo.y for r in rects)),
        Point(max(r.hi.x for r in rects), max(r.hi.y for r in rects)),
    )


def rectset_chebyshev_gap(a: Sequence[Rect], b: Sequence[Rect]) -> int:
    return min(rect_chebyshev_gap(ra, rb) for ra in a for rb in b)


def rectset_within(a: Sequence[Rect], b: Sequence[Rect], d: int, metric: Metric = Metric.CHEBYSHEV) -> bool:
    """Exact test for distance(a, b) <= d under the chosen metric."""
    if metric is Metric.CHEBYSHEV:
        for ra in a:
            for rb in b:
                if rect_chebyshev_gap(ra, rb) <= d:
                    return True
        return False
    dd = d * d
    for ra in a:
        for rb in b:
            gx, gy = rect_gaps(ra, rb)
            if gx * gx + gy * gy <= dd:
                return True
    return False


def shape_distance(a: RectilinearShape, b: RectilinearShape) -> int:
    """Distance between two disjoint shapes; raises if their interiors overlap."""
    best: int | None = None
    for ra in a.rects:
        for rb in b.rects:
            if rects_interior_intersect(ra, rb):
                raise OverlappingInputShapes(f"shapes {a.id} and {b.id} overlap")
            g = rect_chebyshev_gap(ra, rb)
            if best is None or g < best:
                best = g
    assert best is not None
    return best


def shapes_within(a: RectilinearShape, b: RectilinearShape, d: int, metric: Metric = Metric.CHEBYSHEV) -> bool:
    return rectset_within(a.rects, b.rects, d, metric)


class SpatialIndex:
    """Uniform grid over shape bounding boxes.

    query() returns a superset of the ids whose shapes can lie within the
    given distance of the probe rectangle; callers must re-check exactly.
    """

    def __init__(self, cell_size: int):
        if cell_size <= 0:
            raise GeometryError("cell size must be positive")
        self.cell_size = cell_size
        self._cells: dict[tuple[int, int], list[int]] = {}
        self._count = 0

    @classmethod
    def from_shapes(cls, shapes: Iterable[RectilinearShape], cell_size: int) -> "SpatialIndex":
        idx = cls(cell_size)
        for s in shapes:
            idx.insert(s.id, s.bbox)
        return idx

    def __len__(self) -> int:
        return self._count

    def _cell_span(self, lo: int, hi: int) -> range:
        return range(lo // self.cell_size, hi // self.cell_size + 1)

    def insert(self, sid: int, bbox: Rect) -> None:
        for cx in self._cell_span(bbox.lo.x, bbox.hi.x):
            for cy in self._cell_span(bbox.lo.y, bbox.hi.y):
                self._cells.setdefault((cx, cy), []).append(sid)
        self._count += 1

    def query(self, rect: Rect, distance: int = 0) -> set[int]:
        found: set[int] = set()
        for cx in self._cell_span(rect.lo.x - distance, rect.hi.x + distance):
            for cy in self._cell_span(rect.lo.y - distance, rect.hi.y + distance):
                bucket = self._cells.get((cx, cy))
                if bucket:
                    found.update(bucket)
        return found
