"""Planar set models: polygonal sets with holes and binary pixel grids.

A :class:`PlanarSet` is a union of simple polygons with polygonal holes,
stored as oriented closed rings (outer counterclockwise, holes clockwise).
A :class:`PixelSet` is a binary occupancy grid with cell side ``h`` kept
strictly inside a one-cell empty frame margin.  Both expose perimeter,
area, component and hole structure; conversions between the two and the
symmetric-difference metric live here as well.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
import shapely
import shapely.geometry as sgeom
from shapely.geometry.polygon import orient as shapely_orient
from shapely.ops import unary_union
from scipy import ndimage

from . import geometry as g
from .errors import ValidationError

_CONN4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class Ring:
    points: tuple
    kind: str  # 'outer' | 'hole'
    parent: int | None = None

    def length(self) -> float:
        return g.ring_length(self.points)

    def signed_area(self):
        return g.signed_area(self.points)

    def reversed_points(self):
        return tuple(reversed(self.points))

    def bbox(self):
        xs = [float(p[0]) for p in self.points]
        ys = [float(p[1]) for p in self.points]
        return min(xs), min(ys), max(xs), max(ys)


class PlanarSet:
    """Union of simple polygons with holes, as an oriented ring list."""

    def __init__(self, rings, check: str = "full"):
        self.rings = tuple(self._normalize(r) for r in rings)
        self._container = None
        self._depths = None
        if check != "none":
            self._validate(full=(check == "full"))

    @staticmethod
    def _normalize(ring) -> Ring:
        if not isinstance(ring, Ring):
            ring = Ring(tuple(tuple(p) for p in ring[0]), ring[1], ring[2] if len(ring) > 2 else None)
        pts = tuple(tuple(p) for p in ring.points)
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise ValidationError("ring_too_short", f"ring needs >= 3 vertices, got {len(pts)}")
        if ring.kind not in ("outer", "hole"):
            raise ValidationError("ring_kind", f"unknown ring kind {ring.kind!r}")
        area = g.signed_area(pts)
        want_ccw = ring.kind == "outer"
        if (area > 0) != want_ccw:
            pts = tuple(reversed(pts))
        return Ring(pts, ring.kind, ring.parent)

    @classmethod
    def empty(cls) -> "PlanarSet":
        return cls((), check="none")

    @classmethod
    def from_json_dict(cls, d, check: str = "full") -> "PlanarSet":
        rings = []
        for r in d.get("rings", []):
            rings.append(Ring(tuple(tuple(p) for p in r["points"]), r["kind"], r.get("parent")))
        return cls(rings, check=check)

    def to_json_dict(self) -> dict:
        self._nesting()
        out = []
        for i, r in enumerate(self.rings):
            parent = self._container[i] if r.kind == "hole" else None
            out.append({"points": [[float(x), float(y)] for x, y in r.points],
                        "kind": r.kind, "parent": parent})
        return {"rings": out}

    # -- structure ---------------------------------------------------------

    def _nesting(self):
        """Immediate container index per ring (None for top level) and depths."""
        if self._container is not None:
            return self._container, self._depths
        n = len(self.rings)
        inside = [[False] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i != j:
                    inside[i][j] = g.ring_witness_inside(self.rings[i].points, self.rings[j].points)
        container = [None] * n
        depths = [0] * n
        for i in range(n):
            anc = [j for j in range(n) if inside[i][j]]
            depths[i] = len(anc)
            if anc:
                # immediate container: the ancestor contained in all other ancestors
                best = anc[0]
                for j in anc[1:]:
                    if inside[j][best]:
                        best = j
                container[i] = best
        self._container = container
        self._depths = depths
        return container, depths

    def _validate(self, full: bool):
        for i, r in enumerate(self.rings):
            if full and not g.ring_is_simple(r.points):
                raise ValidationError("ring_not_simple", f"ring {i} self-intersects", ring=i)
        if full:
            for i in range(len(self.rings)):
                for j in range(i + 1, len(self.rings)):
                    bi, bj = self.rings[i].bbox(), self.rings[j].bbox()
                    if bi[2] < bj[0] or bj[2] < bi[0] or bi[3] < bj[1] or bj[3] < bi[1]:
                        continue
                    if not g.rings_disjoint_interiors(self.rings[i].points, self.rings[j].points):
                        raise ValidationError("rings_overlap",
                                              f"rings {i} and {j} cross or share an edge",
                                              rings=(i, j))
        container, depths = self._nesting()
        for i, r in enumerate(self.rings):
            want_hole = depths[i] % 2 == 1
            if want_hole != (r.kind == "hole"):
                pair = (i, container[i]) if container[i] is not None else (i,)
                raise ValidationError("nesting_parity",
                                      f"ring {i} declared {r.kind!r} sits at nesting depth "
                                      f"{depths[i]}", rings=pair)
            if r.kind == "hole":
                c = container[i]
                if c is None or self.rings[c].kind != "outer":
                    raise ValidationError("hole_outside",
                                          f"hole ring {i} has no containing outer ring", ring=i)
                if r.parent is not None and r.parent != c:
                    raise ValidationError("parent_mismatch",
                                          f"hole ring {i} declares parent {r.parent} but lies "
                                          f"inside ring {c}", rings=(i, c))

    # -- measures ----------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.rings

    def perimeter(self) -> float:
        return math.fsum(r.length() for r in self.rings)

    def perimeter_sq_terms(self):
        """All squared edge lengths (exact Fractions), for exact-arithmetic checks."""
        out = []
        for r in self.rings:
            out.extend(g.ring_length_sq_terms(r.points))
        return sorted(out)

    def area(self) -> float:
        return float(math.fsum(float(r.signed_area()) for r in self.rings))

    def bbox(self):
        if not self.rings:
            return (0.0, 0.0, 0.0, 0.0)
        boxes = [r.bbox() for r in self.rings]
        return (min(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), max(b[3] for b in boxes))

    def all_points(self):
        for r in self.rings:
            yield from r.points

    def diameter(self) -> float:
        return g.diameter(list(self.all_points()))

    def scaled(self, lam: float) -> "PlanarSet":
        rings = [Ring(tuple((x * lam, y * lam) for x, y in r.points), r.kind, r.parent)
                 for r in self.rings]
        return PlanarSet(rings, check="light")

    def contains_point(self, pt) -> bool:
        """Parity over all rings; boundary points count as inside."""
        crossings = 0
        for r in self.rings:
            if g.point_on_ring(pt, r.points):
                return True
            if g.point_in_ring(pt, r.points):
                crossings += 1
        return crossings % 2 == 1

    # -- component structure -------------------------------------------------

    def components(self) -> "ComponentList":
        container, depths = self._nesting()
        comps = []
        holes_of = []
        order = sorted((i for i, r in enumerate(self.rings) if r.kind == "outer"),
                       key=lambda i: min((float(p[0]), float(p[1])) for p in self.rings[i].points))
        for i in order:
            child_holes = [j for j, r in enumerate(self.rings)
                           if r.kind == "hole" and container[j] == i]
            rings = [Ring(self.rings[i].points, "outer", None)]
            rings += [Ring(self.rings[j].points, "hole", 0) for j in child_holes]
            comps.append(PlanarSet(rings, check="light"))
            holes_of.append([PlanarSet([Ring(self.rings[j].reversed_points(), "outer", None)],
                                       check="light") for j in child_holes])
        out = ComponentList(comps, holes_of, exterior_marker=None)
        total = self.perimeter()
        parts = math.fsum(c.perimeter() for c in comps)
        if abs(parts - total) > 1e-9 * max(1.0, total):
            raise AssertionError("component perimeters fail to sum to the total")
        return out

    def holes(self):
        """Hole regions of an indecomposable set, each as a full simple polygon."""
        comps = self.components()
        if len(comps.components) != 1:
            raise ValidationError("not_indecomposable",
                                  "holes() is defined per component; call components() first")
        return comps.holes_of[0]

    def saturate(self) -> "PlanarSet":
        container, depths = self._nesting()
        rings = [Ring(r.points, "outer", None)
                 for i, r in enumerate(self.rings) if depths[i] == 0]
        return PlanarSet(rings, check="light")


@dataclass
class ComponentList:
    components: list
    holes_of: list
    exterior_marker: object = None


def perimeter(s) -> float:
    """Boundary length: ring-length sum for polygons, h x exposed edges for grids."""
    return s.perimeter()


def area(s) -> float:
    return s.area()


def components(s) -> ComponentList:
    return s.components()


def saturate(s):
    return s.saturate()


def holes(component):
    return component.holes()


def exterior_of(s: PlanarSet, frame) -> PlanarSet:
    """Unbounded complement component clipped to `frame` (a PlanarSet or bbox tuple)."""
    frame_ring = _frame_ring(frame)
    sat = s.saturate()
    for r in sat.rings:
        if not g.ring_witness_inside(r.points, frame_ring):
            raise ValidationError("frame_too_small", "set is not strictly inside the frame")
    rings = [Ring(frame_ring, "outer", None)]
    rings += [Ring(r.reversed_points(), "hole", 0) for r in sat.rings]
    return PlanarSet(rings, check="light")


def complement_regions(s: PlanarSet, frame) -> list:
    """Bounded complement components plus the exterior, clipped to `frame`.

    One region per hole ring: its interior minus any islands immediately
    inside it.  The exterior region comes last.
    """
    container, depths = s._nesting()
    regions = []
    hole_order = sorted((i for i, r in enumerate(s.rings) if r.kind == "hole"),
                        key=lambda i: min((float(p[0]), float(p[1])) for p in s.rings[i].points))
    for i in hole_order:
        rings = [Ring(s.rings[i].reversed_points(), "outer", None)]
        for j, r in enumerate(s.rings):
            if r.kind == "outer" and container[j] == i:
                rings.append(Ring(r.reversed_points(), "hole", 0))
        regions.append(PlanarSet(rings, check="light"))
    regions.append(exterior_of(s, frame))
    return regions


def _frame_ring(frame):
    if isinstance(frame, PlanarSet):
        if len(frame.rings) != 1 or frame.rings[0].kind != "outer":
            raise ValidationError("bad_frame", "frame must be a single outer ring")
        return frame.rings[0].points
    x0, y0, x1, y1 = frame
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


# -- shapely bridge ----------------------------------------------------------


def to_shapely(s: PlanarSet):
    if s.is_empty():
        return sgeom.Polygon()
    container, _ = s._nesting()
    polys = []
    for i, r in enumerate(s.rings):
        if r.kind != "outer":
            continue
        shell = [(float(x), float(y)) for x, y in r.points]
        holes = [[(float(x), float(y)) for x, y in s.rings[j].points]
                 for j, rr in enumerate(s.rings) if rr.kind == "hole" and container[j] == i]
        polys.append(sgeom.Polygon(shell, holes))
    return sgeom.MultiPolygon(polys) if len(polys) > 1 else polys[0]


def from_shapely(geom, min_area: float = 0.0) -> PlanarSet:
    """Build a PlanarSet from a shapely polygonal geometry (coordinates snapped
    is the caller's business; output gets light validation only)."""
    rings = []
    geoms = []
    if geom.is_empty:
        return PlanarSet.empty()
    if geom.geom_type == "Polygon":
        geoms = [geom]
    elif geom.geom_type in ("MultiPolygon", "GeometryCollection"):
        geoms = [p for p in geom.geoms if p.geom_type == "Polygon" and not p.is_empty]
    else:
        raise ValidationError("not_polygonal", f"cannot build a set from {geom.geom_type}")
    for poly in geoms:
        if min_area and poly.area < min_area:
            continue
        poly = shapely_orient(poly, 1.0)
        outer_idx = len(rings)
        rings.append(Ring(tuple(poly.exterior.coords[:-1]), "outer", None))
        for interior in poly.interiors:
            rings.append(Ring(tuple(interior.coords[:-1]), "hole", outer_idx))
    return PlanarSet(rings, check="light")


def thicken(tree, eps: float, chord_degrees: float = 5.0) -> PlanarSet:
    """Polygonal eps-neighborhood of a tree (capsules around its segments).

    Arcs are discretized by chords subtending at most `chord_degrees`, which
    keeps the boundary-length error of each cap below 0.2 percent.
    """
    if eps <= 0:
        raise ValidationError("bad_eps", f"thickening radius must be positive, got {eps}")
    segments, isolated = _tree_geometry(tree)
    if not segments and not isolated:
        return PlanarSet.empty()
    quad_segs = max(1, int(math.ceil(90.0 / chord_degrees)))
    parts = [sgeom.LineString([a, b]).buffer(eps, quad_segs=quad_segs) for a, b in segments]
    parts += [sgeom.Point(p).buffer(eps, quad_segs=quad_segs) for p in isolated]
    return from_shapely(unary_union(parts))


def _tree_geometry(tree):
    """Extract ((segments), (isolated vertices)) from a tree-like object."""
    if hasattr(tree, "segments"):
        segs = [((float(a[0]), float(a[1])), (float(b[0]), float(b[1])))
                for a, b in tree.segments()]
        isolated = [(float(p[0]), float(p[1])) for p in getattr(tree, "isolated_points", lambda: [])()]
        return segs, isolated
    segs = []
    isolated = []
    for item in tree:
        item = tuple(item)
        if len(item) == 2 and not isinstance(item[0], (int, float)):
            segs.append(((float(item[0][0]), float(item[0][1])),
                         (float(item[1][0]), float(item[1][1]))))
        else:
            isolated.append((float(item[0]), float(item[1])))
    return segs, isolated


# -- pixel sets ---------------------------------------------------------------


class PixelSet:
    """Binary occupancy grid; cell (ix, iy) covers
    [origin_x + ix*h, origin_x + (ix+1)*h] x [origin_y + iy*h, ...].

    Row 0 of the occupancy array is the bottom row.  The occupied region must
    stay off the one-cell frame margin.
    """

    def __init__(self, occupancy, h: float, origin=(0.0, 0.0), check: bool = True):
        arr = np.ascontiguousarray(np.asarray(occupancy, dtype=bool))
        if arr.ndim != 2:
            raise ValidationError("bad_grid", "occupancy must be 2-d")
        arr.setflags(write=False)
        self.occupancy = arr
        self.h = float(h)
        self.origin = (float(origin[0]), float(origin[1]))
        if self.h <= 0:
            raise ValidationError("bad_cell_size", f"cell size must be positive, got {h}")
        if check and arr.size and (arr[0, :].any() or arr[-1, :].any()
                                   or arr[:, 0].any() or arr[:, -1].any()):
            raise ValidationError("margin", "occupied cells touch the grid frame margin")

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    def __eq__(self, other):
        return (isinstance(other, PixelSet) and self.h == other.h
                and self.origin == other.origin
                and self.occupancy.shape == other.occupancy.shape
                and bool(np.array_equal(self.occupancy, other.occupancy)))

    def is_empty(self) -> bool:
        return not bool(self.occupancy.any())

    def count(self) -> int:
        return int(self.occupancy.sum())

    def area(self) -> float:
        return self.count() * self.h * self.h

    def exposed_edges(self) -> int:
        occ = self.occupancy
        pad = np.zeros((occ.shape[0] + 2, occ.shape[1] + 2), dtype=bool)
        pad[1:-1, 1:-1] = occ
        inner = pad[1:-1, 1:-1]
        n = 0
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            n += int((inner & ~pad[1 + dy:pad.shape[0] - 1 + dy, 1 + dx:pad.shape[1] - 1 + dx]).sum())
        return n

    def perimeter(self) -> float:
        return self.h * self.exposed_edges()

    def centers(self) -> np.ndarray:
        iy, ix = np.nonzero(self.occupancy)
        return np.column_stack([self.origin[0] + (ix + 0.5) * self.h,
                                self.origin[1] + (iy + 0.5) * self.h])

    def with_occupancy(self, occ) -> "PixelSet":
        return PixelSet(occ, self.h, self.origin)

    def components(self) -> ComponentList:
        labels, n = ndimage.label(self.occupancy, structure=_CONN4)
        comps = []
        holes_of = []
        order = _component_order(labels, n)
        for lab in order:
            mask = labels == lab
            comp = PixelSet(mask, self.h, self.origin, check=False)
            holes_of.append(_pixel_holes(comp))
            comps.append(comp)
        return ComponentList(comps, holes_of, exterior_marker=_exterior_label(self.occupancy))

    def holes(self):
        comps = self.components()
        if len(comps.components) != 1:
            raise ValidationError("not_indecomposable",
                                  "holes() is defined per component; call components() first")
        return comps.holes_of[0]

    def saturate(self) -> "PixelSet":
        return self.with_occupancy(ndimage.binary_fill_holes(self.occupancy, structure=_CONN4))

    def diameter(self) -> float:
        pts = self.centers()
        if len(pts) == 0:
            return 0.0
        return g.diameter([tuple(p) for p in pts])

    def to_conngrid(self) -> str:
        buf = io.StringIO()
        buf.write(f"CONNGRID {self.width} {self.height} {self.h!r}\n")
        for iy in range(self.height - 1, -1, -1):  # top row first
            buf.write("".join("1" if v else "0" for v in self.occupancy[iy]))
            buf.write("\n")
        return buf.getvalue()

    @classmethod
    def from_conngrid(cls, text: str) -> "PixelSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if len(head) != 4 or head[0] != "CONNGRID":
            raise ValidationError("bad_conngrid", "expected header 'CONNGRID w h h_value'")
        w, hgt, hval = int(head[1]), int(head[2]), float(head[3])
        rows = lines[1:]
        if len(rows) != hgt or any(len(r) != w for r in rows):
            raise ValidationError("bad_conngrid", "grid body does not match declared size")
        occ = np.array([[c == "1" for c in row] for row in reversed(rows)], dtype=bool)
        return cls(occ, hval)


def _component_order(labels, n):
    """Deterministic order: by lowest (x, y) of each component's cell set."""
    keys = []
    for lab in range(1, n + 1):
        iy, ix = np.nonzero(labels == lab)
        i = np.lexsort((iy, ix))[0]
        keys.append(((int(ix[i]), int(iy[i])), lab))
    return [lab for _, lab in sorted(keys)]


def _exterior_label(occ):
    inv_labels, _ = ndimage.label(~occ, structure=_CONN4)
    return int(inv_labels[0, 0]) if inv_labels.size else 0


def _pixel_holes(comp: PixelSet):
    inv = ~comp.occupancy
    labels, n = ndimage.label(inv, structure=_CONN4)
    ext = labels[0, 0]
    out = []
    for lab in _component_order(labels, n):
        if lab == ext:
            continue
        out.append(PixelSet(labels == lab, comp.h, comp.origin, check=False))
    return out


def rasterize(s: PlanarSet, h: float, margin: int = 1) -> PixelSet:
    """Occupancy by the cell-center rule on a lattice-aligned grid around s."""
    if h <= 0:
        raise ValidationError("bad_cell_size", f"cell size must be positive, got {h}")
    if s.is_empty():
        occ = np.zeros((2 * margin + 1, 2 * margin + 1), dtype=bool)
        return PixelSet(occ, h, (0.0, 0.0))
    x0, y0, x1, y1 = s.bbox()
    ix0 = math.floor(x0 / h) - margin
    iy0 = math.floor(y0 / h) - margin
    ix1 = math.ceil(x1 / h) + margin
    iy1 = math.ceil(y1 / h) + margin
    w, hgt = ix1 - ix0, iy1 - iy0
    xs = (np.arange(w) + ix0 + 0.5) * h
    ys = (np.arange(hgt) + iy0 + 0.5) * h
    X, Y = np.meshgrid(xs, ys)
    geom = to_shapely(s)
    occ = shapely.contains_xy(geom, X.ravel(), Y.ravel()).reshape(hgt, w)
    return PixelSet(occ, h, (ix0 * h, iy0 * h))


def symmetric_difference_area(a, b, h: float | None = None) -> float:
    """|a Δ b|: exact XOR count for same-grid pixel sets, by rasterization at
    the stated h for polygon pairs."""
    if isinstance(a, PixelSet) and isinstance(b, PixelSet):
        if (a.h != b.h or a.origin != b.origin
                or a.occupancy.shape != b.occupancy.shape):
            raise ValidationError("grid_mismatch",
                                  "pixel symmetric difference needs a shared grid")
        return int((a.occupancy ^ b.occupancy).sum()) * a.h * a.h
    if isinstance(a, PlanarSet) and isinstance(b, PlanarSet):
        if h is None:
            raise ValidationError("missing_h", "polygon symmetric difference needs a cell size h")
        box = _union_bbox(a, b)
        ga = _rasterize_on(a, h, box)
        gb = _rasterize_on(b, h, box)
        return int((ga ^ gb).sum()) * h * h
    raise ValidationError("type_mismatch", "operands must both be PlanarSet or both PixelSet")


def _union_bbox(a: PlanarSet, b: PlanarSet):
    if a.is_empty():
        return b.bbox()
    if b.is_empty():
        return a.bbox()
    ax0, ay0, ax1, ay1 = a.bbox()
    bx0, by0, bx1, by1 = b.bbox()
    return min(ax0, bx0), min(ay0, by0), max(ax1, bx1), max(ay1, by1)


def _rasterize_on(s: PlanarSet, h: float, box) -> np.ndarray:
    x0, y0, x1, y1 = box
    ix0 = math.floor(x0 / h) - 1
    iy0 = math.floor(y0 / h) - 1
    w = math.ceil(x1 / h) + 1 - ix0
    hgt = math.ceil(y1 / h) + 1 - iy0
    if s.is_empty():
        return np.zeros((hgt, w), dtype=bool)
    xs = (np.arange(w) + ix0 + 0.5) * h
    ys = (np.arange(hgt) + iy0 + 0.5) * h
    X, Y = np.meshgrid(xs, ys)
    return shapely.contains_xy(to_shapely(s), X.ravel(), Y.ravel()).reshape(hgt, w)


def sym_diff_area_exact(a: PlanarSet, b: PlanarSet) -> float:
    """Exact polygonal |a Δ b| (internal metric for convergence checks)."""
    return to_shapely(a).symmetric_difference(to_shapely(b)).area if not (a.is_empty() and b.is_empty()) else 0.0
