"""Low-level planar primitives: exact predicates, ring measures, projections.

Coordinates are plain ``(x, y)`` tuples.  Entries may be ``float``,
``int`` or ``fractions.Fraction``; predicates fall back to exact rational
arithmetic whenever a float evaluation is too close to zero to trust.
"""
from __future__ import annotations

import math
from fractions import Fraction

Point = tuple  # (x, y)

# float cross products below this relative size are re-evaluated exactly
_ORIENT_EPS = 1e-12


def _exactify(v):
    return v if isinstance(v, Fraction) else Fraction(v)


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the cross product (b-a) x (c-a): +1 left turn, -1 right, 0 collinear."""
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if isinstance(det, Fraction):
        return int(det > 0) - int(det < 0)
    scale = (abs(b[0] - a[0]) + abs(c[0] - a[0])) * (abs(b[1] - a[1]) + abs(c[1] - a[1]))
    if abs(det) > _ORIENT_EPS * max(scale, 1e-300):
        return int(det > 0) - int(det < 0)
    ax, ay = _exactify(a[0]), _exactify(a[1])
    det = (_exactify(b[0]) - ax) * (_exactify(c[1]) - ay) - (_exactify(b[1]) - ay) * (_exactify(c[0]) - ax)
    return int(det > 0) - int(det < 0)


def seg_length(p: Point, q: Point) -> float:
    return math.hypot(float(q[0]) - float(p[0]), float(q[1]) - float(p[1]))


def ring_edges(ring):
    n = len(ring)
    for i in range(n):
        yield ring[i], ring[(i + 1) % n]


def ring_length(ring) -> float:
    return math.fsum(seg_length(p, q) for p, q in ring_edges(ring))


def ring_length_sq_terms(ring):
    """Squared edge lengths as exact Fractions; the perimeter is the sum of their roots."""
    out = []
    for p, q in ring_edges(ring):
        dx = _exactify(q[0]) - _exactify(p[0])
        dy = _exactify(q[1]) - _exactify(p[1])
        out.append(dx * dx + dy * dy)
    return out


def signed_area(ring) -> float:
    """Shoelace signed area; positive for counterclockwise rings."""
    acc = 0.0 if not any(isinstance(p[0], Fraction) for p in ring[:1]) else Fraction(0)
    terms = []
    for p, q in ring_edges(ring):
        terms.append(p[0] * q[1] - q[0] * p[1])
    if terms and isinstance(terms[0], Fraction):
        return sum(terms, Fraction(0)) / 2
    return math.fsum(float(t) for t in terms) / 2.0


def _on_segment_collinear(p, a, b) -> bool:
    # assumes orient(a, b, p) == 0
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def point_on_ring(pt: Point, ring) -> bool:
    for a, b in ring_edges(ring):
        if orient(a, b, pt) == 0 and _on_segment_collinear(pt, a, b):
            return True
    return False


def point_in_ring(pt: Point, ring) -> bool:
    """Strict interior test by parity ray casting.

    Uses the half-open edge rule (equivalent to casting the ray from a point
    perturbed infinitesimally downward), so vertices and horizontal edges on
    the ray never double count.  Points on the ring itself are reported as
    outside; callers needing boundary detection use :func:`point_on_ring`.
    """
    x, y = pt
    inside = False
    for a, b in ring_edges(ring):
        ay, by = a[1], b[1]
        if (ay > y) == (by > y):
            continue
        # edge straddles the horizontal line through pt
        side = orient(a, b, pt)
        if side == 0:
            return False  # on the edge
        if (by > ay) == (side > 0):
            inside = not inside
    return inside


def segment_relation(p1, p2, q1, q2) -> str:
    """Classify two closed segments: 'none', 'touch', 'cross', or 'overlap'.

    'cross' means the open interiors intersect transversally; 'overlap' means
    a shared collinear piece of positive length; 'touch' a single shared
    point involving at least one endpoint.
    """
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if d1 == d2 == d3 == d4 == 0:
        # collinear: check 1-d interval overlap
        if abs(float(p2[0]) - float(p1[0])) >= abs(float(p2[1]) - float(p1[1])):
            key = 0
        else:
            key = 1
        lo1, hi1 = sorted((p1[key], p2[key]))
        lo2, hi2 = sorted((q1[key], q2[key]))
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            return 'none'
        if lo == hi:
            return 'touch'
        return 'overlap'
    if ((d1 > 0) != (d2 > 0) or 0 in (d1, d2)) and ((d3 > 0) != (d4 > 0) or 0 in (d3, d4)):
        if d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
            if (d1 > 0) != (d2 > 0) and (d3 > 0) != (d4 > 0):
                return 'cross'
            return 'none'
        # an endpoint lies on the other segment
        for p, a, b, d in ((p1, q1, q2, d1), (p2, q1, q2, d2), (q1, p1, p2, d3), (q2, p1, p2, d4)):
            if d == 0 and _on_segment_collinear(p, a, b):
                return 'touch'
        return 'none'
    return 'none'


def ring_is_simple(ring) -> bool:
    """No self intersection: adjacent edges may share only their common vertex."""
    n = len(ring)
    if n < 3:
        return False
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    boxes = []
    for a, b in edges:
        boxes.append((min(float(a[0]), float(b[0])), min(float(a[1]), float(b[1])),
                      max(float(a[0]), float(b[0])), max(float(a[1]), float(b[1]))))
    for i in range(n):
        for j in range(i + 1, n):
            if boxes[i][2] < boxes[j][0] or boxes[j][2] < boxes[i][0]:
                continue
            if boxes[i][3] < boxes[j][1] or boxes[j][3] < boxes[i][1]:
                continue
            rel = segment_relation(*edges[i], *edges[j])
            adjacent = (j == i + 1) or (i == 0 and j == n - 1)
            if rel in ('cross', 'overlap'):
                return False
            if rel == 'touch' and not adjacent:
                return False
    # repeated vertices also break simplicity
    return len({(float(p[0]), float(p[1])) for p in ring}) == n


def rings_disjoint_interiors(ra, rb) -> bool:
    """True unless the rings cross or share a positive-length piece.

    Touching at isolated points is allowed.
    """
    na, nb = len(ra), len(rb)
    ea = [(ra[i], ra[(i + 1) % na]) for i in range(na)]
    eb = [(rb[i], rb[(i + 1) % nb]) for i in range(nb)]
    bb = lambda a, b: (min(float(a[0]), float(b[0])), min(float(a[1]), float(b[1])),
                       max(float(a[0]), float(b[0])), max(float(a[1]), float(b[1])))
    boxes_b = [bb(a, b) for a, b in eb]
    for a1, a2 in ea:
        box_a = bb(a1, a2)
        for (b1, b2), box_b in zip(eb, boxes_b):
            if box_a[2] < box_b[0] or box_b[2] < box_a[0]:
                continue
            if box_a[3] < box_b[1] or box_b[3] < box_a[1]:
                continue
            rel = segment_relation(a1, a2, b1, b2)
            if rel in ('cross', 'overlap'):
                return False
    return True


def ring_witness_inside(ring, other) -> bool:
    """Whether `ring` lies inside `other`, judged by a witness point off `other`."""
    for p in ring:
        if not point_on_ring(p, other):
            return point_in_ring(p, other)
    for a, b in ring_edges(ring):
        mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        if not point_on_ring(mid, other):
            return point_in_ring(mid, other)
    raise ValueError("rings coincide; no witness point off the other ring")


def project_point_segment(p, a, b):
    """Closest point to p on closed segment ab (floats)."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    px, py = float(p[0]), float(p[1])
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return (ax, ay)
    t = ((px - ax) * dx + (py - ay) * dy) / den
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return (ax + t * dx, ay + t * dy)


def seg_seg_closest(a1, a2, b1, b2):
    """Closest pair of points between two segments: (dist, p_on_a, p_on_b)."""
    best = None
    for p in (a1, a2):
        q = project_point_segment(p, b1, b2)
        d = seg_length(p, q)
        if best is None or d < best[0]:
            best = (d, (float(p[0]), float(p[1])), q)
    for p in (b1, b2):
        q = project_point_segment(p, a1, a2)
        d = seg_length(p, q)
        if d < best[0]:
            best = (d, q, (float(p[0]), float(p[1])))
    if segment_relation(a1, a2, b1, b2) in ('cross', 'touch', 'overlap'):
        # intersecting segments: distance 0 at the crossing; endpoints above
        # already caught touch-at-endpoint, handle proper crossings
        x = _segment_crossing_point(a1, a2, b1, b2)
        if x is not None:
            return (0.0, x, x)
    return best


def _segment_crossing_point(a1, a2, b1, b2):
    ax, ay = float(a1[0]), float(a1[1])
    dx1, dy1 = float(a2[0]) - ax, float(a2[1]) - ay
    bx, by = float(b1[0]), float(b1[1])
    dx2, dy2 = float(b2[0]) - bx, float(b2[1]) - by
    den = dx1 * dy2 - dy1 * dx2
    if den == 0.0:
        return None
    t = ((bx - ax) * dy2 - (by - ay) * dx2) / den
    return (ax + t * dx1, ay + t * dy1)


def fermat_point(p1, p2, p3):
    """Point minimizing the summed distance to three points (first isogonic point).

    Returns the obtuse vertex when one angle is at least 120 degrees, so the
    result is always the exact minimizer.
    """
    P = [(float(p[0]), float(p[1])) for p in (p1, p2, p3)]
    for i in range(3):
        ux = P[(i + 1) % 3][0] - P[i][0]
        uy = P[(i + 1) % 3][1] - P[i][1]
        vx = P[(i + 2) % 3][0] - P[i][0]
        vy = P[(i + 2) % 3][1] - P[i][1]
        nu = math.hypot(ux, uy)
        nv = math.hypot(vx, vy)
        if nu < 1e-300 or nv < 1e-300:
            return P[i]
        if ux * vx + uy * vy <= -0.5 * nu * nv:
            return P[i]
    a = seg_length(P[1], P[2])
    b = seg_length(P[0], P[2])
    c = seg_length(P[0], P[1])
    ang_a = math.acos(max(-1.0, min(1.0, (b * b + c * c - a * a) / (2 * b * c))))
    ang_b = math.acos(max(-1.0, min(1.0, (a * a + c * c - b * b) / (2 * a * c))))
    ang_c = math.pi - ang_a - ang_b
    # barycentric weights a / sin(A + 60 deg) etc. for the isogonic point
    w = (a / math.sin(ang_a + math.pi / 3),
         b / math.sin(ang_b + math.pi / 3),
         c / math.sin(ang_c + math.pi / 3))
    s = w[0] + w[1] + w[2]
    return ((w[0] * P[0][0] + w[1] * P[1][0] + w[2] * P[2][0]) / s,
            (w[0] * P[0][1] + w[1] * P[1][1] + w[2] * P[2][1]) / s)


def convex_hull(points):
    """Andrew monotone chain; returns hull vertices counterclockwise."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return pts
    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and orient(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out
    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def diameter(points) -> float:
    hull = convex_hull(points)
    best = 0.0
    for i in range(len(hull)):
        for j in range(i + 1, len(hull)):
            best = max(best, seg_length(hull[i], hull[j]))
    return best
