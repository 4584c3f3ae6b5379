"""Nested Jordan boundary decomposition of a polygonal set.

The boundary splits into outer curves (counterclockwise) and inner curves
(clockwise) with a parity-alternating nesting order.  All structural
clauses -- disjoint-or-nested interiors, alternation, length additivity,
and the disjoint cover by the induced components -- are machine checked
before a decomposition is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import geometry as g
from .errors import ValidationError
from .planar import PlanarSet, Ring


@dataclass
class JordanDecomposition:
    plus_curves: list   # list of point tuples, counterclockwise
    minus_curves: list  # list of point tuples, clockwise
    nesting: list       # immediate containment edges ((kind, i) inside (kind, j))
    component_assignment: dict  # minus index -> owning plus index

    def curve(self, kind: str, idx: int):
        return self.plus_curves[idx] if kind == "+" else self.minus_curves[idx]

    def length_sum(self) -> float:
        return math.fsum(g.ring_length(c) for c in self.plus_curves + self.minus_curves)

    def contained_minus(self, i: int):
        """All minus indices whose interior lies inside plus curve i."""
        inside = set()
        children = {}
        for (ka, a), parent in self.nesting:
            children.setdefault(parent, []).append((ka, a))
        stack = [("+", i)]
        while stack:
            node = stack.pop()
            for kid in children.get(node, []):
                if kid[0] == "-":
                    inside.add(kid[1])
                stack.append(kid)
        return sorted(inside)

    def to_json_dict(self) -> dict:
        return {
            "plus_curves": [[[float(x), float(y)] for x, y in c] for c in self.plus_curves],
            "minus_curves": [[[float(x), float(y)] for x, y in c] for c in self.minus_curves],
            "nesting": [[list(a), list(b)] for a, b in self.nesting],
            "component_assignment": {str(k): v for k, v in self.component_assignment.items()},
        }


@dataclass
class IndecomposabilityCertificate:
    indecomposable: bool
    split: tuple | None = None          # (A, B) with P(E) = P(A) + P(B)
    trivially_empty: bool = False


def _canonical_curve(points, ccw: bool):
    """Orient and rotate a closed polyline to a canonical start vertex."""
    pts = list(points)
    if (g.signed_area(pts) > 0) != ccw:
        pts.reverse()
    start = min(range(len(pts)), key=lambda i: (float(pts[i][0]), float(pts[i][1])))
    return tuple(pts[start:] + pts[:start])


def _curve_key(points):
    return tuple((float(x), float(y)) for x, y in points)


def boundary_decompose(s: PlanarSet) -> JordanDecomposition:
    """Split the boundary rings of a valid set into the nested curve family.

    Curves come out in a deterministic order (lexicographic by their
    leftmost-lowest vertex) with canonical orientation and start vertex, so
    the result is invariant under ring reordering and cyclic rotation of the
    input.
    """
    container, depths = s._nesting()
    idx_outer = [i for i, r in enumerate(s.rings) if r.kind == "outer"]
    idx_hole = [i for i, r in enumerate(s.rings) if r.kind == "hole"]
    plus = sorted((_canonical_curve(s.rings[i].points, ccw=True) for i in idx_outer),
                  key=_curve_key)
    minus = sorted((_canonical_curve(s.rings[i].points, ccw=False) for i in idx_hole),
                   key=_curve_key)
    # map original ring index -> ('+'|'-', position)
    pos = {}
    plus_keys = {tuple(map(_curve_key, [c]))[0]: j for j, c in enumerate(plus)}
    minus_keys = {tuple(map(_curve_key, [c]))[0]: j for j, c in enumerate(minus)}
    for i in idx_outer:
        pos[i] = ("+", plus_keys[_curve_key(_canonical_curve(s.rings[i].points, True))])
    for i in idx_hole:
        pos[i] = ("-", minus_keys[_curve_key(_canonical_curve(s.rings[i].points, False))])
    nesting = []
    assignment = {}
    for i in range(len(s.rings)):
        if container[i] is not None:
            nesting.append((pos[i], pos[container[i]]))
        if s.rings[i].kind == "hole":
            c = container[i]
            if c is None or s.rings[c].kind != "outer":
                raise ValidationError("nesting_parity",
                                      f"inner curve {i} not immediately inside an outer curve",
                                      rings=(i, c))
            assignment[pos[i][1]] = pos[c][1]
    nesting.sort()
    d = JordanDecomposition(plus, minus, nesting, assignment)
    check_decomposition_clauses(d, s)
    return d


def check_decomposition_clauses(d: JordanDecomposition, s: PlanarSet,
                                rel_tol: float = 1e-9) -> dict:
    """Validate the seven structural clauses; raises on the first violation.

    Returns a dict of measured quantities for reporting.
    """
    plus, minus = d.plus_curves, d.minus_curves

    def interiors_disjoint_or_nested(curves, kind):
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                if not g.rings_disjoint_interiors(curves[i], curves[j]):
                    raise ValidationError("clause_i_ii",
                                          f"{kind} curves {i},{j} cross", rings=(i, j))

    interiors_disjoint_or_nested(plus, "+")        # clause (i)
    interiors_disjoint_or_nested(minus, "-")       # clause (ii)

    inside_pp = [[_ring_in(plus[i], plus[j]) for j in range(len(plus))] for i in range(len(plus))]
    inside_mp = [[_ring_in(minus[k], plus[j]) for j in range(len(plus))] for k in range(len(minus))]
    inside_pm = [[_ring_in(plus[i], minus[k]) for k in range(len(minus))] for i in range(len(plus))]
    inside_mm = [[_ring_in(minus[a], minus[b]) for b in range(len(minus))] for a in range(len(minus))]

    for k in range(len(minus)):                    # clause (iii)
        if not any(inside_mp[k]):
            raise ValidationError("clause_iii", f"inner curve {k} lies in no outer curve",
                                  rings=(k,))

    for j in range(len(plus)):                     # clause (iv)
        for i in range(len(plus)):
            if i != j and inside_pp[j][i]:
                if not any(inside_pm[j][k] and inside_mp[k][i] for k in range(len(minus))):
                    raise ValidationError("clause_iv",
                                          f"outer curves {j} in {i} without an inner curve "
                                          f"between them", rings=(j, i))
    for a in range(len(minus)):                    # clause (v)
        for b in range(len(minus)):
            if a != b and inside_mm[a][b]:
                if not any(inside_mp[a][i] and _ring_in(plus[i], minus[b])
                           for i in range(len(plus))):
                    raise ValidationError("clause_v",
                                          f"inner curves {a} in {b} without an outer curve "
                                          f"between them", rings=(a, b))

    total = s.perimeter()                           # clause (vi)
    csum = d.length_sum()
    if abs(csum - total) > rel_tol * max(1.0, total):
        raise ValidationError("clause_vi", "curve lengths fail to sum to the perimeter",
                              total=total, sum=csum)
    exact = sorted(sum((g.ring_length_sq_terms(c) for c in plus + minus), []))
    if exact != s.perimeter_sq_terms():
        raise ValidationError("clause_vi", "curve edge multiset differs from the boundary's")

    # clause (vii): induced components are disjoint and cover the set, by area
    comp_area = Fraction(0)
    float_mode = False
    for i in range(len(plus)):
        a = _exact_area(plus[i])
        for k in _immediate_minus_children(d, i):
            a -= abs(_exact_area(minus[k]))
        comp_area += a
    set_area = sum((_exact_area(r.points) for r in s.rings), Fraction(0))
    if comp_area != set_area:
        if abs(float(comp_area) - float(set_area)) > rel_tol * max(1.0, abs(float(set_area))):
            raise ValidationError("clause_vii", "component areas fail to cover the set",
                                  cover=float(comp_area), total=float(set_area))
        float_mode = True
    return {"length_sum": csum, "perimeter": total,
            "area_cover": float(comp_area), "area": float(set_area),
            "exact_area_match": not float_mode}


def _immediate_minus_children(d: JordanDecomposition, plus_idx: int):
    return sorted(a for (ka, a), (kp, p) in d.nesting
                  if ka == "-" and kp == "+" and p == plus_idx)


def _ring_in(inner, outer) -> bool:
    if inner is outer:
        return False
    return g.ring_witness_inside(inner, outer)


def _exact_area(points):
    acc = Fraction(0)
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        acc += Fraction(x1) * Fraction(y2) - Fraction(x2) * Fraction(y1)
    return acc / 2


def parity_membership(d: JordanDecomposition, pt) -> bool:
    """Membership via winding parity over the whole curve family."""
    crossings = 0
    for c in d.plus_curves + d.minus_curves:
        if g.point_on_ring(pt, c):
            return True
        if g.point_in_ring(pt, c):
            crossings += 1
    return crossings % 2 == 1


def indecomposable_certificate(s: PlanarSet) -> IndecomposabilityCertificate:
    """Either confirm indecomposability or exhibit a perimeter-additive split."""
    if s.is_empty():
        return IndecomposabilityCertificate(False, None, trivially_empty=True)
    comps = s.components().components
    if len(comps) == 1:
        return IndecomposabilityCertificate(True)
    a = comps[0]
    rest_rings = []
    for c in comps[1:]:
        base = len(rest_rings)
        for r in c.rings:
            rest_rings.append(Ring(r.points, r.kind,
                                   None if r.parent is None else r.parent + base))
    b = PlanarSet(rest_rings, check="light")
    return IndecomposabilityCertificate(False, (a, b))
