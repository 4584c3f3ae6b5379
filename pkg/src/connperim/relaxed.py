"""Connected and simply connected perimeter, with explicit recovery sequences.

The two functionals evaluate as perimeter plus twice the Steiner length of
the component closures (plus twice the complement Steiner length for the
simply connected variant).  Recovery sequences realize those values as
limits of perimeters of connected (resp. simply connected) polygonal sets:
the set union a thickened tree, minus thickened complement corridors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.ops import unary_union

from . import geometry as g
from .errors import FeatureSizeError, ValidationError
from .planar import (PlanarSet, from_shapely, sym_diff_area_exact, thicken,
                     to_shapely)
from .steiner import SteinerTree, st, st_c


@dataclass
class EnergyReport:
    perimeter: float
    steiner: float
    steiner_complement: float
    connected_perimeter: float
    simply_connected_perimeter: float
    tree: SteinerTree
    tree_complement: SteinerTree
    certified: bool

    def to_json_dict(self):
        return {
            "perimeter": self.perimeter,
            "steiner": self.steiner,
            "steiner_complement": self.steiner_complement,
            "connected_perimeter": self.connected_perimeter,
            "simply_connected_perimeter": self.simply_connected_perimeter,
            "tree": self.tree.to_json_dict(),
            "tree_complement": self.tree_complement.to_json_dict(),
            "certified": self.certified,
        }


def energy_report(E: PlanarSet, frame_radius=None) -> EnergyReport:
    """Assemble the full per-term breakdown for a polygonal set."""
    P = E.perimeter()
    tree = st(E)
    tree_c = st_c(E, frame_radius=frame_radius)
    St = tree.total_length
    Stc = tree_c.total_length
    return EnergyReport(
        perimeter=P,
        steiner=St,
        steiner_complement=Stc,
        connected_perimeter=P + 2 * St,
        simply_connected_perimeter=P + 2 * St + 2 * Stc,
        tree=tree,
        tree_complement=tree_c,
        certified=tree.certified and tree_c.certified,
    )


def connected_perimeter(E: PlanarSet, frame_radius=None) -> EnergyReport:
    return energy_report(E, frame_radius=frame_radius)


def simply_connected_perimeter(E: PlanarSet, frame_radius=None) -> EnergyReport:
    return energy_report(E, frame_radius=frame_radius)


@dataclass
class RecoverySequence:
    epsilons: list
    sets: list
    perimeters: list
    target: float

    def linear_fit(self):
        """(slope, intercept) of perimeter against epsilon."""
        if len(self.epsilons) < 2:
            return 0.0, (self.perimeters[0] if self.perimeters else self.target)
        slope, intercept = np.polyfit(np.array(self.epsilons, float),
                                      np.array(self.perimeters, float), 1)
        return float(slope), float(intercept)

    def excess_slope(self):
        """Fitted constant C in perimeter ~ target + C * eps."""
        slope, _ = self.linear_fit()
        return slope

    def l1_errors(self, E: PlanarSet):
        return [sym_diff_area_exact(s, E) for s in self.sets]


def _min_tree_feature(tree: SteinerTree) -> float:
    lens = [l for l in tree.edge_lengths() if l > 0]
    return min(lens) if lens else math.inf


def recovery_sequence_connected(E: PlanarSet, epsilons) -> RecoverySequence:
    """Sets E union the eps-thickened component tree; each member connected."""
    report_tree = st(E)
    target = E.perimeter() + 2 * report_tree.total_length
    feature = _min_tree_feature(report_tree)
    eps_list = sorted((float(e) for e in epsilons), reverse=True)
    sets, perims = [], []
    geomE = to_shapely(E)
    for eps in eps_list:
        if eps <= 0:
            raise ValidationError("bad_eps", "epsilons must be positive")
        if eps >= feature / 2:
            raise FeatureSizeError(
                f"eps={eps} reaches half the shortest tree edge ({feature:.6g})",
                eps=eps, feature=feature, limiting="tree edge")
        if report_tree.is_empty():
            member = E
        else:
            tube = thicken(report_tree, eps)
            member = from_shapely(unary_union([geomE, to_shapely(tube)]))
        ncomp = len(member.components().components)
        if ncomp != 1:
            raise FeatureSizeError(
                f"eps={eps} fails to connect the set ({ncomp} components remain)",
                eps=eps, limiting="component gap")
        sets.append(member)
        perims.append(member.perimeter())
    return RecoverySequence(eps_list, sets, perims, target)


def recovery_sequence_simply_connected(E: PlanarSet, epsilons) -> RecoverySequence:
    """Sets (E minus thickened complement corridors) union the thickened tree.

    When a tree endpoint and a complement-tree endpoint coincide on the
    boundary, the complement attachment slides 3*eps along its boundary ring
    so the two corridors open separately; this keeps each member simply
    connected and only perturbs the perimeter at order eps.
    """
    tree = st(E)
    tree_c = st_c(E)
    target = E.perimeter() + 2 * tree.total_length + 2 * tree_c.total_length
    feature = min(_min_tree_feature(tree), _min_tree_feature(tree_c))
    eps_list = sorted((float(e) for e in epsilons), reverse=True)
    sets, perims = [], []
    geomE = to_shapely(E)
    for eps in eps_list:
        if eps <= 0:
            raise ValidationError("bad_eps", "epsilons must be positive")
        if eps >= feature / 2:
            raise FeatureSizeError(
                f"eps={eps} reaches half the shortest corridor edge ({feature:.6g})",
                eps=eps, feature=feature, limiting="tree edge")
        tc = _separate_shared_endpoints(tree, tree_c, E, eps)
        geom = geomE
        if not tc.is_empty():
            geom = geom.difference(to_shapely(thicken(tc, eps)))
        if not tree.is_empty():
            geom = unary_union([geom, to_shapely(thicken(tree, eps))])
        member = from_shapely(geom, min_area=1e-12)
        ncomp = len(member.components().components)
        nholes = sum(1 for r in member.rings if r.kind == "hole")
        if ncomp != 1 or nholes != 0:
            raise FeatureSizeError(
                f"eps={eps} leaves {ncomp} components and {nholes} holes; corridors "
                f"interfere, use a smaller eps", eps=eps, limiting="corridor interference")
        sets.append(member)
        perims.append(member.perimeter())
    return RecoverySequence(eps_list, sets, perims, target)


def _separate_shared_endpoints(tree: SteinerTree, tree_c: SteinerTree,
                               E: PlanarSet, eps: float) -> SteinerTree:
    """Slide complement attachments that collide with tree attachments."""
    if tree.is_empty() or tree_c.is_empty():
        return tree_c
    t_pts = [v.xy for v in tree.vertices if v.kind == "terminal"]
    moved = False
    new_vertices = list(tree_c.vertices)
    for i, v in enumerate(tree_c.vertices):
        if v.kind != "terminal":
            continue
        if any(g.seg_length(v.xy, p) < 2.5 * eps for p in t_pts):
            new_vertices[i] = _slide_along_boundary(E, v, 3.0 * eps)
            moved = True
    if not moved:
        return tree_c
    total = math.fsum(g.seg_length(new_vertices[i].xy, new_vertices[j].xy)
                      for i, j in tree_c.edges)
    return SteinerTree(new_vertices, tree_c.edges, total, tree_c.topology_id,
                       tree_c.certified)


def _slide_along_boundary(E: PlanarSet, vertex, dist: float):
    from .steiner import TreeVertex
    p = vertex.xy
    best = None
    for r in E.rings:
        pts = r.points
        n = len(pts)
        for i in range(n):
            q = g.project_point_segment(p, pts[i], pts[(i + 1) % n])
            d = g.seg_length(p, q)
            if best is None or d < best[0]:
                best = (d, r, i, q)
    if best is None:
        return vertex
    _, ring, i, q = best
    pts = ring.points
    n = len(pts)
    # walk forward along the ring from the projected point
    remaining = dist
    cur = q
    j = i
    while remaining > 0:
        nxt = (float(pts[(j + 1) % n][0]), float(pts[(j + 1) % n][1]))
        step = g.seg_length(cur, nxt)
        if step >= remaining:
            t = remaining / step if step > 0 else 0.0
            cur = (cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1]))
            break
        remaining -= step
        cur = nxt
        j = (j + 1) % n
    return TreeVertex(cur[0], cur[1], vertex.kind, vertex.region)


@dataclass
class LimInfReport:
    target: float
    perimeters: list          # None where a member was skipped
    skipped: list             # indices of disconnected members
    min_value: float
    tolerance: float
    ok: bool


def liminf_spotcheck(sequence, E: PlanarSet, tol: float = 1e-6) -> LimInfReport:
    """Numerical witness that connected approximations cannot undershoot the
    connected perimeter: min over the sequence of P(E_n) >= target - tol.

    Disconnected members carry value +infinity in the functional and are
    skipped with a warning entry.
    """
    report = energy_report(E)
    target = report.connected_perimeter
    values = []
    skipped = []
    for i, member in enumerate(sequence):
        ncomp = len(member.components().components)
        if ncomp != 1:
            values.append(None)
            skipped.append(i)
            continue
        values.append(member.perimeter())
    finite = [v for v in values if v is not None]
    mn = min(finite) if finite else math.inf
    return LimInfReport(target=target, perimeters=values, skipped=skipped,
                        min_value=mn, tolerance=tol, ok=mn >= target - tol)
