"""Geometric Steiner solvers for points and for disjoint polygonal regions.

Exact mode enumerates full topologies (every terminal a leaf, every branch
vertex of degree 3) and optimizes each one by cyclic block descent: branch
vertices move to the closed-form Fermat point of their neighbors, boundary
attachments to the nearest point of their region's boundary.  Both block
updates are exact minimizers, so the length decreases monotonically and
degenerate collapses snap exactly.  For regions the minimizer may be a
forest whose components share regions; a subset dynamic program assembles
the optimal spanning structure out of full components.

Trees found by exact mode are certified; larger instances fall back to an
insertion heuristic and are flagged non-certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as g
from .errors import ValidationError
from .planar import PlanarSet, Ring, complement_regions, to_shapely

EXACT_MAX_POINTS = 9
EXACT_MAX_REGIONS = 7
ANGLE_TOL = 1e-4
CONTRACT_TOL = 1e-9
SWEEP_CAP = 10_000
SWEEP_TOL = 1e-13


@dataclass
class TreeVertex:
    x: float
    y: float
    kind: str               # 'terminal' | 'branch'
    region: int | None = None

    @property
    def xy(self):
        return (self.x, self.y)


@dataclass
class SteinerTree:
    vertices: list
    edges: list             # (i, j) vertex index pairs
    total_length: float
    topology_id: str
    certified: bool

    @classmethod
    def empty(cls, certified: bool = True) -> "SteinerTree":
        return cls([], [], 0.0, "empty", certified)

    def is_empty(self) -> bool:
        return not self.edges and not self.vertices

    def edge_lengths(self):
        return [g.seg_length(self.vertices[i].xy, self.vertices[j].xy) for i, j in self.edges]

    def segments(self):
        return [(self.vertices[i].xy, self.vertices[j].xy) for i, j in self.edges]

    def isolated_points(self):
        deg = self.degrees()
        return [v.xy for i, v in enumerate(self.vertices) if deg[i] == 0]

    def degrees(self):
        deg = [0] * len(self.vertices)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def per_component(self):
        """Edge indices grouped by connected component of the tree."""
        parent = list(range(len(self.vertices)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in self.edges:
            parent[find(i)] = find(j)
        groups = {}
        for e, (i, j) in enumerate(self.edges):
            groups.setdefault(find(i), []).append(e)
        return list(groups.values())

    def n_components(self) -> int:
        parent = list(range(len(self.vertices)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in self.edges:
            parent[find(i)] = find(j)
        return len({find(i) for i in range(len(self.vertices))})

    def validate(self, regions=None, angle_tol: float = ANGLE_TOL):
        """Check the structural optimality conditions; raises on violation.

        regions: solver regions (or PlanarSets) indexed by the vertices'
        region tags, needed for the boundary-orthogonality condition.
        """
        if len(self.edges) != len(self.vertices) - self.n_components():
            raise ValidationError("tree_loops", "edge count implies a cycle")
        deg = self.degrees()
        pos = [np.array(v.xy) for v in self.vertices]
        for i, v in enumerate(self.vertices):
            if v.kind == "branch":
                if deg[i] != 3:
                    raise ValidationError("branch_degree",
                                          f"branch vertex {i} has degree {deg[i]}")
                nbrs = [j if k == i else k for j, k in self.edges if i in (j, k)]
                dirs = []
                for n in nbrs:
                    d = pos[n] - pos[i]
                    nd = np.linalg.norm(d)
                    if nd == 0:
                        raise ValidationError("zero_edge", f"zero-length edge at branch {i}")
                    dirs.append(d / nd)
                for a in range(3):
                    for b in range(a + 1, 3):
                        ang = math.acos(float(np.clip(np.dot(dirs[a], dirs[b]), -1, 1)))
                        if abs(ang - 2 * math.pi / 3) > angle_tol:
                            raise ValidationError("branch_angle",
                                                  f"branch {i} angle {ang:.6f} off 120 deg")
        # one attachment per region per tree component
        comp_of = self._component_of_vertices()
        seen = set()
        for i, v in enumerate(self.vertices):
            if v.kind == "terminal" and v.region is not None and deg[i] > 0:
                key = (comp_of[i], v.region)
                if key in seen:
                    raise ValidationError("duplicate_attachment",
                                          f"two endpoints on region {v.region} in one component")
                seen.add(key)
        if regions is not None:
            self._check_orthogonality(regions, angle_tol)
        total = math.fsum(self.edge_lengths())
        if abs(total - self.total_length) > 1e-9 * max(1.0, total):
            raise ValidationError("length_mismatch", "stored total_length is stale")
        return True

    def _component_of_vertices(self):
        parent = list(range(len(self.vertices)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in self.edges:
            parent[find(i)] = find(j)
        return [find(i) for i in range(len(self.vertices))]

    def _check_orthogonality(self, regions, tol):
        pos = [np.array(v.xy) for v in self.vertices]
        for i, v in enumerate(self.vertices):
            if v.kind != "terminal" or v.region is None:
                continue
            reg = regions[v.region]
            edge_dir = _interior_edge_direction(reg, v.xy)
            if edge_dir is None:
                continue  # attachment at a region vertex: no orthogonality constraint
            nbrs = [j if k == i else k for j, k in self.edges if i in (j, k)]
            if not nbrs:
                continue
            # first variation along the boundary edge must vanish
            force = 0.0
            for n in nbrs:
                d = pos[n] - pos[i]
                nd = np.linalg.norm(d)
                if nd == 0:
                    continue
                force += float(np.dot(d / nd, edge_dir))
            if abs(force) > tol:
                raise ValidationError("orthogonality",
                                      f"attachment on region {v.region} meets its edge at "
                                      f"{math.degrees(math.asin(max(-1, min(1, force)))):.4f} "
                                      f"deg off normal")

    def to_json_dict(self):
        return {
            "vertices": [{"x": float(v.x), "y": float(v.y), "kind": v.kind,
                          "region": v.region} for v in self.vertices],
            "edges": [[int(i), int(j)] for i, j in self.edges],
            "edge_lengths": [float(l) for l in self.edge_lengths()],
            "total_length": float(self.total_length),
            "topology_id": self.topology_id,
            "certified": bool(self.certified),
        }


def _interior_edge_direction(region, pt, vertex_tol_rel: float = 1e-7):
    """Unit direction of the region boundary edge whose interior holds pt,
    or None when pt sits at (or numerically near) a ring vertex."""
    rings = region.rings_points() if hasattr(region, "rings_points") else [
        r.points for r in region.rings]
    p = np.array([float(pt[0]), float(pt[1])])
    best = None
    for ring in rings:
        n = len(ring)
        for i in range(n):
            a = np.array([float(ring[i][0]), float(ring[i][1])])
            b = np.array([float(ring[(i + 1) % n][0]), float(ring[(i + 1) % n][1])])
            q = np.array(g.project_point_segment(p, a, b))
            d = float(np.linalg.norm(p - q))
            if best is None or d < best[0]:
                best = (d, a, b)
    if best is None:
        return None
    _, a, b = best
    scale = max(1.0, float(np.linalg.norm(b - a)))
    if np.linalg.norm(p - a) < vertex_tol_rel * scale or np.linalg.norm(p - b) < vertex_tol_rel * scale:
        return None
    d = b - a
    return d / np.linalg.norm(d)


# -- solver regions -----------------------------------------------------------


class _Region:
    """Projection target: a point terminal or the boundary of a polygonal set.

    Merged (touching) regions concatenate their edge arrays; `members` keeps
    the original region ids of a super-region.
    """

    def __init__(self, source, rid: int):
        self.rid = rid
        self.members = [rid]
        if isinstance(source, PlanarSet):
            self.is_point = False
            self.planars = [source]
            self._build_edges()
        else:
            self.is_point = True
            self.point = np.array([float(source[0]), float(source[1])])
            self.planars = []
            self.A = self.B = None

    def _build_edges(self):
        A, B = [], []
        for ps in self.planars:
            for r in ps.rings:
                pts = [(float(x), float(y)) for x, y in r.points]
                for i in range(len(pts)):
                    A.append(pts[i])
                    B.append(pts[(i + 1) % len(pts)])
        self.A = np.array(A)
        self.B = np.array(B)
        self._AB = self.B - self.A
        self._den = np.maximum((self._AB ** 2).sum(axis=1), 1e-300)

    def rings_points(self):
        return [r.points for ps in self.planars for r in ps.rings]

    def anchor(self) -> np.ndarray:
        if self.is_point:
            return self.point
        return self.A.mean(axis=0)

    def project(self, p) -> np.ndarray:
        if self.is_point:
            return self.point
        p = np.asarray(p, dtype=float)
        t = np.clip(((p - self.A) * self._AB).sum(axis=1) / self._den, 0.0, 1.0)
        Q = self.A + t[:, None] * self._AB
        d2 = ((Q - p) ** 2).sum(axis=1)
        return Q[int(np.argmin(d2))]

    def merge(self, other: "_Region") -> "_Region":
        assert not self.is_point and not other.is_point
        out = _Region.__new__(_Region)
        out.rid = min(self.rid, other.rid)
        out.members = sorted(self.members + other.members)
        out.is_point = False
        out.planars = self.planars + other.planars
        out._build_edges()
        return out

    def closest_pair(self, other: "_Region"):
        """Exact minimum distance realization; lexicographic tie-break."""
        if self.is_point and other.is_point:
            return (g.seg_length(self.point, other.point), tuple(self.point), tuple(other.point))
        if self.is_point:
            q = other.project(self.point)
            return (g.seg_length(self.point, q), tuple(self.point), tuple(q))
        if other.is_point:
            q = self.project(other.point)
            return (g.seg_length(q, other.point), tuple(q), tuple(other.point))
        best = None
        ea = [(tuple(map(float, a)), tuple(map(float, b))) for a, b in zip(self.A, self.B)]
        eb = [(tuple(map(float, a)), tuple(map(float, b))) for a, b in zip(other.A, other.B)]
        for a1, a2 in ea:
            for b1, b2 in eb:
                d, pa, pb = g.seg_seg_closest(a1, a2, b1, b2)
                if best is None or d < best[0] - 1e-12 or (
                        abs(d - best[0]) <= 1e-12 and (pa, pb) < (best[1], best[2])):
                    best = (d, pa, pb)
        return best


# -- full topology enumeration -------------------------------------------------


def full_topologies(k: int):
    """All full Steiner topologies on terminals 0..k-1.

    Vertices k..2k-3 are branch points.  Built by repeatedly splitting an
    edge with a new branch vertex, which yields each of the (2k-5)!! shapes
    exactly once.
    """
    if k == 2:
        yield [(0, 1)]
        return
    def grow(edges, next_terminal, next_branch):
        if next_terminal == k:
            yield edges
            return
        for e in range(len(edges)):
            u, v = edges[e]
            new = edges[:e] + edges[e + 1:] + [(u, next_branch), (next_branch, v),
                                               (next_branch, next_terminal)]
            yield from grow(new, next_terminal + 1, next_branch + 1)
    yield from grow([(0, 1)], 2, k)


def _optimize_topology(edges, regions, starts=2, coarse=False):
    """Minimize total length for one topology; returns (length, positions).

    Block updates are exact (Fermat point / boundary projection), so the
    length is nonincreasing; convergence is declared on a relative length
    stall.  Returns the best over the starts.
    """
    k = len(regions)
    nb = max(0, k - 2)
    nv = k + nb
    adj = [[] for _ in range(nv)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    anchors = [r.anchor() for r in regions]
    scale = max(1.0, float(np.ptp(np.array(anchors), axis=0).max()) if k > 1 else 1.0)
    tol = (1e-7 if coarse else SWEEP_TOL) * scale
    cap = 60 if coarse else SWEEP_CAP
    best = None
    for s in range(starts):
        pos = np.zeros((nv, 2))
        for i in range(k):
            pos[i] = anchors[i]
        if s == 0:
            centroid = np.mean(anchors, axis=0)
            for b in range(k, nv):
                pos[b] = centroid + (b - k) * 1e-3 * scale
        else:
            for b in range(k, nv):
                pos[b] = np.mean([anchors[n] if n < k else np.mean(anchors, axis=0)
                                  for n in adj[b]], axis=0)
            for _ in range(3):
                for b in range(k, nv):
                    pos[b] = np.mean([pos[n] for n in adj[b]], axis=0)
        for i in range(k):
            if not regions[i].is_point:
                pos[i] = regions[i].project(pos[adj[i][0]])
        prev = _length(pos, edges)
        sweeps = 0
        converged = False
        while sweeps < cap:
            for b in range(k, nv):
                n1, n2, n3 = adj[b]
                pos[b] = g.fermat_point(pos[n1], pos[n2], pos[n3])
            for i in range(k):
                if not regions[i].is_point:
                    pos[i] = regions[i].project(pos[adj[i][0]])
            cur = _length(pos, edges)
            sweeps += 1
            if prev - cur < tol:
                converged = True
                break
            prev = cur
        cand = (cur, pos.copy(), converged)
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def _length(pos, edges):
    return math.fsum(float(np.hypot(*(pos[u] - pos[v]))) for u, v in edges)


def _component_tree(regions, region_tags=None, starts=2):
    """Optimal full component over the given regions: (length, raw tree).

    raw tree: dict with positions, kinds, tags (into the caller's region
    numbering) and edges; degenerate edges are contracted later.
    """
    tags = region_tags if region_tags is not None else [r.rid for r in regions]
    k = len(regions)
    if k == 2:
        d, pa, pb = regions[0].closest_pair(regions[1])
        return d, {"pos": [pa, pb], "kind": ["terminal", "terminal"],
                   "tag": [tags[0], tags[1]], "edges": [(0, 1)], "converged": True}
    topos = list(full_topologies(k))
    scored = []
    for edges in topos:
        L, pos, conv = _optimize_topology(edges, regions, starts=starts, coarse=True)
        scored.append((L, edges))
    scored.sort(key=lambda t: t[0])
    cutoff = scored[0][0] * (1 + 1e-5) + 1e-12
    best = None
    for L0, edges in scored:
        if L0 > cutoff and best is not None:
            break
        L, pos, conv = _optimize_topology(edges, regions, starts=starts, coarse=False)
        if best is None or L < best[0] - 1e-12:
            best = (L, edges, pos, conv)
    L, edges, pos, conv = best
    nv = k + (k - 2)
    raw = {"pos": [tuple(map(float, pos[i])) for i in range(nv)],
           "kind": ["terminal"] * k + ["branch"] * (k - 2),
           "tag": list(tags) + [None] * (k - 2),
           "edges": list(edges), "converged": conv}
    return L, raw


def _contract(raw, tol: float):
    """Contract edges shorter than tol; branch-terminal merges keep the terminal."""
    pos = [np.array(p) for p in raw["pos"]]
    kind = list(raw["kind"])
    tag = list(raw["tag"])
    parent = list(range(len(pos)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in raw["edges"]:
        if float(np.linalg.norm(pos[u] - pos[v])) < tol:
            ru, rv = find(u), find(v)
            if ru == rv:
                continue
            # keep terminal identity through the merge
            keep, drop = (ru, rv)
            if kind[rv] == "terminal" and kind[ru] != "terminal":
                keep, drop = rv, ru
            parent[drop] = keep
    remap = {}
    out_pos, out_kind, out_tag = [], [], []
    for i in range(len(pos)):
        r = find(i)
        if r not in remap:
            remap[r] = len(out_pos)
            out_pos.append(tuple(map(float, pos[r])))
            out_kind.append(kind[r])
            out_tag.append(tag[r])
    edges = []
    seen = set()
    for u, v in raw["edges"]:
        a, b = remap[find(u)], remap[find(v)]
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
    return {"pos": out_pos, "kind": out_kind, "tag": out_tag, "edges": edges,
            "converged": raw.get("converged", True)}


def _assemble(raws, certified: bool, scale: float) -> SteinerTree:
    vertices = []
    edges = []
    converged = True
    for raw in raws:
        raw = _contract(raw, CONTRACT_TOL * max(1.0, scale))
        base = len(vertices)
        for p, k, t in zip(raw["pos"], raw["kind"], raw["tag"]):
            vertices.append(TreeVertex(p[0], p[1], k, t))
        edges.extend((base + u, base + v) for u, v in raw["edges"])
        converged = converged and raw.get("converged", True)
    total = math.fsum(g.seg_length(vertices[i].xy, vertices[j].xy) for i, j in edges)
    tree = SteinerTree(vertices, edges, total, _topology_id(vertices, edges),
                       certified and converged)
    return tree


def _topology_id(vertices, edges) -> str:
    order = sorted(range(len(vertices)),
                   key=lambda i: (vertices[i].kind != "terminal",
                                  vertices[i].region if vertices[i].region is not None else -1,
                                  vertices[i].x, vertices[i].y))
    rank = {v: i for i, v in enumerate(order)}
    labels = []
    for i in order:
        v = vertices[i]
        labels.append(f"t{v.region}" if v.kind == "terminal" else "b")
    named = ["%s%d" % (labels[rank[i]], rank[i]) for i in range(len(vertices))]
    es = sorted(tuple(sorted((named[i], named[j]))) for i, j in edges)
    return ";".join("%s-%s" % e for e in es) if es else ("v:" + ",".join(named) if named else "empty")


# -- public solvers ------------------------------------------------------------


def steiner_points(terminals, exact_max: int = EXACT_MAX_POINTS) -> SteinerTree:
    """Minimal tree connecting point terminals.

    Exact up to `exact_max` points (full-topology enumeration; degenerate
    shapes are reached by edge collapse).  Larger inputs use the insertion
    heuristic and come back flagged non-certified.
    """
    pts = [(float(p[0]), float(p[1])) for p in terminals]
    if len(set(pts)) != len(pts):
        raise ValidationError("duplicate_points", "terminals must be distinct")
    n = len(pts)
    if n == 0:
        return SteinerTree.empty()
    if n == 1:
        return SteinerTree([TreeVertex(pts[0][0], pts[0][1], "terminal", 0)], [],
                           0.0, "v:t0", True)
    regions = [_Region(p, i) for i, p in enumerate(pts)]
    scale = max(1.0, g.diameter(pts))
    if n > exact_max:
        return _heuristic(regions, scale)
    L, raw = _component_tree(regions)
    return _assemble([raw], certified=True, scale=scale)


def steiner_regions(region_sets, exact_max: int = EXACT_MAX_REGIONS) -> SteinerTree:
    """Minimal forest making the union of disjoint regions connected.

    Terminals are free on region boundaries.  Full components over region
    subsets are optimized by topology enumeration plus block descent, and a
    subset DP picks the spanning structure (components may share regions but
    attach each at most once apiece).
    """
    regions = [_Region(ps, i) for i, ps in enumerate(region_sets)]
    if not regions:
        raise ValidationError("no_regions", "need at least one region")
    _check_disjoint(region_sets)
    scale = max(1.0, g.diameter([p for ps in region_sets for p in ps.all_points()]))
    regions = _premerge_touching(regions, tol=1e-12 * scale)
    k = len(regions)
    if k == 1:
        return SteinerTree.empty()
    if k > exact_max:
        return _heuristic(regions, scale)

    comp_cost = {}
    comp_raw = {}
    full = (1 << k) - 1
    for mask in range(1, full + 1):
        idx = [i for i in range(k) if mask >> i & 1]
        if len(idx) < 2:
            continue
        sub = [regions[i] for i in idx]
        L, raw = _component_tree(sub, region_tags=[regions[i].rid for i in idx])
        comp_cost[mask] = L
        comp_raw[mask] = raw

    # grow the cluster containing region 0; each hyperedge meets it in one region
    import functools

    @functools.lru_cache(maxsize=None)
    def grow(cluster: int):
        if cluster == full:
            return 0.0, ()
        best = None
        for mask, cost in comp_cost.items():
            inter = mask & cluster
            if inter == 0 or mask & ~cluster == 0:
                continue
            if bin(inter).count("1") != 1:
                continue
            sub_cost, sub_choice = grow(cluster | mask)
            cand = (cost + sub_cost, (mask,) + sub_choice)
            if best is None or cand[0] < best[0]:
                best = cand
        if best is None:
            raise AssertionError("hypertree growth got stuck")
        return best

    total, chosen = grow(1)
    raws = [comp_raw[m] for m in chosen]
    return _assemble(raws, certified=True, scale=scale)


def _check_disjoint(region_sets):
    geoms = [to_shapely(ps) for ps in region_sets]
    for i in range(len(geoms)):
        for j in range(i + 1, len(geoms)):
            if geoms[i].intersection(geoms[j]).area > 0:
                raise ValidationError("regions_overlap",
                                      f"regions {i} and {j} have overlapping interiors",
                                      regions=(i, j))


def _premerge_touching(regions, tol: float):
    """Regions at distance zero merge into one super-region (sigma is 0 there)."""
    n = len(regions)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            d, _, _ = regions[i].closest_pair(regions[j])
            if d <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        reg = regions[members[0]]
        for m in members[1:]:
            reg = reg.merge(regions[m])
        out.append(reg)
    out.sort(key=lambda r: r.rid)
    return out


def _heuristic(regions, scale) -> SteinerTree:
    """Insertion heuristic: closest-pair spanning tree, then greedy Fermat
    branch insertion at sharp junctions.  Non-certified by construction."""
    k = len(regions)
    pair = {}
    for i in range(k):
        for j in range(i + 1, k):
            pair[(i, j)] = regions[i].closest_pair(regions[j])
    # Prim on closest-pair distances
    in_tree = {0}
    mst = []
    while len(in_tree) < k:
        best = None
        for i in in_tree:
            for j in range(k):
                if j in in_tree:
                    continue
                d = pair[(min(i, j), max(i, j))][0]
                if best is None or d < best[0]:
                    best = (d, i, j)
        mst.append((best[1], best[2]))
        in_tree.add(best[2])
    raws = []
    for i, j in mst:
        d, pa, pb = pair[(min(i, j), max(i, j))]
        a, b = (pa, pb) if i < j else (pb, pa)
        raws.append({"pos": [a, b], "kind": ["terminal", "terminal"],
                     "tag": [regions[i].rid, regions[j].rid], "edges": [(0, 1)],
                     "converged": True})
    tree = _assemble(raws, certified=False, scale=scale)
    improved = _insertion_improve(tree, regions, scale)
    return improved


def _insertion_improve(tree: SteinerTree, regions, scale) -> SteinerTree:
    """Splice Fermat branch points into junctions meeting below 120 degrees."""
    by_rid = {r.rid: r for r in regions}
    changed = True
    guard = 0
    while changed and guard < 32:
        changed = False
        guard += 1
        deg = tree.degrees()
        pos = [np.array(v.xy) for v in tree.vertices]
        for i, v in enumerate(tree.vertices):
            if deg[i] < 2:
                continue
            nbrs = [j if kk == i else kk for j, kk in tree.edges if i in (j, kk)]
            for a in range(len(nbrs)):
                for b in range(a + 1, len(nbrs)):
                    u, w = nbrs[a], nbrs[b]
                    du, dw = pos[u] - pos[i], pos[w] - pos[i]
                    nu, nw = np.linalg.norm(du), np.linalg.norm(dw)
                    if nu < 1e-12 or nw < 1e-12:
                        continue
                    if np.dot(du, dw) / (nu * nw) <= -0.5 + 1e-12:
                        continue
                    f = np.array(g.fermat_point(pos[u], pos[i], pos[w]))
                    gain = (nu + nw) - (np.linalg.norm(f - pos[u])
                                        + np.linalg.norm(f - pos[i])
                                        + np.linalg.norm(f - pos[w]))
                    if gain <= 1e-12 * scale:
                        continue
                    verts = list(tree.vertices) + [TreeVertex(f[0], f[1], "branch", None)]
                    nbidx = len(verts) - 1
                    edges = [e for e in tree.edges
                             if set(e) != {i, u} and set(e) != {i, w}]
                    edges += [(nbidx, u), (nbidx, w), (nbidx, i)]
                    total = math.fsum(g.seg_length(verts[x].xy, verts[y].xy)
                                      for x, y in edges)
                    tree = SteinerTree(verts, edges, total,
                                       _topology_id(verts, edges), False)
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
        if changed:
            tree = _polish_heuristic(tree, by_rid, scale)
    return tree


def _polish_heuristic(tree: SteinerTree, by_rid, scale) -> SteinerTree:
    pos = [np.array(v.xy) for v in tree.vertices]
    adj = [[] for _ in pos]
    for u, v in tree.edges:
        adj[u].append(v)
        adj[v].append(u)
    for _ in range(200):
        moved = 0.0
        for i, v in enumerate(tree.vertices):
            if v.kind == "branch" and len(adj[i]) == 3:
                new = np.array(g.fermat_point(*(pos[n] for n in adj[i])))
                moved = max(moved, float(np.linalg.norm(new - pos[i])))
                pos[i] = new
            elif v.kind == "terminal" and v.region in by_rid and adj[i]:
                reg = by_rid[v.region]
                if not reg.is_point:
                    new = reg.project(np.mean([pos[n] for n in adj[i]], axis=0))
                    moved = max(moved, float(np.linalg.norm(new - pos[i])))
                    pos[i] = new
        if moved < 1e-12 * scale:
            break
    verts = [TreeVertex(float(p[0]), float(p[1]), v.kind, v.region)
             for p, v in zip(pos, tree.vertices)]
    total = math.fsum(g.seg_length(verts[i].xy, verts[j].xy) for i, j in tree.edges)
    return SteinerTree(verts, tree.edges, total, _topology_id(verts, tree.edges), False)


# -- set-level functionals -----------------------------------------------------


def st(E: PlanarSet) -> SteinerTree:
    """Steiner tree connecting the closures of the components of E."""
    if E.is_empty():
        raise ValidationError("empty_set", "the Steiner length of an empty set is undefined")
    comps = E.components().components
    if len(comps) == 1:
        return SteinerTree.empty()
    return steiner_regions(comps)


def st_c(E: PlanarSet, frame_radius: float | None = None) -> SteinerTree:
    """Steiner tree connecting the complement components (holes and exterior).

    The exterior is represented by a circular frame of apothem `frame_radius`
    centered at the origin; the result is independent of the radius once the
    set fits inside half of it.
    """
    if E.is_empty():
        raise ValidationError("empty_set", "the complement Steiner length needs a nonempty set")
    maxnorm = max(math.hypot(float(p[0]), float(p[1])) for p in E.all_points())
    R = frame_radius if frame_radius is not None else 4.0 * max(maxnorm, 1.0)
    if R < 2.0 * maxnorm:
        raise ValidationError("frame_too_small",
                              f"need frame_radius >= {2 * maxnorm:.6g} so the set fits in half "
                              f"the frame", required=2 * maxnorm)
    frame = PlanarSet([Ring(_circle_ring(R / math.cos(math.pi / 64), 64), "outer", None)],
                      check="light")
    regions = complement_regions(E, frame)
    if len(regions) == 1:
        return SteinerTree.empty()
    return steiner_regions(regions)


def _circle_ring(radius: float, n: int):
    return tuple((radius * math.cos(2 * math.pi * i / n),
                  radius * math.sin(2 * math.pi * i / n)) for i in range(n))
