"""Exact Steiner length on the 8-neighbor grid graph (terminal-subset DP).

Terminal groups are contracted: travel inside a group is free, matching the
Steiner problem on compact sets.  Distance fields are computed by iterated
forward/backward chamfer sweeps, which converge to the exact grid-graph
distances (each sweep is a monotone Bellman relaxation).

Grid lengths overestimate the Euclidean optimum by at most the 8-neighbor
metrication factor sqrt(4 - 2*sqrt(2)) ~ 1.0824, plus O(h) attachment error.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .planar import PixelSet, PlanarSet, rasterize, _rasterize_on, _union_bbox

METRICATION_BOUND = math.sqrt(4.0 - 2.0 * math.sqrt(2.0))  # ~1.0824 < 1.083

MAX_GRID_SIDE = 512
MAX_GROUPS = 10
MEMORY_BUDGET_BYTES = 1_500_000_000


def _sweep(d: np.ndarray, h: float, reverse: bool) -> None:
    """One sequential chamfer pass (in place); rows bottom-up or top-down."""
    H, W = d.shape
    s = h * math.sqrt(2.0)
    idx = np.arange(W) * h
    rng = range(H - 1, -1, -1) if reverse else range(H)
    prev = None
    for iy in rng:
        row = d[iy]
        if prev is not None:
            np.minimum(row, prev + h, out=row)
            np.minimum(row[1:], prev[:-1] + s, out=row[1:])
            np.minimum(row[:-1], prev[1:] + s, out=row[:-1])
        # horizontal runs: prefix min of (row - x*h) + x*h in both directions
        np.minimum(row, np.minimum.accumulate(row - idx) + idx, out=row)
        rev = row[::-1]
        np.minimum(rev, np.minimum.accumulate(rev - idx) + idx, out=rev)
        prev = row


def distance_field(init: np.ndarray, h: float, max_passes: int = 64) -> np.ndarray:
    """Grid-graph distance d(v) = min_u init(u) + chamfer(u, v), exact at fixpoint."""
    d = np.array(init, dtype=np.float64)
    for _ in range(max_passes):
        before = d.copy()
        _sweep(d, h, reverse=False)
        _sweep(d, h, reverse=True)
        if np.array_equal(before, d):
            return d
    raise AssertionError("chamfer relaxation failed to reach a fixpoint")


def steiner_grid_oracle(terminal_cells, grid) -> float:
    """Minimal grid Steiner length connecting the terminal groups.

    `terminal_cells`: one boolean mask (H, W) or array of (iy, ix) pairs per
    group.  `grid`: a PixelSet frame or an (H, W, h) triple.  Monotone
    nonincreasing in h and an upper bound on the continuous optimum up to the
    metrication factor.
    """
    if isinstance(grid, PixelSet):
        shape, h = grid.occupancy.shape, grid.h
    else:
        shape, h = (int(grid[0]), int(grid[1])), float(grid[2])
    H, W = shape
    if max(H, W) > MAX_GRID_SIDE:
        raise ResourceLimitError(f"grid side {max(H, W)} exceeds {MAX_GRID_SIDE}")
    masks = [_as_mask(tc, shape) for tc in terminal_cells]
    masks = [m for m in masks if m.any()]
    if not masks:
        raise ValidationError("no_terminals", "every terminal group is empty")
    t = len(masks)
    if t > MAX_GROUPS:
        raise ResourceLimitError(f"{t} terminal groups exceed the budget of {MAX_GROUPS}")
    need = (2 ** t + 2) * H * W * 8
    if need > MEMORY_BUDGET_BYTES:
        raise ResourceLimitError(f"subset DP would need ~{need / 1e9:.1f} GB")
    if t == 1:
        return 0.0

    inf = np.inf
    D = {}
    for i, m in enumerate(masks):
        init = np.where(m, 0.0, inf)
        D[1 << i] = distance_field(init, h)
    full = (1 << t) - 1
    for mask in sorted(range(3, full + 1), key=lambda m: (bin(m).count("1"), m)):
        if mask & (mask - 1) == 0 or mask in D:
            continue
        low = mask & (-mask)
        tmp = np.full(shape, inf)
        sub = (mask - 1) & mask
        while sub > 0:
            if sub & low and sub != mask:
                np.minimum(tmp, D[sub] + D[mask ^ sub], out=tmp)
            sub = (sub - 1) & mask
        D[mask] = distance_field(tmp, h)
    return float(D[full].min())


def _as_mask(tc, shape) -> np.ndarray:
    if isinstance(tc, np.ndarray) and tc.dtype == bool:
        if tc.shape != shape:
            raise ValidationError("mask_shape", "terminal mask does not match the grid")
        return tc
    m = np.zeros(shape, dtype=bool)
    for iy, ix in tc:
        m[int(iy), int(ix)] = True
    return m


def oracle_for_regions(regions, h: float, margin: int = 2):
    """Rasterize disjoint regions onto one lattice-aligned grid and run the DP.

    Returns (length, info).  Regions a cell-center rasterization cannot see at
    this h are rejected; groups that merge at this resolution collapse to one.
    """
    regions = [r for r in regions if isinstance(r, PlanarSet)]
    if len(regions) < 1:
        raise ValidationError("no_regions", "need at least one region")
    box = regions[0].bbox()
    for r in regions[1:]:
        box = _union_bbox_boxes(box, r.bbox())
    box = (box[0] - (margin - 1) * h, box[1] - (margin - 1) * h,
           box[2] + (margin - 1) * h, box[3] + (margin - 1) * h)
    masks = []
    for i, r in enumerate(regions):
        m = _rasterize_on(r, h, box)
        if not m.any():
            raise ValidationError("unresolved_region",
                                  f"region {i} has no cell center at h={h}", region=i)
        masks.append(m)
    shape = masks[0].shape
    length = steiner_grid_oracle(masks, (shape[0], shape[1], h))
    info = {"h": h, "grid": [int(shape[1]), int(shape[0])],
            "groups": len(masks), "metrication_factor": METRICATION_BOUND}
    return length, info


def oracle_for_pixel_components(px: PixelSet) -> float:
    """Steiner length of the component super-terminals of a pixel set."""
    from scipy import ndimage
    labels, n = ndimage.label(px.occupancy,
                              structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], bool))
    if n <= 1:
        return 0.0
    masks = [labels == k for k in range(1, n + 1)]
    return steiner_grid_oracle(masks, px)


def _union_bbox_boxes(a, b):
    return (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))
