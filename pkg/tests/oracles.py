"""Independent reference implementations used to check the production paths.

Everything here is deliberately brute-force: rasterized overlap instead of
polygon clipping, angle sweeps instead of rotating calipers, O(n^2) loops
instead of the jitted kernels.
"""

from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np

from cadnet.geometry import HBB, OBB, ScoredDetection, iou as pair_iou


def points_in_quad(px: np.ndarray, py: np.ndarray, quad: np.ndarray) -> np.ndarray:
    """Inside mask for a convex quad with positive shoelace orientation."""
    inside = np.ones(px.shape, dtype=bool)
    for i in range(4):
        x1, y1 = quad[i]
        x2, y2 = quad[(i + 1) % 4]
        inside &= (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1) >= 0.0
    return inside


def raster_iou(quad_a: np.ndarray, quad_b: np.ndarray, resolution: int = 512) -> float:
    """IoU from cell-center rasterization over the pair's joint bounding box."""
    all_pts = np.vstack([quad_a, quad_b])
    x0, y0 = all_pts.min(axis=0)
    x1, y1 = all_pts.max(axis=0)
    xs = np.linspace(x0, x1, resolution + 1)
    ys = np.linspace(y0, y1, resolution + 1)
    cx = 0.5 * (xs[:-1] + xs[1:])
    cy = 0.5 * (ys[:-1] + ys[1:])
    gx, gy = np.meshgrid(cx, cy)
    in_a = points_in_quad(gx, gy, quad_a)
    in_b = points_in_quad(gx, gy, quad_b)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / union


def raster_area(quad: np.ndarray, resolution: int = 512) -> float:
    """Absolute area from rasterization over the quad's own bounding box."""
    x0, y0 = quad.min(axis=0)
    x1, y1 = quad.max(axis=0)
    xs = np.linspace(x0, x1, resolution + 1)
    ys = np.linspace(y0, y1, resolution + 1)
    cx = 0.5 * (xs[:-1] + xs[1:])
    cy = 0.5 * (ys[:-1] + ys[1:])
    gx, gy = np.meshgrid(cx, cy)
    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    return float(np.count_nonzero(points_in_quad(gx, gy, quad))) * cell


def sweep_min_enclosing_area(points: np.ndarray, step_deg: float = 0.1) -> float:
    """Minimum enclosing-rectangle area over a dense sweep of orientations."""
    best = math.inf
    for deg in np.arange(0.0, 90.0, step_deg):
        rad = math.radians(deg)
        u = np.array([math.cos(rad), math.sin(rad)])
        v = np.array([-u[1], u[0]])
        a = points @ u
        b = points @ v
        best = min(best, (a.max() - a.min()) * (b.max() - b.min()))
    return float(best)


def reference_nms(dets: Sequence[ScoredDetection], iou_threshold: float) -> List[int]:
    """Plain-Python greedy NMS over pairwise IoU calls."""
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    kept: List[int] = []
    for i in order:
        suppressed = False
        for j in kept:
            if dets[j].class_id != dets[i].class_id:
                continue
            if pair_iou(dets[j].box, dets[i].box) > iou_threshold:
                suppressed = True
                break
        if not suppressed:
            kept.append(i)
    return kept


def random_obb(rng: np.random.Generator, span: float = 100.0) -> OBB:
    return OBB(
        cx=rng.uniform(0, span),
        cy=rng.uniform(0, span),
        w=rng.uniform(2.0, span / 3),
        h=rng.uniform(2.0, span / 3),
        theta=rng.uniform(0.0, 90.0 - 1e-9),
    )


def random_obb_near(rng: np.random.Generator, base: OBB) -> OBB:
    """OBB jittered around ``base`` so pairs overlap often."""
    return OBB(
        cx=base.cx + rng.uniform(-base.w, base.w),
        cy=base.cy + rng.uniform(-base.h, base.h),
        w=max(2.0, base.w * rng.uniform(0.5, 1.5)),
        h=max(2.0, base.h * rng.uniform(0.5, 1.5)),
        theta=rng.uniform(0.0, 90.0 - 1e-9),
    )


def random_hbb(rng: np.random.Generator, span: float = 100.0) -> HBB:
    x = np.sort(rng.uniform(0, span, 2))
    y = np.sort(rng.uniform(0, span, 2))
    return HBB(float(x[0]), float(y[0]), float(x[1]), float(y[1]))
