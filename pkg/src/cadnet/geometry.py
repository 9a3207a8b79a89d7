"""Rotated-box arithmetic: quads, horizontal and oriented boxes, IoU, NMS.

Conventions: image coordinates with x right / y down.  Canonical quads carry
positive shoelace orientation.  Oriented boxes keep their angle in [0, 90)
degrees; the representation is unique up to the (w<->h, theta+-90) swap, which
all conversions canonicalize away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Union

import numpy as np

from . import kernels
from .kernels import numpy_backend

AREA_EPSILON = 1e-6  # px^2; smaller quads are treated as annotation noise


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Quad:
    """Simple quadrilateral, vertices (4, 2) in pixels, positive orientation."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (4, 2):
            raise GeometryError(f"quad needs 4 points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("quad has non-finite coordinates")
        if _signed_area(pts) < 0.0:
            pts = pts[::-1].copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if _quad_self_intersects(pts):
            raise GeometryError("quad is self-intersecting")

    @property
    def area(self) -> float:
        return numpy_backend.polygon_area(self.points)

    def translated(self, dx: float, dy: float) -> "Quad":
        return Quad(self.points + np.array([dx, dy]))


@dataclass(frozen=True)
class HBB:
    """Axis-aligned box."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise GeometryError("HBB has non-finite coordinates")
        if self.xmin > self.xmax or self.ymin > self.ymax:
            raise GeometryError(f"inverted HBB {vals}")

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    @property
    def center(self) -> tuple:
        return (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def as_array(self) -> np.ndarray:
        return np.array([self.xmin, self.ymin, self.xmax, self.ymax], dtype=np.float64)

    def translated(self, dx: float, dy: float) -> "HBB":
        return HBB(self.xmin + dx, self.ymin + dy, self.xmax + dx, self.ymax + dy)


@dataclass(frozen=True)
class OBB:
    """Oriented box: center, side lengths, angle in degrees within [0, 90)."""

    cx: float
    cy: float
    w: float
    h: float
    theta: float

    def __post_init__(self):
        vals = (self.cx, self.cy, self.w, self.h, self.theta)
        if not all(math.isfinite(v) for v in vals):
            raise GeometryError("OBB has non-finite fields")
        if self.w <= 0 or self.h <= 0:
            raise GeometryError(f"OBB sides must be positive, got w={self.w} h={self.h}")
        if not 0.0 <= self.theta < 90.0:
            raise GeometryError(f"OBB angle {self.theta} outside [0, 90)")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h, self.theta], dtype=np.float64)

    def translated(self, dx: float, dy: float) -> "OBB":
        return OBB(self.cx + dx, self.cy + dy, self.w, self.h, self.theta)


Box = Union[OBB, HBB]


@dataclass(frozen=True)
class ScoredDetection:
    box: Box
    class_id: int
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise GeometryError(f"score {self.score} outside [0, 1]")
        if self.class_id < 0:
            raise GeometryError(f"negative class id {self.class_id}")

    @property
    def kind(self) -> str:
        return "obb" if isinstance(self.box, OBB) else "hbb"


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _segments_cross(p1, p2, p3, p4) -> bool:
    # proper crossing test (shared endpoints / collinear touches do not count)
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2 and d3 != d4


def _quad_self_intersects(pts: np.ndarray) -> bool:
    # only the two non-adjacent edge pairs can cross in a quad
    return _segments_cross(pts[0], pts[1], pts[2], pts[3]) or _segments_cross(
        pts[1], pts[2], pts[3], pts[0]
    )


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, returned with positive orientation."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if pts.shape[0] < 3:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.asarray(lower[:-1] + upper[:-1], dtype=np.float64)


def obb_corner_array(boxes: np.ndarray) -> np.ndarray:
    """Corners of (n, 5) oriented boxes as (n, 4, 2), positive orientation.

    Corner order starts at the top-left corner of the unrotated box.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 5)
    cx, cy, w, h, theta = boxes.T
    rad = np.deg2rad(theta)
    cos, sin = np.cos(rad), np.sin(rad)
    dx = np.stack([-w, w, w, -w], axis=1) * 0.5
    dy = np.stack([-h, -h, h, h], axis=1) * 0.5
    x = cx[:, None] + dx * cos[:, None] - dy * sin[:, None]
    y = cy[:, None] + dx * sin[:, None] + dy * cos[:, None]
    return np.stack([x, y], axis=2)


def obb_to_quad(b: OBB) -> Quad:
    """Corners of the rotated rectangle, starting at the theta=0 top-left corner."""
    return Quad(obb_corner_array(b.as_array())[0])


def obb_to_hbb(b: OBB) -> HBB:
    """Tightest axis-aligned box around the rotated rectangle."""
    corners = obb_corner_array(b.as_array())[0]
    x, y = corners[:, 0], corners[:, 1]
    return HBB(float(x.min()), float(y.min()), float(x.max()), float(y.max()))


def _canonical_obb(cx, cy, w, h, phi_deg) -> OBB:
    # fold the rectangle orientation into [0, 90) via the w<->h swap symmetry
    theta = phi_deg % 180.0
    if theta >= 90.0:
        theta -= 90.0
        w, h = h, w
    if theta >= 90.0:  # guards phi_deg % 180 rounding to exactly 180
        theta = 0.0
        w, h = h, w
    return OBB(float(cx), float(cy), float(w), float(h), float(theta))


def min_area_rect(points: np.ndarray) -> OBB:
    """Minimum-area enclosing rotated rectangle of a point set.

    Sweeps rectangle orientations aligned with convex-hull edges (one of which
    is always optimal) and returns the canonicalized best.
    """
    hull = convex_hull(points)
    if hull.shape[0] < 3:
        raise GeometryError("degenerate point set: no enclosing rectangle")
    m = hull.shape[0]
    best = None
    for i in range(m):
        edge = hull[(i + 1) % m] - hull[i]
        norm = math.hypot(edge[0], edge[1])
        if norm == 0.0:
            continue
        u = edge / norm
        v = np.array([-u[1], u[0]])
        a = hull @ u
        b = hull @ v
        w = float(a.max() - a.min())
        h = float(b.max() - b.min())
        area = w * h
        if best is None or area < best[0]:
            cu = 0.5 * float(a.max() + a.min())
            cv = 0.5 * float(b.max() + b.min())
            center = cu * u + cv * v
            phi = math.degrees(math.atan2(u[1], u[0]))
            best = (area, center[0], center[1], w, h, phi)
    if best is None or best[3] <= 0 or best[4] <= 0:
        raise GeometryError("degenerate point set: no enclosing rectangle")
    _, cx, cy, w, h, phi = best
    return _canonical_obb(cx, cy, w, h, phi)


def quad_to_obb(q: Quad) -> OBB:
    """Minimum-area rotated rectangle best overlapping the quad."""
    if q.area <= AREA_EPSILON:
        raise GeometryError(f"degenerate quad, area {q.area} <= {AREA_EPSILON}")
    return min_area_rect(q.points)


def polygon_intersection_area(a: Quad, b: Quad) -> float:
    """Overlap area of two convex quads (half-plane clipping + shoelace)."""
    if np.array_equal(a.points, b.points):
        return a.area
    return kernels.convex_intersection_area(a.points, b.points)


def iou_hbb(a: HBB, b: HBB) -> float:
    iw = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    ih = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return min(inter / union, 1.0)


def iou_obb(a: OBB, b: OBB) -> float:
    # order the operands deterministically so iou(a, b) == iou(b, a) bit-for-bit
    if b.as_array().tobytes() < a.as_array().tobytes():
        a, b = b, a
    qa, qb = obb_to_quad(a), obb_to_quad(b)
    inter = polygon_intersection_area(qa, qb)
    union = qa.area + qb.area - inter
    if union <= 0.0:
        return 0.0
    return min(inter / union, 1.0)


def iou(a: Box, b: Box) -> float:
    if isinstance(a, OBB) and isinstance(b, OBB):
        return iou_obb(a, b)
    if isinstance(a, HBB) and isinstance(b, HBB):
        return iou_hbb(a, b)
    raise GeometryError(f"cannot mix box kinds {type(a).__name__} / {type(b).__name__}")


def hbb_iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of (n, 4) and (m, 4) xyxy boxes."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0.0, inter / union, 0.0)
    return out


def obb_iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of (n, 5) and (m, 5) oriented boxes."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 5)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 5)
    qa, qb = obb_corner_array(a), obb_corner_array(b)
    return kernels.quad_iou_matrix(qa, a[:, 2] * a[:, 3], qb, b[:, 2] * b[:, 3])


def _detection_quads(dets: Sequence[ScoredDetection]) -> np.ndarray:
    quads = np.empty((len(dets), 4, 2), dtype=np.float64)
    for i, d in enumerate(dets):
        if isinstance(d.box, OBB):
            quads[i] = obb_corner_array(d.box.as_array())[0]
        else:
            b = d.box
            quads[i] = [(b.xmin, b.ymin), (b.xmax, b.ymin), (b.xmax, b.ymax), (b.xmin, b.ymax)]
    return quads


def rotated_nms(dets: Sequence[ScoredDetection], iou_threshold: float) -> List[int]:
    """Greedy class-wise NMS; returns kept indices ordered by score rank.

    Ties in score are broken by lower original index.  Detections of different
    classes never suppress each other.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise GeometryError(f"iou threshold {iou_threshold} outside [0, 1]")
    if not dets:
        return []
    kinds = {d.kind for d in dets}
    if len(kinds) > 1:
        raise GeometryError("mixed box kinds in NMS input")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    quads = _detection_quads(dets)
    areas = np.array([dets[i].box.area for i in range(len(dets))])
    kept: List[int] = []
    for cls in sorted({d.class_id for d in dets}):
        cls_order = [i for i in order if dets[i].class_id == cls]
        mask = kernels.greedy_nms(
            np.ascontiguousarray(quads[cls_order]),
            np.ascontiguousarray(areas[cls_order]),
            float(iou_threshold),
        )
        kept.extend(i for i, keep in zip(cls_order, mask) if keep)
    kept.sort(key=lambda i: (-dets[i].score, i))
    return kept
