"""Pure-numpy implementations of the hot geometry and pooling kernels.

These are the fallback path used when numba is unavailable or disabled via
``CADNET_DISABLE_NUMBA``.  The numba backend mirrors the same algorithms
loop-for-loop; keep the two in sync.
"""

from __future__ import annotations

import numpy as np


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area of a polygon given as an (n, 2) array (absolute value)."""
    x = poly[:, 0]
    y = poly[:, 1]
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))) * 0.5


def clip_convex(subject: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by a convex polygon.

    Both polygons are (n, 2) arrays with positive shoelace orientation.
    Returns the clipped polygon as an (m, 2) array (m may be 0).
    """
    output = [tuple(p) for p in subject]
    n_clip = len(clipper)
    for i in range(n_clip):
        cx1, cy1 = clipper[i]
        cx2, cy2 = clipper[(i + 1) % n_clip]
        ex, ey = cx2 - cx1, cy2 - cy1
        if not output:
            break
        points = output
        output = []
        sx, sy = points[-1]
        s_in = ex * (sy - cy1) - ey * (sx - cx1) >= 0.0
        for px, py in points:
            p_in = ex * (py - cy1) - ey * (px - cx1) >= 0.0
            if p_in != s_in:
                # segment crosses the clip edge; append the intersection
                dx, dy = px - sx, py - sy
                denom = ex * dy - ey * dx
                if denom != 0.0:
                    t = (ex * (cy1 - sy) - ey * (cx1 - sx)) / denom
                    output.append((sx + t * dx, sy + t * dy))
            if p_in:
                output.append((px, py))
            sx, sy, s_in = px, py, p_in
    if not output:
        return np.zeros((0, 2), dtype=np.float64)
    return np.asarray(output, dtype=np.float64)


def convex_intersection_area(poly_a: np.ndarray, poly_b: np.ndarray) -> float:
    """Intersection area of two convex polygons with positive orientation."""
    clipped = clip_convex(poly_a, poly_b)
    if clipped.shape[0] < 3:
        return 0.0
    return polygon_area(clipped)


def quad_iou_matrix(
    quads_a: np.ndarray,
    areas_a: np.ndarray,
    quads_b: np.ndarray,
    areas_b: np.ndarray,
) -> np.ndarray:
    """Pairwise IoU between two stacks of convex quads, shapes (n,4,2) and (m,4,2)."""
    n, m = quads_a.shape[0], quads_b.shape[0]
    out = np.zeros((n, m), dtype=np.float64)
    if n == 0 or m == 0:
        return out
    # axis-aligned bounds prefilter
    amin = quads_a.min(axis=1)
    amax = quads_a.max(axis=1)
    bmin = quads_b.min(axis=1)
    bmax = quads_b.max(axis=1)
    for i in range(n):
        for j in range(m):
            if (
                amin[i, 0] > bmax[j, 0]
                or bmin[j, 0] > amax[i, 0]
                or amin[i, 1] > bmax[j, 1]
                or bmin[j, 1] > amax[i, 1]
            ):
                continue
            inter = convex_intersection_area(quads_a[i], quads_b[j])
            union = areas_a[i] + areas_b[j] - inter
            if union > 0.0:
                out[i, j] = inter / union
    return out


def greedy_nms(quads: np.ndarray, areas: np.ndarray, iou_threshold: float) -> np.ndarray:
    """Greedy NMS over score-sorted convex quads; returns a keep mask.

    Input order is the suppression order (descending score).  A quad is
    suppressed iff its IoU with an already-kept quad exceeds the threshold.
    """
    n = quads.shape[0]
    keep = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if not keep[i]:
            continue
        for j in range(i + 1, n):
            if not keep[j]:
                continue
            inter = convex_intersection_area(quads[i], quads[j])
            union = areas[i] + areas[j] - inter
            if union > 0.0 and inter / union > iou_threshold:
                keep[j] = False
    return keep


def _bilinear_setup(coords: np.ndarray, size: int):
    """Clamped bilinear sample indices/weights along one axis.

    Samples more than one cell outside the map contribute zero (torch-style
    border handling for region pooling).
    """
    valid = (coords >= -1.0) & (coords <= size)
    c = np.clip(coords, 0.0, size - 1)
    lo = np.floor(c).astype(np.int64)
    hi = np.minimum(lo + 1, size - 1)
    frac = c - lo
    return lo, hi, frac, valid


def roi_align(
    features: np.ndarray,
    rois: np.ndarray,
    stride: float,
    out_size: int,
    sampling: int,
) -> np.ndarray:
    """Bilinear region pooling of (C,H,W) features to (N,C,out,out).

    ``rois`` are (N,4) boxes (x0,y0,x1,y1) in image pixels.  Each output bin
    averages ``sampling`` x ``sampling`` bilinear samples taken on the
    half-pixel-aligned grid (image coord u maps to feature coord u/stride - 0.5).
    """
    c, h, w = features.shape
    n = rois.shape[0]
    out = np.zeros((n, c, out_size, out_size), dtype=features.dtype)
    flat = features.reshape(c, h * w)
    for k in range(n):
        x0, y0, x1, y1 = rois[k]
        fx0 = x0 / stride - 0.5
        fy0 = y0 / stride - 0.5
        bw = (x1 - x0) / stride / out_size
        bh = (y1 - y0) / stride / out_size
        # sample offsets inside one bin, then broadcast over the 7x7 grid
        off = (np.arange(sampling) + 0.5) / sampling
        gx = fx0 + (np.arange(out_size)[:, None] + off[None, :]) * bw
        gy = fy0 + (np.arange(out_size)[:, None] + off[None, :]) * bh
        xlo, xhi, xf, xv = _bilinear_setup(gx.ravel(), w)
        ylo, yhi, yf, yv = _bilinear_setup(gy.ravel(), h)
        # outer product of per-axis samples: (out*sampling, out*sampling)
        w00 = np.outer((1 - yf) * yv, (1 - xf) * xv)
        w01 = np.outer((1 - yf) * yv, xf * xv)
        w10 = np.outer(yf * yv, (1 - xf) * xv)
        w11 = np.outer(yf * yv, xf * xv)
        idx00 = ylo[:, None] * w + xlo[None, :]
        idx01 = ylo[:, None] * w + xhi[None, :]
        idx10 = yhi[:, None] * w + xlo[None, :]
        idx11 = yhi[:, None] * w + xhi[None, :]
        vals = (
            flat[:, idx00] * w00
            + flat[:, idx01] * w01
            + flat[:, idx10] * w10
            + flat[:, idx11] * w11
        )
        s = sampling
        vals = vals.reshape(c, out_size, s, out_size, s)
        out[k] = vals.mean(axis=(2, 4))
    return out


def roi_align_backward(
    grad_out: np.ndarray,
    rois: np.ndarray,
    stride: float,
    height: int,
    width: int,
    sampling: int,
) -> np.ndarray:
    """Gradient of ``roi_align`` with respect to the feature map."""
    n, c, out_size, _ = grad_out.shape
    grad = np.zeros((c, height * width), dtype=grad_out.dtype)
    inv = 1.0 / (sampling * sampling)
    for k in range(n):
        x0, y0, x1, y1 = rois[k]
        fx0 = x0 / stride - 0.5
        fy0 = y0 / stride - 0.5
        bw = (x1 - x0) / stride / out_size
        bh = (y1 - y0) / stride / out_size
        off = (np.arange(sampling) + 0.5) / sampling
        gx = fx0 + (np.arange(out_size)[:, None] + off[None, :]) * bw
        gy = fy0 + (np.arange(out_size)[:, None] + off[None, :]) * bh
        xlo, xhi, xf, xv = _bilinear_setup(gx.ravel(), width)
        ylo, yhi, yf, yv = _bilinear_setup(gy.ravel(), height)
        s = sampling
        g = np.repeat(np.repeat(grad_out[k], s, axis=1), s, axis=2) * inv
        g = g.reshape(c, out_size * s, out_size * s)
        w00 = np.outer((1 - yf) * yv, (1 - xf) * xv)
        w01 = np.outer((1 - yf) * yv, xf * xv)
        w10 = np.outer(yf * yv, (1 - xf) * xv)
        w11 = np.outer(yf * yv, xf * xv)
        idx00 = (ylo[:, None] * width + xlo[None, :]).ravel()
        idx01 = (ylo[:, None] * width + xhi[None, :]).ravel()
        idx10 = (yhi[:, None] * width + xlo[None, :]).ravel()
        idx11 = (yhi[:, None] * width + xhi[None, :]).ravel()
        gf = g.reshape(c, -1)
        np.add.at(grad.T, idx00, (gf * w00.ravel()).T)
        np.add.at(grad.T, idx01, (gf * w01.ravel()).T)
        np.add.at(grad.T, idx10, (gf * w10.ravel()).T)
        np.add.at(grad.T, idx11, (gf * w11.ravel()).T)
    return grad.reshape(c, height, width)
