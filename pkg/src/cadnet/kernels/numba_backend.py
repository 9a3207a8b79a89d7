"""Numba-jitted implementations of the hot geometry and pooling kernels.

Mirrors :mod:`cadnet.kernels.numpy_backend` loop-for-loop.  All kernels are
compiled with ``cache=True`` so the JIT cost is paid once per machine.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _clip_area(quad_a: np.ndarray, quad_b: np.ndarray) -> float:
    # Sutherland-Hodgman: clip quad_a by each edge of quad_b, then shoelace.
    buf_in = np.empty((16, 2), dtype=np.float64)
    buf_out = np.empty((16, 2), dtype=np.float64)
    n_out = 4
    for k in range(4):
        buf_out[k, 0] = quad_a[k, 0]
        buf_out[k, 1] = quad_a[k, 1]
    for i in range(4):
        cx1 = quad_b[i, 0]
        cy1 = quad_b[i, 1]
        cx2 = quad_b[(i + 1) % 4, 0]
        cy2 = quad_b[(i + 1) % 4, 1]
        ex = cx2 - cx1
        ey = cy2 - cy1
        n_in = n_out
        if n_in == 0:
            return 0.0
        for k in range(n_in):
            buf_in[k, 0] = buf_out[k, 0]
            buf_in[k, 1] = buf_out[k, 1]
        n_out = 0
        sx = buf_in[n_in - 1, 0]
        sy = buf_in[n_in - 1, 1]
        s_in = ex * (sy - cy1) - ey * (sx - cx1) >= 0.0
        for k in range(n_in):
            px = buf_in[k, 0]
            py = buf_in[k, 1]
            p_in = ex * (py - cy1) - ey * (px - cx1) >= 0.0
            if p_in != s_in:
                dx = px - sx
                dy = py - sy
                denom = ex * dy - ey * dx
                if denom != 0.0:
                    t = (ex * (cy1 - sy) - ey * (cx1 - sx)) / denom
                    buf_out[n_out, 0] = sx + t * dx
                    buf_out[n_out, 1] = sy + t * dy
                    n_out += 1
            if p_in:
                buf_out[n_out, 0] = px
                buf_out[n_out, 1] = py
                n_out += 1
            sx = px
            sy = py
            s_in = p_in
    if n_out < 3:
        return 0.0
    area = 0.0
    for k in range(n_out):
        x0 = buf_out[k, 0]
        y0 = buf_out[k, 1]
        x1 = buf_out[(k + 1) % n_out, 0]
        y1 = buf_out[(k + 1) % n_out, 1]
        area += x0 * y1 - x1 * y0
    return abs(area) * 0.5


def convex_intersection_area(poly_a: np.ndarray, poly_b: np.ndarray) -> float:
    # general n-gon clipping stays on the numpy path; quads take the fast kernel
    if poly_a.shape[0] == 4 and poly_b.shape[0] == 4:
        return _clip_area(
            np.ascontiguousarray(poly_a, dtype=np.float64),
            np.ascontiguousarray(poly_b, dtype=np.float64),
        )
    from . import numpy_backend

    return numpy_backend.convex_intersection_area(poly_a, poly_b)


@njit(cache=True)
def quad_iou_matrix(
    quads_a: np.ndarray,
    areas_a: np.ndarray,
    quads_b: np.ndarray,
    areas_b: np.ndarray,
) -> np.ndarray:
    n = quads_a.shape[0]
    m = quads_b.shape[0]
    out = np.zeros((n, m), dtype=np.float64)
    for i in range(n):
        ax0 = ax1 = quads_a[i, 0, 0]
        ay0 = ay1 = quads_a[i, 0, 1]
        for k in range(1, 4):
            ax0 = min(ax0, quads_a[i, k, 0])
            ax1 = max(ax1, quads_a[i, k, 0])
            ay0 = min(ay0, quads_a[i, k, 1])
            ay1 = max(ay1, quads_a[i, k, 1])
        for j in range(m):
            bx0 = bx1 = quads_b[j, 0, 0]
            by0 = by1 = quads_b[j, 0, 1]
            for k in range(1, 4):
                bx0 = min(bx0, quads_b[j, k, 0])
                bx1 = max(bx1, quads_b[j, k, 0])
                by0 = min(by0, quads_b[j, k, 1])
                by1 = max(by1, quads_b[j, k, 1])
            if ax0 > bx1 or bx0 > ax1 or ay0 > by1 or by0 > ay1:
                continue
            inter = _clip_area(quads_a[i], quads_b[j])
            union = areas_a[i] + areas_b[j] - inter
            if union > 0.0:
                out[i, j] = inter / union
    return out


@njit(cache=True)
def greedy_nms(quads: np.ndarray, areas: np.ndarray, iou_threshold: float) -> np.ndarray:
    n = quads.shape[0]
    keep = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if not keep[i]:
            continue
        for j in range(i + 1, n):
            if not keep[j]:
                continue
            inter = _clip_area(quads[i], quads[j])
            union = areas[i] + areas[j] - inter
            if union > 0.0 and inter / union > iou_threshold:
                keep[j] = False
    return keep


@njit(cache=True, inline="always")
def _sample_1d(coord: float, size: int):
    # returns (lo, hi, frac, valid); samples beyond one cell outside are zero
    valid = -1.0 <= coord <= size
    c = min(max(coord, 0.0), size - 1.0)
    lo = int(np.floor(c))
    hi = min(lo + 1, size - 1)
    return lo, hi, c - lo, valid


@njit(cache=True)
def roi_align(
    features: np.ndarray,
    rois: np.ndarray,
    stride: float,
    out_size: int,
    sampling: int,
) -> np.ndarray:
    c, h, w = features.shape
    n = rois.shape[0]
    out = np.zeros((n, c, out_size, out_size), dtype=features.dtype)
    inv = 1.0 / (sampling * sampling)
    for k in range(n):
        fx0 = rois[k, 0] / stride - 0.5
        fy0 = rois[k, 1] / stride - 0.5
        bw = (rois[k, 2] - rois[k, 0]) / stride / out_size
        bh = (rois[k, 3] - rois[k, 1]) / stride / out_size
        for py in range(out_size):
            for px in range(out_size):
                for sy in range(sampling):
                    gy = fy0 + (py + (sy + 0.5) / sampling) * bh
                    ylo, yhi, yf, yv = _sample_1d(gy, h)
                    if not yv:
                        continue
                    for sx in range(sampling):
                        gx = fx0 + (px + (sx + 0.5) / sampling) * bw
                        xlo, xhi, xf, xv = _sample_1d(gx, w)
                        if not xv:
                            continue
                        w00 = (1.0 - yf) * (1.0 - xf)
                        w01 = (1.0 - yf) * xf
                        w10 = yf * (1.0 - xf)
                        w11 = yf * xf
                        for ch in range(c):
                            out[k, ch, py, px] += inv * (
                                features[ch, ylo, xlo] * w00
                                + features[ch, ylo, xhi] * w01
                                + features[ch, yhi, xlo] * w10
                                + features[ch, yhi, xhi] * w11
                            )
    return out


@njit(cache=True)
def roi_align_backward(
    grad_out: np.ndarray,
    rois: np.ndarray,
    stride: float,
    height: int,
    width: int,
    sampling: int,
) -> np.ndarray:
    n, c, out_size, _ = grad_out.shape
    grad = np.zeros((c, height, width), dtype=grad_out.dtype)
    inv = 1.0 / (sampling * sampling)
    for k in range(n):
        fx0 = rois[k, 0] / stride - 0.5
        fy0 = rois[k, 1] / stride - 0.5
        bw = (rois[k, 2] - rois[k, 0]) / stride / out_size
        bh = (rois[k, 3] - rois[k, 1]) / stride / out_size
        for py in range(out_size):
            for px in range(out_size):
                for sy in range(sampling):
                    gy = fy0 + (py + (sy + 0.5) / sampling) * bh
                    ylo, yhi, yf, yv = _sample_1d(gy, height)
                    if not yv:
                        continue
                    for sx in range(sampling):
                        gx = fx0 + (px + (sx + 0.5) / sampling) * bw
                        xlo, xhi, xf, xv = _sample_1d(gx, width)
                        if not xv:
                            continue
                        w00 = (1.0 - yf) * (1.0 - xf)
                        w01 = (1.0 - yf) * xf
                        w10 = yf * (1.0 - xf)
                        w11 = yf * xf
                        for ch in range(c):
                            g = grad_out[k, ch, py, px] * inv
                            grad[ch, ylo, xlo] += g * w00
                            grad[ch, ylo, xhi] += g * w01
                            grad[ch, yhi, xlo] += g * w10
                            grad[ch, yhi, xhi] += g * w11
    return grad
