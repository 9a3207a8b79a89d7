"""Backend selection for the hot kernels.

The numba path is the default.  Set ``CADNET_DISABLE_NUMBA=1`` in the
environment to force the pure-numpy fallback (useful for debugging and for
benchmarking the JIT speedup, see benchmarks/bench_kernels.py).
"""

import os

from . import numpy_backend

_disable = os.environ.get("CADNET_DISABLE_NUMBA", "").strip() not in ("", "0")

if not _disable:
    try:
        from . import numba_backend as _impl

        BACKEND = "numba"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"
else:
    _impl = numpy_backend
    BACKEND = "numpy"

convex_intersection_area = _impl.convex_intersection_area
quad_iou_matrix = _impl.quad_iou_matrix
greedy_nms = _impl.greedy_nms
roi_align = _impl.roi_align
roi_align_backward = _impl.roi_align_backward

__all__ = [
    "BACKEND",
    "convex_intersection_area",
    "quad_iou_matrix",
    "greedy_nms",
    "roi_align",
    "roi_align_backward",
]
