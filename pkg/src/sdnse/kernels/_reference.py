"""Pure-numpy reference implementation of the interpolation kernels.

Used as the import-time fallback when the compiled extension is not
available; also the correctness oracle for the compiled path.
"""

from __future__ import annotations

import numpy as np


def interp_linear(values, origin, spacing, points):
    """Multilinear interpolation of gridded components at scattered points.

    values  : (C, n1[, n2[, n3]]) float64, C components on a uniform grid
    origin  : (n,) coordinate of grid node (0, ..., 0)
    spacing : (n,) grid spacing per axis
    points  : (m, n) query points

    Returns (m, C).  Points outside the grid's bounding box give 0.
    """
    values = np.asarray(values, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    origin = np.asarray(origin, dtype=np.float64)
    spacing = np.asarray(spacing, dtype=np.float64)
    ndim = values.ndim - 1
    shape = values.shape[1:]

    t = (points - origin) / spacing
    inside = np.all((t >= -1e-12) & (t <= np.array(shape) - 1 + 1e-12), axis=1)
    t = np.clip(t, 0.0, np.array(shape, dtype=np.float64) - 1.0)
    i0 = np.minimum(t.astype(np.int64), np.array(shape) - 2)
    i0 = np.maximum(i0, 0)
    w = t - i0

    out = np.zeros((points.shape[0], values.shape[0]))
    for corner in range(2**ndim):
        idx = []
        weight = np.ones(points.shape[0])
        for ax in range(ndim):
            bit = (corner >> ax) & 1
            idx.append(i0[:, ax] + bit)
            weight *= w[:, ax] if bit else (1.0 - w[:, ax])
        vals = values[(slice(None), *idx)]  # (C, m)
        out += weight[:, None] * vals.T
    out[~inside] = 0.0
    return out


def interp_linear_periodic(values, box_length, points):
    """Periodic multilinear interpolation on a grid covering [0, L)^n.

    values  : (C, N[, N[, N]]) float64
    points  : (m, n); wrapped into the box before interpolation
    """
    values = np.asarray(values, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    ndim = values.ndim - 1
    shape = np.array(values.shape[1:])
    spacing = box_length / shape

    t = np.mod(points, box_length) / spacing
    i0 = t.astype(np.int64) % shape
    w = t - np.floor(t)

    out = np.zeros((points.shape[0], values.shape[0]))
    for corner in range(2**ndim):
        idx = []
        weight = np.ones(points.shape[0])
        for ax in range(ndim):
            bit = (corner >> ax) & 1
            idx.append((i0[:, ax] + bit) % shape[ax])
            weight *= w[:, ax] if bit else (1.0 - w[:, ax])
        vals = values[(slice(None), *idx)]
        out += weight[:, None] * vals.T
    return out
