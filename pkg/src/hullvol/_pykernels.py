"""Reference implementations of the compiled kernels.

Same signatures and results as ``_ckernels``; used when the extension is
not built or when ``HULLVOL_PURE_PYTHON=1``.
"""
import numpy as np


def _cross(p, o, a, b):
    return ((p[a][0] - p[o][0]) * (p[b][1] - p[o][1])
            - (p[a][1] - p[o][1]) * (p[b][0] - p[o][0]))


def monotone_chain(points, order, tol):
    order = np.asarray(order, dtype=np.int64)
    if len(order) <= 2:
        return order.copy()
    p = np.asarray(points, dtype=float).tolist()
    idx = order.tolist()
    lower = []
    for i in idx:
        while len(lower) >= 2 and _cross(p, lower[-2], lower[-1], i) <= tol:
            lower.pop()
        lower.append(i)
    upper = []
    for i in reversed(idx):
        while len(upper) >= 2 and _cross(p, upper[-2], upper[-1], i) <= tol:
            upper.pop()
        upper.append(i)
    return np.array(lower[:-1] + upper[:-1], dtype=np.int64)


def shoelace(points, ring):
    xy = np.asarray(points, dtype=float)[np.asarray(ring, dtype=np.int64)]
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def outside_mask(points, normals, offsets, tol):
    points = np.asarray(points, dtype=float)
    normals = np.asarray(normals, dtype=float)
    if len(normals) == 0 or len(points) == 0:
        return np.zeros(len(points), dtype=bool)
    out = np.zeros(len(points), dtype=bool)
    # chunked to bound the temporary (points x facets) matrix
    step = max(1, 2_000_000 // len(normals))
    for start in range(0, len(points), step):
        block = points[start:start + step] @ normals.T + offsets
        out[start:start + step] = (block > tol).any(axis=1)
    return out
