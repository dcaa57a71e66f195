"""Convex hulls of point clouds and the counts the volume estimators need.

The hull of ``n`` points in ``R^d`` is summarised by its vertex set, its
facets (as outward unit normals with offsets), its d-dimensional volume
and the split of the ``n`` points into hull vertices and the rest.

Planar clouds go through a monotone chain (compiled kernel when
available). For ``d >= 3`` the facets come from Qhull and the volume is
recomputed here by a fan triangulation from the vertex barycentre.
Lower-dimensional clouds are projected onto their affine span and the
extreme points are found there; their d-volume is zero.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import kernels

#: relative tolerance for orientation and rank decisions
REL_TOL = 1e-9

BOUNDARY = "boundary"
INTERIOR = "interior"


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered sample ``X_1, ..., X_N`` in ``R^dim``.

    Order is kept as given; the three-way split used by the Gayraud
    estimator depends on it.
    """

    points: np.ndarray
    dim: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.dim)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(
                f"point array of shape {pts.shape} does not match dim={self.dim}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points, dim: int | None = None) -> "PointCloud":
        """Build a cloud from a sequence of coordinate rows.

        Raises ``ValueError`` if the rows have different lengths.
        """
        rows = [list(p) for p in points] if not isinstance(points, np.ndarray) else points
        if isinstance(rows, list):
            lengths = {len(r) for r in rows}
            if len(lengths) > 1:
                raise ValueError(f"points of mixed dimension {sorted(lengths)}")
            if dim is None:
                if not rows:
                    raise ValueError("dim is required for an empty cloud")
                dim = lengths.pop()
            arr = np.array(rows, dtype=float).reshape(len(rows), dim)
        else:
            arr = np.asarray(rows, dtype=float)
            if dim is None:
                if arr.ndim != 2:
                    raise ValueError("expected an (n, d) array")
                dim = arr.shape[1]
        return cls(arr, dim)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, item) -> "PointCloud":
        return PointCloud(self.points[item], self.dim)


class Facet(NamedTuple):
    vertices: tuple       # indices into the cloud
    normal: np.ndarray    # outward unit normal
    offset: float         # normal . x + offset <= 0 inside


@dataclass(frozen=True, eq=False)
class HullSummary:
    """Convex hull of a cloud plus the counts ``N``, ``N_boundary``, ``N_interior``.

    ``n_boundary`` counts hull *vertices* only; points on a facet that are
    not vertices, and repeated copies of a vertex, count as interior.
    """

    dim: int
    vertex_indices: np.ndarray
    vertices: np.ndarray
    facet_indices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    hull_volume: float
    n_total: int
    scale: float = 1.0
    # affine frame (origin, basis rows) and sub-hull for degenerate clouds
    _frame: tuple | None = field(default=None, repr=False)
    _sub: "HullSummary | None" = field(default=None, repr=False)

    @property
    def n_boundary(self) -> int:
        return int(len(self.vertex_indices))

    @property
    def n_interior(self) -> int:
        return self.n_total - self.n_boundary

    @property
    def degenerate(self) -> bool:
        return self.hull_volume <= 0.0

    @property
    def facets(self) -> list[Facet]:
        return [Facet(tuple(int(i) for i in idx), self.normals[k], float(self.offsets[k]))
                for k, idx in enumerate(self.facet_indices)]

    def contains(self, points, tol: float | None = None) -> np.ndarray:
        """Closed-set membership of each row of ``points`` (within ``tol``)."""
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
        if pts.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: {pts.shape[1]} != {self.dim}")
        if tol is None:
            tol = REL_TOL * self.scale
        if self.n_total == 0 or self.n_boundary == 0:
            return np.zeros(len(pts), dtype=bool)
        if self._frame is not None:
            origin, basis = self._frame
            rel = pts - origin
            if basis.shape[0] == 0:
                return np.linalg.norm(rel, axis=1) <= tol
            coords = rel @ basis.T
            resid = np.linalg.norm(rel - coords @ basis, axis=1)
            inside = resid <= tol
            if inside.any():
                inside[inside] = self._sub.contains(coords[inside], tol)
            return inside
        return ~kernels.outside_mask(pts, self.normals, self.offsets, float(tol))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "hull_volume": self.hull_volume,
            "n_total": self.n_total,
            "n_boundary": self.n_boundary,
            "n_interior": self.n_interior,
            "vertex_indices": [int(i) for i in self.vertex_indices],
            "vertices": self.vertices.tolist(),
            "facets": [
                {"vertices": [int(i) for i in idx],
                 "normal": self.normals[k].tolist(),
                 "offset": float(self.offsets[k])}
                for k, idx in enumerate(self.facet_indices)
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _empty(dim: int, n_total: int = 0) -> HullSummary:
    return HullSummary(
        dim=dim,
        vertex_indices=np.zeros(0, dtype=np.int64),
        vertices=np.zeros((0, dim)),
        facet_indices=np.zeros((0, dim), dtype=np.int64),
        normals=np.zeros((0, dim)),
        offsets=np.zeros(0),
        hull_volume=0.0,
        n_total=n_total,
    )


def _as_array(cloud) -> tuple[np.ndarray, int]:
    if isinstance(cloud, PointCloud):
        return cloud.points, cloud.dim
    arr = np.asarray(cloud, dtype=float)
    if arr.ndim != 2:
        raise ValueError("expected a PointCloud or an (n, d) array")
    return arr, arr.shape[1]


def fan_volume(points: np.ndarray, simplices: np.ndarray, apex: np.ndarray) -> float:
    """Volume of the union of cones from ``apex`` over simplicial facets."""
    if len(simplices) == 0:
        return 0.0
    d = points.shape[1]
    mats = points[simplices] - apex
    dets = np.linalg.det(mats)
    return float(np.abs(dets).sum() / math.factorial(d))


def _hull_1d(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    x = pts[:, 0]
    lo, hi = int(np.argmin(x)), int(np.argmax(x))
    if lo == hi:
        verts = np.array([lo], dtype=np.int64)
        return verts, np.zeros((0, 1), dtype=np.int64), np.zeros((0, 1)), np.zeros(0), 0.0
    verts = np.array([lo, hi], dtype=np.int64)
    facets = np.array([[lo], [hi]], dtype=np.int64)
    normals = np.array([[-1.0], [1.0]])
    offsets = np.array([x[lo], -x[hi]])
    return verts, facets, normals, offsets, float(x[hi] - x[lo])


def _hull_2d(pts: np.ndarray, scale: float):
    order = np.lexsort((pts[:, 1], pts[:, 0])).astype(np.int64)
    ring = np.asarray(kernels.monotone_chain(pts, order, REL_TOL * scale * scale),
                      dtype=np.int64)
    area = float(kernels.shoelace(pts, ring))
    nxt = np.roll(ring, -1)
    edge = pts[nxt] - pts[ring]
    normals = np.column_stack([edge[:, 1], -edge[:, 0]])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    offsets = -np.einsum("ij,ij->i", normals, pts[ring]) + 0.0
    facets = np.column_stack([ring, nxt])
    return ring, facets, normals, offsets, area


def _hull_nd(pts: np.ndarray):
    qh = ConvexHull(pts)
    simplices = np.asarray(qh.simplices, dtype=np.int64)
    verts = np.asarray(qh.vertices, dtype=np.int64)
    eq = qh.equations
    apex = pts[verts].mean(axis=0)
    vol = fan_volume(pts, simplices, apex)
    return verts, simplices, np.ascontiguousarray(eq[:, :-1]), np.ascontiguousarray(eq[:, -1]), vol


def convex_hull(cloud) -> HullSummary:
    """Convex hull summary of a :class:`PointCloud` (or ``(n, d)`` array).

    Exact duplicates are collapsed onto their first occurrence before the
    hull is built, so a repeated vertex contributes one boundary point and
    its later copies count as interior. Clouds that do not span ``R^d``
    get ``hull_volume == 0`` and no facets; their ``n_boundary`` is the
    number of extreme points of the lower-dimensional hull.
    """
    pts, dim = _as_array(cloud)
    n = len(pts)
    if n == 0:
        return _empty(dim)
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")

    _, first = np.unique(pts, axis=0, return_index=True)
    first = np.sort(first).astype(np.int64)
    upts = np.ascontiguousarray(pts[first])
    scale = float(np.max(upts.max(axis=0) - upts.min(axis=0))) if len(upts) > 1 else 1.0
    scale = scale if scale > 0 else 1.0

    frame = sub = None
    if dim == 1:
        verts, facets, normals, offsets, vol = _hull_1d(upts)
    else:
        origin = upts.mean(axis=0)
        centred = upts - origin
        if len(upts) > 1:
            _, s, vt = np.linalg.svd(centred, full_matrices=False)
            rank = int(np.sum(s > REL_TOL * s[0])) if s[0] > 0 else 0
        else:
            rank, vt = 0, np.zeros((0, dim))
        if rank < dim:
            basis = vt[:rank]
            frame = (origin, basis)
            if rank == 0:
                verts = np.array([0], dtype=np.int64)
            else:
                sub = convex_hull(centred @ basis.T)
                verts = sub.vertex_indices
            facets = np.zeros((0, dim), dtype=np.int64)
            normals, offsets, vol = np.zeros((0, dim)), np.zeros(0), 0.0
        elif dim == 2:
            verts, facets, normals, offsets, vol = _hull_2d(upts, scale)
        else:
            try:
                verts, facets, normals, offsets, vol = _hull_nd(upts)
            except QhullError:
                # full rank by SVD but Qhull still found it flat: treat as degenerate
                basis = vt[:dim - 1]
                frame = (origin, basis)
                sub = convex_hull(centred @ basis.T)
                verts = sub.vertex_indices
                facets = np.zeros((0, dim), dtype=np.int64)
                normals, offsets, vol = np.zeros((0, dim)), np.zeros(0), 0.0

    vertex_indices = first[verts]
    return HullSummary(
        dim=dim,
        vertex_indices=vertex_indices,
        vertices=pts[vertex_indices],
        facet_indices=first[facets] if facets.size else np.zeros((0, dim), dtype=np.int64),
        normals=np.ascontiguousarray(normals, dtype=float),
        offsets=np.ascontiguousarray(offsets, dtype=float),
        hull_volume=float(vol),
        n_total=n,
        scale=scale,
        _frame=frame,
        _sub=sub,
    )


def classify_points(cloud, hull: HullSummary) -> np.ndarray:
    """Label every point of ``cloud`` as ``"boundary"`` (hull vertex) or ``"interior"``."""
    pts, dim = _as_array(cloud)
    if dim != hull.dim or len(pts) != hull.n_total:
        raise ValueError("hull was not built from this cloud")
    if hull.n_boundary and not np.array_equal(pts[hull.vertex_indices], hull.vertices):
        raise ValueError("hull was not built from this cloud")
    labels = np.full(len(pts), INTERIOR, dtype="<U8")
    labels[hull.vertex_indices] = BOUNDARY
    return labels


def centroid(hull: HullSummary) -> np.ndarray:
    """Volumetric centroid of a full-dimensional hull."""
    if hull.degenerate:
        raise ValueError("centroid of a degenerate hull is undefined")
    d = hull.dim
    if d == 1:
        return hull.vertices.mean(axis=0)
    apex = hull.vertices.mean(axis=0)
    pts = _facet_points(hull)
    dets = np.abs(np.linalg.det(pts - apex))
    cents = (pts.sum(axis=1) + apex) / (d + 1)
    return (cents * dets[:, None]).sum(axis=0) / dets.sum()


def _facet_points(hull: HullSummary) -> np.ndarray:
    # facet vertex coordinates, shape (F, d, d); facets are simplices for d >= 2
    return hull.vertices[_local_facets(hull)]


def _local_facets(hull: HullSummary) -> np.ndarray:
    # facet indices re-expressed as rows of hull.vertices
    vi = hull.vertex_indices
    order = np.argsort(vi)
    return order[np.searchsorted(vi[order], hull.facet_indices)]


def simplicial_volume(hull: HullSummary, vertices: np.ndarray | None = None,
                      apex: np.ndarray | None = None) -> float:
    """Fan volume over the hull's facets, optionally with moved vertex coordinates.

    ``vertices`` replaces ``hull.vertices`` row for row; this recomputes the
    volume of an affine image of the hull without rebuilding it.
    """
    verts = hull.vertices if vertices is None else np.asarray(vertices, dtype=float)
    if hull.degenerate:
        return 0.0
    if hull.dim == 1:
        return float(verts[:, 0].max() - verts[:, 0].min())
    local = _local_facets(hull)
    if apex is None:
        apex = verts.mean(axis=0)
    return fan_volume(verts, local, apex)


# -- I/O ---------------------------------------------------------------------

def read_cloud_csv(path, dim: int | None = None) -> PointCloud:
    """Read a headerless CSV, one point per row.

    Blank lines are skipped. Raises ``ValueError`` naming the offending
    line on ragged or non-numeric rows. An empty file yields an empty
    cloud of dimension ``dim`` (default 2).
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"{path}:{lineno}: non-finite coordinate")
            if rows and len(vals) != len(rows[0]):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(vals)}")
            if dim is not None and len(vals) != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        return PointCloud(np.zeros((0, dim or 2)), dim or 2)
    return PointCloud(np.array(rows), len(rows[0]))


def write_cloud_csv(cloud, path) -> None:
    pts, _ = _as_array(cloud)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for p in pts:
            writer.writerow([repr(float(v)) for v in p])


def hull_of(points: Iterable) -> HullSummary:
    """Shorthand for ``convex_hull(PointCloud.from_points(points))``."""
    return convex_hull(PointCloud.from_points(points))
