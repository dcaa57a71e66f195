"""Convex body models with exact volume and closed-set membership.

Three kinds of body are supported: axis-aligned boxes, ellipsoids given
as the image of the unit ball under a linear map, and polytopes given by
a vertex list. Every body converts to and from a small JSON document::

    {"kind": "box", "lower": [0, 0], "upper": [1, 1]}
    {"kind": "ellipsoid", "center": [0, 0], "axes": [[1, 0], [0, 2]]}
    {"kind": "polytope", "vertices": [[0, 0], [1, 0], [0, 1]]}
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .hull import HullSummary, centroid, convex_hull
from .streams import RngStream


class DegenerateBodyError(ValueError):
    """A body whose d-dimensional volume is zero."""


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _vec(x, name) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lower, "lower"), _vec(self.upper, "upper")
        if lo.shape != hi.shape:
            raise ValueError("lower and upper must have the same length")
        if not np.all(lo < hi):
            raise DegenerateBodyError("box needs lower[i] < upper[i] for every i")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, d: int) -> "Box":
        return cls(np.zeros(d), np.ones(d))

    @property
    def dim(self) -> int:
        return self.lower.size

    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, points) -> np.ndarray:
        pts = _points(points, self.dim)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)

    def bounding_box(self) -> "Box":
        return self

    def to_dict(self) -> dict:
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{center + axes @ u : |u| <= 1}``."""

    center: np.ndarray
    axes: np.ndarray

    def __post_init__(self):
        c = _vec(self.center, "center")
        a = np.array(self.axes, dtype=float)
        if a.shape != (c.size, c.size):
            raise ValueError(f"axes must be a {c.size}x{c.size} matrix")
        if not np.all(np.isfinite(a)) or abs(np.linalg.det(a)) == 0.0:
            raise DegenerateBodyError("ellipsoid axes matrix must be invertible")
        a.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axes", a)

    @classmethod
    def ball(cls, d: int, radius: float = 1.0, center=None) -> "Ellipsoid":
        c = np.zeros(d) if center is None else center
        return cls(c, radius * np.eye(d))

    @classmethod
    def from_radii(cls, center, radii, angle: float = 0.0) -> "Ellipsoid":
        """Planar or axis-aligned ellipsoid; ``angle`` rotates a planar one."""
        axes = np.diag(np.asarray(radii, dtype=float))
        if angle:
            if len(radii) != 2:
                raise ValueError("rotation angle only supported in the plane")
            c, s = math.cos(angle), math.sin(angle)
            axes = np.array([[c, -s], [s, c]]) @ axes
        return cls(center, axes)

    @property
    def dim(self) -> int:
        return self.center.size

    @cached_property
    def _inverse(self) -> np.ndarray:
        return np.linalg.inv(self.axes)

    def volume(self) -> float:
        return abs(float(np.linalg.det(self.axes))) * unit_ball_volume(self.dim)

    def contains(self, points) -> np.ndarray:
        pts = _points(points, self.dim)
        u = (pts - self.center) @ self._inverse.T
        return np.einsum("ij,ij->i", u, u) <= 1.0 + 1e-12

    def bounding_box(self) -> Box:
        half = np.linalg.norm(self.axes, axis=1)
        return Box(self.center - half, self.center + half)

    def to_dict(self) -> dict:
        return {"kind": "ellipsoid", "center": self.center.tolist(),
                "axes": self.axes.tolist()}


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of a finite vertex list (non-extreme points are allowed)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("vertices must be a non-empty (k, d) array")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def hull(self) -> HullSummary:
        return convex_hull(self.vertices)

    def volume(self) -> float:
        h = self.hull
        if h.degenerate:
            raise DegenerateBodyError("polytope vertices are affinely dependent (zero volume)")
        return h.hull_volume

    def contains(self, points) -> np.ndarray:
        pts = _points(points, self.dim)
        return self.hull.contains(pts)

    def bounding_box(self) -> Box:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        if not np.all(lo < hi):
            raise DegenerateBodyError("polytope is flat along some axis")
        return Box(lo, hi)

    def to_dict(self) -> dict:
        return {"kind": "polytope", "vertices": self.vertices.tolist()}


ConvexBody = Union[Box, Ellipsoid, Polytope]


def _points(points, dim) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != dim:
        raise ValueError(f"dimension mismatch: point has {pts.shape[1]} coords, body has {dim}")
    return pts


# -- module-level operations ---------------------------------------------------

def volume(body: ConvexBody) -> float:
    """Exact Lebesgue measure of ``body``."""
    return body.volume()


def contains(body: ConvexBody, p) -> bool | np.ndarray:
    """Closed-set membership; a single point gives a bool, a 2-d array a mask."""
    arr = np.asarray(p, dtype=float)
    mask = body.contains(arr)
    return bool(mask[0]) if arr.ndim == 1 else mask


def bounding_box(body: ConvexBody) -> Box:
    return body.bounding_box()


def barycentre(vertices) -> np.ndarray:
    """Coordinate-wise mean of a vertex list."""
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    if v.shape[0] == 0 or v.size == 0:
        raise ValueError("barycentre of an empty vertex list")
    return v.mean(axis=0)


def hull_centre(h: HullSummary, method: str = "vertex") -> np.ndarray:
    """Centre used for dilation: ``"vertex"`` mean or volumetric ``"centroid"``."""
    if method == "vertex":
        return barycentre(h.vertices)
    if method == "centroid":
        return centroid(h)
    raise ValueError(f"unknown centre method {method!r}")


def dilate(poly: Polytope, center, factor: float) -> Polytope:
    """Scale ``poly`` about ``center``; the volume scales by ``factor**d``."""
    if not factor > 0:
        raise ValueError("dilation factor must be positive")
    c = np.asarray(center, dtype=float)
    if c.shape != (poly.dim,):
        raise ValueError("centre dimension does not match polytope")
    return Polytope(c + factor * (poly.vertices - c))


def symdiff_volume(a: ConvexBody, b: ConvexBody, n_samples: int, seed) -> tuple[float, float]:
    """Monte Carlo volume of ``a`` symmetric-difference ``b``.

    Samples uniformly in the bounding box of ``a`` union ``b``. Returns the
    estimate and its standard error. ``seed`` is an int or an
    :class:`~hullvol.streams.RngStream`.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    if a.dim != b.dim:
        raise ValueError("bodies have different dimensions")
    ba, bb = a.bounding_box(), b.bounding_box()
    lo = np.minimum(ba.lower, bb.lower)
    hi = np.maximum(ba.upper, bb.upper)
    box_vol = float(np.prod(hi - lo))
    gen = seed.generator if isinstance(seed, RngStream) else RngStream(int(seed)).generator
    pts = lo + (hi - lo) * gen.random((int(n_samples), a.dim))
    disagree = a.contains(pts) != b.contains(pts)
    p = disagree.mean()
    est = box_vol * p
    stderr = box_vol * math.sqrt(p * (1 - p) / n_samples) if n_samples > 1 else 0.0
    return float(est), float(stderr)


# -- JSON --------------------------------------------------------------------

def body_from_dict(spec: dict) -> ConvexBody:
    """Parse a body document; raises ``ValueError`` on a malformed one."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError('body spec must be an object with a "kind" field')
    kind = spec["kind"]
    try:
        if kind == "box":
            return Box(spec["lower"], spec["upper"])
        if kind == "ellipsoid":
            return Ellipsoid(spec["center"], spec["axes"])
        if kind == "polytope":
            p = Polytope(spec["vertices"])
            p.volume()
            return p
    except KeyError as exc:
        raise ValueError(f"{kind} spec is missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ValueError(f"bad {kind} spec: {exc}") from None
    raise ValueError(f"unknown body kind {kind!r}")


def body_to_dict(body: ConvexBody) -> dict:
    return body.to_dict()


def load_body(text_or_path: str) -> ConvexBody:
    """Body from inline JSON text or from a path to a JSON file."""
    s = text_or_path.strip()
    if s.startswith("{"):
        doc = json.loads(s)
    else:
        with open(text_or_path) as fh:
            doc = json.load(fh)
    return body_from_dict(doc)



def shipped_body(name: str) -> ConvexBody:
    """Bodies bundled with the package: ``"polygon"`` and ``"ellipse"``."""
    from importlib.resources import files
    path = files("hullvol") / "data" / f"{name}.json"
    if not path.is_file():
        raise ValueError(f"no shipped body named {name!r}")
    return body_from_dict(json.loads(path.read_text()))
