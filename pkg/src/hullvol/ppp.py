"""Homogeneous Poisson point process on a convex body.

A realisation with intensity ``lam`` on ``C`` is drawn in two steps:
``N ~ Poisson(lam * |C|)`` and then ``N`` independent uniform points on
``C``. All randomness comes from an explicit :class:`RngStream`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Box, ConvexBody, Ellipsoid, Polytope, body_to_dict
from .hull import PointCloud, write_cloud_csv
from .streams import RngStream, as_generator

#: consecutive rejections tolerated before polytope sampling gives up
REJECTION_CAP = 1_000_000


class RejectionCapExceeded(RuntimeError):
    pass


def sample_poisson(mean: float, rng, size=None):
    """Poisson variate(s) with the given mean.

    Uses NumPy's exact sampler (inversion for small means, PTRS
    transformed rejection for large ones).
    """
    if not (mean >= 0) or not math.isfinite(mean):
        raise ValueError(f"Poisson mean must be a finite non-negative number, got {mean!r}")
    gen = as_generator(rng)
    if size is None:
        return int(gen.poisson(mean))
    return gen.poisson(mean, size=size)


def _uniform_ball(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = gen.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    r = gen.random(n) ** (1.0 / d)
    return g * (r / norms)[:, None]


def _uniform_polytope(body: Polytope, gen: np.random.Generator, n: int) -> np.ndarray:
    box = body.bounding_box()
    width = box.upper - box.lower
    accept_rate = body.volume() / box.volume()
    out = []
    have = 0
    run = 0  # consecutive rejections so far
    while have < n:
        batch = int(min(max(64, 1.2 * (n - have) / accept_rate), REJECTION_CAP))
        cand = box.lower + width * gen.random((batch, body.dim))
        hits = np.flatnonzero(body.contains(cand))
        if hits.size:
            gaps = np.diff(hits, prepend=-1 - run) - 1
            if gaps.max() >= REJECTION_CAP:
                break
            run = batch - 1 - int(hits[-1])
            take = cand[hits[: n - have]]
            out.append(take)
            have += len(take)
        else:
            run += batch
        if run >= REJECTION_CAP:
            break
    else:
        return np.concatenate(out)
    raise RejectionCapExceeded(f"{REJECTION_CAP} consecutive rejections sampling the polytope")


def sample_uniform(body: ConvexBody, rng, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on ``body``: one point for ``size=None``, else ``(size, d)``."""
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    if n < 0:
        raise ValueError("size must be non-negative")
    d = body.dim
    if isinstance(body, Box):
        pts = body.lower + (body.upper - body.lower) * gen.random((n, d))
    elif isinstance(body, Ellipsoid):
        pts = body.center + _uniform_ball(gen, n, d) @ body.axes.T
    elif isinstance(body, Polytope):
        pts = _uniform_polytope(body, gen, n) if n else np.zeros((0, d))
    else:
        raise TypeError(f"unsupported body type {type(body).__name__}")
    return pts[0] if size is None else pts


@dataclass(frozen=True, eq=False)
class PppConfig:
    body: ConvexBody
    intensity: float
    seed: int = 0

    def __post_init__(self):
        if not (self.intensity > 0) or not math.isfinite(self.intensity):
            raise ValueError(f"intensity must be positive, got {self.intensity!r}")
        if not self.body.volume() > 0:
            raise ValueError("body must have positive volume")

    @property
    def expected_count(self) -> float:
        return self.intensity * self.body.volume()


def sample_ppp(config: PppConfig, rng=None) -> PointCloud:
    """One realisation of the process described by ``config``.

    ``rng`` overrides the stream derived from ``config.seed``; the bench
    passes per-replicate streams this way.
    """
    stream = RngStream(config.seed) if rng is None else rng
    gen = as_generator(stream)
    n = sample_poisson(config.expected_count, gen)
    return PointCloud(sample_uniform(config.body, gen, n), config.body.dim)


def write_sample(cloud: PointCloud, config: PppConfig, csv_path, sidecar_path=None) -> dict:
    """Write the cloud as CSV plus a JSON sidecar; returns the sidecar dict."""
    write_cloud_csv(cloud, csv_path)
    meta = {
        "body": body_to_dict(config.body),
        "intensity": config.intensity,
        "seed": config.seed,
        "expected_count": config.expected_count,
        "n": len(cloud),
        "dim": cloud.dim,
    }
    if sidecar_path is None:
        sidecar_path = str(csv_path) + ".json"
    with open(sidecar_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
