"""Volume estimators built on the convex hull of the observed points.

Notation used below: ``N`` points in total, ``N_b`` of them hull vertices,
``N_i = N - N_b`` inside, ``V = |conv(X)|`` and ``lam`` the intensity.

=============  ===============================================  ==========
estimator      value                                            needs lam
=============  ===============================================  ==========
naive_hull     ``V``                                            no
naive_count    ``N / lam``                                      yes
oracle         ``V + N_b / lam``                                yes
plugin         ``V (1 + N_b / N)`` (0 when N = 0)               no
final          ``V (N + 1) / (N_i + 1)``                        no
pseudo         ``V + V N_b / (N_i + 1) + N_b exp(-lam V)/lam``  yes
gayraud        three-sample split, see :func:`gayraud`          no
=============  ===============================================  ==========
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Polytope, dilate, hull_centre
from .hull import HullSummary, PointCloud, convex_hull

ESTIMATORS = ("naive_hull", "naive_count", "oracle", "plugin", "final", "pseudo", "gayraud")
NEEDS_INTENSITY = frozenset({"naive_count", "oracle", "pseudo"})


@dataclass(frozen=True)
class Estimate:
    estimator_id: str
    value: float
    used_intensity: bool
    note: str | None = None

    def __post_init__(self):
        if self.estimator_id not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator_id!r}")
        if not self.value >= 0:
            raise ValueError(f"estimate must be non-negative, got {self.value!r}")


def _check_intensity(lam: float) -> float:
    lam = float(lam)
    if not lam > 0 or not math.isfinite(lam):
        raise ValueError(f"intensity must be positive, got {lam!r}")
    return lam


def naive_hull(h: HullSummary) -> Estimate:
    return Estimate("naive_hull", h.hull_volume, False)


def naive_count(n_total: int, lam: float) -> Estimate:
    lam = _check_intensity(lam)
    return Estimate("naive_count", n_total / lam, True)


def oracle(h: HullSummary, lam: float) -> Estimate:
    """Rao-Blackwellised count estimator for known intensity (UMVU)."""
    lam = _check_intensity(lam)
    return Estimate("oracle", h.hull_volume + h.n_boundary / lam, True)


def plugin(h: HullSummary) -> Estimate:
    """Oracle with the intensity replaced by its MLE ``N / V``."""
    if h.n_total == 0:
        return Estimate("plugin", 0.0, False)
    return Estimate("plugin", h.hull_volume * (1.0 + h.n_boundary / h.n_total), False)


def final(h: HullSummary) -> Estimate:
    """Intensity-free, nearly unbiased estimator ``V (N + 1) / (N_i + 1)``."""
    return Estimate("final", (h.n_total + 1) / (h.n_interior + 1) * h.hull_volume, False)


def pseudo(h: HullSummary, lam: float) -> Estimate:
    """Exactly unbiased companion of :func:`final`; needs the intensity.

    The correction ``V N_b exp(-lam V) / (lam V)`` is written as
    ``N_b exp(-lam V) / lam`` so that it stays finite at ``V = 0``.
    """
    lam = _check_intensity(lam)
    v, nb = h.hull_volume, h.n_boundary
    value = v + v * nb / (h.n_interior + 1) + nb * math.exp(-lam * v) / lam
    return Estimate("pseudo", value, True)


def gayraud_split(n: int) -> tuple[slice, slice, slice]:
    """Index slices of the hull sample, the counting sample and the scale sample.

    Each part gets ``n // 3`` points; the ``n % 3`` leftovers go to the
    first (hull) part.
    """
    k = n // 3
    r = n - 3 * k
    return slice(0, k + r), slice(k + r, 2 * k + r), slice(2 * k + r, n)


def gayraud(cloud: PointCloud, lam=None) -> Estimate:
    """Three-sample estimator ``|conv X| + |conv X''| / k * #{X'_i outside conv X}``.

    ``lam`` is accepted for a uniform call signature and ignored. With
    fewer than three points the correction vanishes and the value is the
    hull volume of the whole cloud.
    """
    n = len(cloud)
    k = n // 3
    if k == 0:
        return Estimate("gayraud", convex_hull(cloud).hull_volume, False,
                        note="fewer than 3 points: hull volume only")
    first, second, third = gayraud_split(n)
    pts = cloud.points
    hull_x = convex_hull(pts[first])
    hull_xpp = convex_hull(pts[third])
    outside = int(np.count_nonzero(~hull_x.contains(pts[second])))
    value = hull_x.hull_volume + hull_xpp.hull_volume / k * outside
    return Estimate("gayraud", value, False)


def dilation_factor(h: HullSummary) -> float:
    return ((h.n_total + 1) / (h.n_interior + 1)) ** (1.0 / h.dim)


def dilated_hull(h: HullSummary, centre: str = "vertex") -> Polytope:
    """Hull scaled about its centre so that its volume equals :func:`final`."""
    if h.degenerate:
        raise ValueError("cannot dilate a degenerate hull (zero volume)")
    return dilate(Polytope(h.vertices), hull_centre(h, centre), dilation_factor(h))


def estimate_all(h: HullSummary, cloud: PointCloud | None = None, lam: float | None = None,
                 which=ESTIMATORS) -> dict[str, Estimate]:
    """Every requested estimator that the inputs allow.

    Intensity-based estimators are skipped when ``lam`` is None, and
    ``gayraud`` is skipped when no cloud is given.
    """
    out = {}
    for name in which:
        if name in NEEDS_INTENSITY and lam is None:
            continue
        if name == "naive_hull":
            out[name] = naive_hull(h)
        elif name == "naive_count":
            out[name] = naive_count(h.n_total, lam)
        elif name == "oracle":
            out[name] = oracle(h, lam)
        elif name == "plugin":
            out[name] = plugin(h)
        elif name == "final":
            out[name] = final(h)
        elif name == "pseudo":
            out[name] = pseudo(h, lam)
        elif name == "gayraud":
            if cloud is not None:
                out[name] = gayraud(cloud)
        else:
            raise ValueError(f"unknown estimator {name!r}")
    return out
