"""Monte Carlo harness: RMSE curves, rate slopes, missing-volume moments
and the dilated-hull error ratio.

Every replicate draws its own process realisation from the stream keyed
by ``(master_seed, grid_index, replicate)``, so results do not depend on
how replicates are spread over worker processes. Aggregation happens in
replicate order after all workers are done.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import estimators as est
from .geometry import (ConvexBody, Ellipsoid, Polytope, body_from_dict, body_to_dict,
                       hull_centre, symdiff_volume)
from .hull import convex_hull, simplicial_volume
from .ppp import PppConfig, sample_ppp
from .streams import RngStream
from .svgplot import line_chart

log = logging.getLogger(__name__)

_UNHASHED = frozenset({"workers", "plots"})


class ReplicateError(RuntimeError):
    def __init__(self, grid_index, replicate, cause):
        super().__init__(f"replicate {replicate} at grid point {grid_index} failed: {cause!r}")
        self.grid_index = grid_index
        self.replicate = replicate


@dataclass(frozen=True, eq=False)
class BenchConfig:
    body: ConvexBody
    grid: tuple
    grid_kind: str = "count"          # "count" (n = lam |C|) or "intensity"
    estimators: tuple = est.ESTIMATORS
    replicates: int = 500
    master_seed: int = 0
    symdiff_samples: int = 100_000
    centre: str = "vertex"
    check_dilation: bool = False
    error_ratio: bool = False
    dilation_override: float | None = None  # fixed factor in place of ((N+1)/(N_i+1))^(1/d)
    workers: int = 1
    plots: bool = True
    name: str = "bench"

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise ValueError("grid must not be empty")
        if not all(g > 0 and math.isfinite(g) for g in grid):
            raise ValueError("grid values must be positive")
        if self.grid_kind not in ("count", "intensity"):
            raise ValueError("grid_kind must be 'count' or 'intensity'")
        if self.replicates < 2:
            raise ValueError("need at least 2 replicates")
        unknown = set(self.estimators) - set(est.ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators {sorted(unknown)}")
        if self.symdiff_samples < 1:
            raise ValueError("symdiff_samples must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "estimators", tuple(self.estimators))

    @property
    def body_volume(self) -> float:
        return self.body.volume()

    @property
    def intensities(self) -> list[float]:
        if self.grid_kind == "intensity":
            return list(self.grid)
        v = self.body_volume
        return [g / v for g in self.grid]

    @property
    def expected_counts(self) -> list[float]:
        v = self.body_volume
        return [lam * v for lam in self.intensities]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "body": body_to_dict(self.body),
            "grid": list(self.grid),
            "grid_kind": self.grid_kind,
            "estimators": list(self.estimators),
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "symdiff_samples": self.symdiff_samples,
            "centre": self.centre,
            "check_dilation": self.check_dilation,
            "error_ratio": self.error_ratio,
            "dilation_override": self.dilation_override,
            "workers": self.workers,
            "plots": self.plots,
        }

    @classmethod
    def from_dict(cls, doc: dict, base_dir=None) -> "BenchConfig":
        doc = dict(doc)
        if "body_file" in doc:
            path = Path(doc.pop("body_file"))
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            with open(path) as fh:
                doc["body"] = json.load(fh)
        if "body" not in doc:
            raise ValueError("config needs a body or body_file")
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        doc["body"] = body_from_dict(doc["body"])
        if "grid" not in doc:
            raise ValueError("config needs a grid")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "BenchConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), base_dir=Path(path).parent)

    def config_hash(self) -> str:
        doc = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class EstimatorStats:
    estimator: str
    intensity: float
    expected_count: float
    mean: float
    bias: float
    rmse: float
    rmse_normalized: float
    stderr: float
    variance: float


@dataclass
class Moments:
    intensity: float
    expected_count: float
    missing_mean: float
    missing_var: float
    missing_stderr: float
    n_boundary_mean: float
    n_boundary_stderr: float
    n_total_mean: float


@dataclass
class BenchResult:
    config: BenchConfig
    stats: list[EstimatorStats]
    moments: list[Moments]
    # raw per-replicate arrays per grid index: {"final": array(M), "missing": ..., ...}
    samples: list[dict] = field(default_factory=list, repr=False)

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()

    def stat(self, estimator: str, grid_index: int) -> EstimatorStats:
        lam = self.config.intensities[grid_index]
        for s in self.stats:
            if s.estimator == estimator and s.intensity == lam:
                return s
        raise KeyError((estimator, grid_index))

    def curve(self, estimator: str) -> tuple[np.ndarray, np.ndarray]:
        rows = [s for s in self.stats if s.estimator == estimator]
        return (np.array([s.intensity for s in rows]), np.array([s.rmse for s in rows]))


# -- replicate evaluation ------------------------------------------------------

def _one_replicate(config: BenchConfig, grid_index: int, rep: int, volume: float) -> dict:
    lam = config.intensities[grid_index]
    stream = RngStream(config.master_seed, grid_index, rep)
    cloud = sample_ppp(PppConfig(config.body, lam, config.master_seed), rng=stream)
    h = convex_hull(cloud)
    row = {
        "missing": volume - h.hull_volume,
        "n_boundary": float(h.n_boundary),
        "n_total": float(h.n_total),
    }
    values = est.estimate_all(h, cloud, lam, config.estimators)
    for name in config.estimators:
        row[name] = values[name].value
    if config.check_dilation or config.error_ratio:
        if h.degenerate:
            row["dilation_rel_err"] = 0.0 if h.n_total == 0 else math.nan
            if config.error_ratio:
                # nothing to dilate; both set errors equal |C|
                row["symdiff_hull"] = row["symdiff_dilated"] = volume
        else:
            factor = est.dilation_factor(h) if config.dilation_override is None \
                else config.dilation_override
            centre = hull_centre(h, config.centre)
            moved = centre + factor * (h.vertices - centre)
            target = est.final(h).value if config.dilation_override is None \
                else h.hull_volume * factor ** h.dim
            dil_vol = simplicial_volume(h, moved)
            row["dilation_rel_err"] = abs(dil_vol - target) / target
            if config.error_ratio:
                hull_poly = Polytope(h.vertices)
                dilated = Polytope(moved)
                row["symdiff_hull"], _ = symdiff_volume(
                    config.body, hull_poly, config.symdiff_samples, stream.child(1))
                row["symdiff_dilated"], _ = symdiff_volume(
                    config.body, dilated, config.symdiff_samples, stream.child(1))
    return row


def _run_chunk(args) -> list[dict]:
    config, grid_index, reps, volume = args
    out = []
    for rep in reps:
        try:
            out.append(_one_replicate(config, grid_index, rep, volume))
        except Exception as exc:  # abort with the replicate index attached
            raise ReplicateError(grid_index, rep, exc) from exc
    return out


def _collect(config: BenchConfig) -> list[dict]:
    """Per grid point, a dict of per-replicate arrays, in replicate order."""
    volume = config.body_volume
    m = config.replicates
    tasks = []
    n_chunks = max(1, config.workers * 4) if config.workers > 1 else 1
    bounds = np.linspace(0, m, n_chunks + 1).astype(int)
    for g in range(len(config.grid)):
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b > a:
                tasks.append((config, g, range(int(a), int(b)), volume))
    if config.workers > 1:
        ctx = get_context("fork") if "fork" in _start_methods() else None
        with ProcessPoolExecutor(max_workers=config.workers, mp_context=ctx) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    else:
        chunks = [_run_chunk(t) for t in tasks]
    per_grid: list[list[dict]] = [[] for _ in config.grid]
    for task, rows in zip(tasks, chunks):
        per_grid[task[1]].extend(rows)
    out = []
    for rows in per_grid:
        keys = rows[0].keys()
        out.append({k: np.array([r[k] for r in rows], dtype=float) for k in keys})
    return out


def _start_methods():
    import multiprocessing
    return multiprocessing.get_all_start_methods()


def _stderr(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(len(x)))


def run_rmse(config: BenchConfig) -> BenchResult:
    """Monte Carlo mean, bias, RMSE and standard error of every estimator per grid point."""
    volume = config.body_volume
    samples = _collect(config)
    stats, moments = [], []
    for g, (lam, n) in enumerate(zip(config.intensities, config.expected_counts)):
        s = samples[g]
        for name in config.estimators:
            v = s[name]
            mean = float(v.mean())
            rmse = float(np.sqrt(np.mean((v - volume) ** 2)))
            stats.append(EstimatorStats(
                estimator=name, intensity=lam, expected_count=n, mean=mean,
                bias=mean - volume, rmse=rmse, rmse_normalized=rmse / volume,
                stderr=_stderr(v), variance=float(np.var(v, ddof=1))))
        moments.append(Moments(
            intensity=lam, expected_count=n,
            missing_mean=float(s["missing"].mean()),
            missing_var=float(np.var(s["missing"], ddof=1)),
            missing_stderr=_stderr(s["missing"]),
            n_boundary_mean=float(s["n_boundary"].mean()),
            n_boundary_stderr=_stderr(s["n_boundary"]),
            n_total_mean=float(s["n_total"].mean())))
    return BenchResult(config, stats, moments, samples)


def fit_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3 or len(np.unique(x)) < 2:
        raise ValueError("need at least 3 grid points with distinct abscissae")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive values")
    lx, ly = np.log(x), np.log(y)
    lx0 = lx - lx.mean()
    return float(np.dot(lx0, ly - ly.mean()) / np.dot(lx0, lx0))


def fit_rate_slope(result: BenchResult, estimator_id: str) -> float:
    """Slope of log RMSE against log intensity for one estimator."""
    x, y = result.curve(estimator_id)
    return fit_slope(x, y)


@dataclass
class RatioRow:
    intensity: float
    expected_count: float
    hull_mean: float
    hull_stderr: float
    dilated_mean: float
    dilated_stderr: float
    ratio: float
    ratio_stderr: float


def ratio_table(config: BenchConfig, samples: list[dict]) -> list[RatioRow]:
    rows = []
    for g, (lam, n) in enumerate(zip(config.intensities, config.expected_counts)):
        a = samples[g]["symdiff_hull"]
        b = samples[g]["symdiff_dilated"]
        ok = np.isfinite(a) & np.isfinite(b)
        a, b = a[ok], b[ok]
        m = len(a)
        ma, mb = float(a.mean()), float(b.mean())
        ratio = ma / mb if mb > 0 else math.inf
        # delta method with the pairing covariance
        cov = np.cov(a, b, ddof=1)
        rel = cov[0, 0] / ma ** 2 + cov[1, 1] / mb ** 2 - 2 * cov[0, 1] / (ma * mb) \
            if ma > 0 and mb > 0 else math.nan
        rows.append(RatioRow(lam, n, ma, _stderr(a), mb, _stderr(b), ratio,
                             float(abs(ratio) * math.sqrt(max(rel, 0.0) / m))))
    return rows


def run_error_ratio(config: BenchConfig) -> list[RatioRow]:
    """``E|C sym-diff hull| / E|C sym-diff dilated hull|`` per grid point."""
    if not isinstance(config.body, (Polytope, Ellipsoid)):
        raise ValueError("error ratio needs a polytope or ellipsoid body")
    cfg = config if config.error_ratio else _replace(config, error_ratio=True)
    return ratio_table(cfg, _collect(cfg))


def _replace(config: BenchConfig, **changes) -> BenchConfig:
    doc = {k: getattr(config, k) for k in config.__dataclass_fields__}
    doc.update(changes)
    return BenchConfig(**doc)


# -- output --------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path: Path, header: list[str], rows, config_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash: {config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(getattr(r, k)) for k in header])


RESULT_COLUMNS = ["estimator", "intensity", "expected_count", "mean", "bias", "rmse",
                  "rmse_normalized", "stderr"]
MOMENT_COLUMNS = ["intensity", "expected_count", "missing_mean", "missing_var",
                  "missing_stderr", "n_boundary_mean", "n_boundary_stderr", "n_total_mean"]
RATIO_COLUMNS = ["intensity", "expected_count", "hull_mean", "hull_stderr", "dilated_mean",
                 "dilated_stderr", "ratio", "ratio_stderr"]


def write_outputs(result: BenchResult, out_dir, ratios: list[RatioRow] | None = None) -> dict:
    """Write results.csv, moments.csv (and error_ratio.csv, plots/); return meta."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = result.config_hash
    _write_rows(out / "results.csv", RESULT_COLUMNS, result.stats, h)
    _write_rows(out / "moments.csv", MOMENT_COLUMNS, result.moments, h)
    if ratios is not None:
        _write_rows(out / "error_ratio.csv", RATIO_COLUMNS, ratios, h)
    cfg = result.config
    meta = {"config": cfg.to_dict(), "config_hash": h, "master_seed": cfg.master_seed,
            "body_volume": cfg.body_volume}
    if "dilation_rel_err" in result.samples[0]:
        worst = max(float(np.nanmax(s["dilation_rel_err"])) for s in result.samples)
        meta["max_dilation_rel_err"] = worst
    with open(out / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if cfg.plots:
        plots = out / "plots"
        plots.mkdir(exist_ok=True)
        series = {}
        for name in cfg.estimators:
            rows = [s for s in result.stats if s.estimator == name]
            series[name] = ([s.expected_count for s in rows], [s.rmse_normalized for s in rows])
        (plots / "rmse.svg").write_text(line_chart(
            series, title=f"{cfg.name}: normalised RMSE", xlabel="n = lambda |C|",
            ylabel="RMSE / |C|"))
        if ratios is not None:
            (plots / "error_ratio.svg").write_text(line_chart(
                {"hull / dilated": ([r.expected_count for r in ratios], [r.ratio for r in ratios])},
                title=f"{cfg.name}: symmetric-difference error ratio", xlabel="n = lambda |C|",
                ylabel="ratio", logy=False))
    return meta


def run_bench(config: BenchConfig, out_dir=None) -> tuple[BenchResult, list[RatioRow] | None]:
    """Full bench run: RMSE sweep, error ratio if configured, outputs if ``out_dir``."""
    log.info("bench %s: body=%s grid=%s M=%d seed=%d workers=%d", config.name,
             json.dumps(body_to_dict(config.body)), list(config.grid), config.replicates,
             config.master_seed, config.workers)
    result = run_rmse(config)
    ratios = ratio_table(config, result.samples) if config.error_ratio else None
    if out_dir is not None:
        write_outputs(result, out_dir, ratios)
    return result, ratios


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
