"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the terminal summary.
Run just this file with ``pytest tests/test_acceptance.py -v``.
"""
import dataclasses
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from hullvol.bench import BenchConfig, fit_slope, run_bench, run_error_ratio, run_rmse, \
    write_outputs
from hullvol.geometry import Box, Ellipsoid, shipped_body
from hullvol.hull import convex_hull
from hullvol.ppp import sample_poisson
from hullvol.streams import RngStream

from oracles import extreme_points_loo

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
GRID = [250, 500, 1000, 2000, 4000]
REPORT: list[str] = []


def report(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    REPORT.append(line)
    print(line)
    assert ok, line


def _se(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.std(ddof=1) / math.sqrt(len(x)))


@pytest.fixture(scope="module")
def rate_runs():
    """Ellipse and square RMSE curves shared by criteria 5, 6 and 7."""
    names = ["naive_count", "oracle", "final"]
    ellipse = run_rmse(BenchConfig(shipped_body("ellipse"), GRID, estimators=names,
                                   replicates=500, master_seed=2019))
    square = run_rmse(BenchConfig(Box.unit(2), GRID, estimators=["oracle"],
                                  replicates=500, master_seed=2019))
    return ellipse, square


def test_ac01_oracle_unbiased():
    t0 = time.perf_counter()
    res = run_rmse(BenchConfig(Box.unit(2), [500], grid_kind="intensity",
                               estimators=["oracle"], replicates=2000, master_seed=101))
    dt = time.perf_counter() - t0
    s = res.stat("oracle", 0)
    ok = abs(s.mean - 1) <= 4 * s.stderr and dt < 30
    report("AC1 oracle unbiased", ok,
           f"mean={s.mean:.6f} |bias|/se={abs(s.bias) / s.stderr:.2f} (<=4) time={dt:.1f}s")


def test_ac02_variance_identity():
    t0 = time.perf_counter()
    res = run_rmse(BenchConfig(Box.unit(2), [500], grid_kind="intensity",
                               estimators=["oracle"], replicates=5000, master_seed=102))
    dt = time.perf_counter() - t0
    s = res.samples[0]
    ratio = 500 * np.var(s["oracle"], ddof=1) / s["missing"].mean()
    ok = 0.9 <= ratio <= 1.1 and dt < 120
    report("AC2 variance identity", ok, f"ratio={ratio:.4f} (in [0.9, 1.1]) time={dt:.1f}s")


@pytest.mark.parametrize("body", [Box.unit(2), Ellipsoid.ball(2, radius=1 / math.sqrt(math.pi))],
                         ids=["square", "disc"])
def test_ac03_final_near_unbiased(body, request):
    res = run_rmse(BenchConfig(body, [500], estimators=["final"], replicates=2000,
                               master_seed=103))
    s = res.stat("final", 0)
    ok = abs(s.bias) <= 4 * s.stderr
    report(f"AC3 final near-unbiased ({request.node.callspec.id})", ok,
           f"mean={s.mean:.6f} truth={res.config.body_volume:.6f} "
           f"|bias|/se={abs(s.bias) / s.stderr:.2f} (<=4)")


MUS = [0.5, 5.0, 50.0]


@pytest.mark.parametrize("mu", MUS)
def test_ac04_poisson_identity(mu):
    k = sample_poisson(mu, RngStream(104, MUS.index(mu)), size=1_000_000)
    x = 1.0 / (k + 1.0)
    target = -math.expm1(-mu) / mu
    z = abs(x.mean() - target) / _se(x)
    report(f"AC4 E[1/(K+1)] mu={mu}", z <= 3, f"mean={x.mean():.6f} target={target:.6f} "
           f"z={z:.2f} (<=3)")


def test_ac05_rates(rate_runs):
    ellipse, _ = rate_runs
    x, y = ellipse.curve("final")
    s_final = fit_slope(ellipse.config.expected_counts, y)
    _, y = ellipse.curve("naive_count")
    s_count = fit_slope(ellipse.config.expected_counts, y)
    ok = -1.0 <= s_final <= -0.65 and -0.6 <= s_count <= -0.4
    report("AC5 RMSE rates (ellipse)", ok,
           f"final slope={s_final:.3f} (in [-1.00, -0.65]) "
           f"N/lambda slope={s_count:.3f} (in [-0.60, -0.40])")


def test_ac06_oracle_inequality(rate_runs):
    ellipse, _ = rate_runs
    g = len(GRID) - 1
    r_final, r_oracle = ellipse.stat("final", g).rmse, ellipse.stat("oracle", g).rmse
    report("AC6 RMSE(final) <= 1.2 RMSE(oracle) at n=4000", r_final <= 1.2 * r_oracle,
           f"ratio={r_final / r_oracle:.4f}")


def test_ac07_polytope_adaptivity(rate_runs):
    ellipse, square = rate_runs
    s_ell = fit_slope(GRID, ellipse.curve("oracle")[1])
    s_sq = fit_slope(GRID, square.curve("oracle")[1])
    report("AC7 square oracle slope steeper", s_sq <= s_ell - 0.05,
           f"square={s_sq:.3f} ellipse={s_ell:.3f} gap={s_ell - s_sq:.3f} (>=0.05)")


def test_ac08_plugin_bias():
    res = run_rmse(BenchConfig(Box.unit(4), [50], estimators=["plugin", "final"],
                               replicates=5000, master_seed=108))
    s = res.stat("plugin", 0)
    below = -s.bias > 2 * s.stderr
    smp = res.samples[0]
    dominated = bool(np.all(smp["final"] >= smp["plugin"]))
    report("AC8 plugin bias sign (cube d=4, n=50)", below and dominated,
           f"mean={s.mean:.4f} bias/se={s.bias / s.stderr:.1f} (< -2) "
           f"final>=plugin on all {len(smp['final'])} replicates: {dominated}")


def test_ac09_hull_oracle():
    rng = np.random.default_rng(109)
    agree, bad = 0, []
    for i in range(1000):
        d = 2 + i % 3
        pts = rng.random((int(rng.integers(d + 1, 13)), d))
        got = set(convex_hull(pts).vertex_indices.tolist())
        if got == extreme_points_loo(pts):
            agree += 1
        else:
            bad.append(i)
    report("AC9 hull vs leave-one-out oracle", agree == 1000,
           f"{agree}/1000 agree" + (f" first mismatch case {bad[0]}" if bad else ""))


def test_ac10_dilation_improves():
    t0 = time.perf_counter()
    cfg = BenchConfig(shipped_body("polygon"), [100], replicates=500, symdiff_samples=100_000,
                      master_seed=110)
    row = run_error_ratio(cfg)[0]
    dt = time.perf_counter() - t0
    ok = row.ratio > 1 + 2 * row.ratio_stderr and dt < 300
    report("AC10 dilated hull improves (polygon, n=100)", ok,
           f"ratio={row.ratio:.4f} se={row.ratio_stderr:.4f} "
           f"margin={(row.ratio - 1) / row.ratio_stderr:.1f} se (>=2) time={dt:.1f}s")


@pytest.mark.slow
def test_ac11_cube_sweep(tmp_path):
    t0 = time.perf_counter()
    worst, rows = 0.0, 0
    for d in (3, 4, 5, 6):
        cfg = dataclasses.replace(BenchConfig.load(CONFIGS / f"rmse_cube_d{d}.json"),
                                  workers=1, plots=False)
        assert max(cfg.expected_counts) <= 2000 and cfg.replicates == 200
        out = tmp_path / f"d{d}"
        run_bench(cfg, out)
        meta = json.loads((out / "meta.json").read_text())
        worst = max(worst, meta["max_dilation_rel_err"])
        text = (out / "results.csv").read_text().splitlines()
        assert len(text) == 2 + len(cfg.grid) * len(cfg.estimators)
        rows += len(text) - 2
    dt = time.perf_counter() - t0
    ok = dt < 600 and worst <= 1e-9
    report("AC11 cube sweep d=3..6", ok,
           f"time={dt:.0f}s (<600) rows={rows} max dilation rel err={worst:.2e} (<=1e-9)")


def test_ac12_determinism(tmp_path):
    cfg = BenchConfig(Box.unit(2), [500], grid_kind="intensity", estimators=["oracle"],
                      replicates=2000, master_seed=101, plots=False)
    blobs = []
    for w in (1, 8):
        write_outputs(run_rmse(dataclasses.replace(cfg, workers=w)), tmp_path / f"w{w}")
        blobs.append((tmp_path / f"w{w}" / "results.csv").read_bytes())
    report("AC12 determinism (1 vs 8 workers)", blobs[0] == blobs[1],
           f"results.csv identical: {blobs[0] == blobs[1]} ({len(blobs[0])} bytes)")
