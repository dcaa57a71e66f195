"""Command-line interface: ``hullvol {sample,estimate,dilate,hull,bench}``.

Exit codes: 0 success, 1 usage error (bad flags, bad body/config,
non-positive intensity), 2 runtime error (unreadable cloud, degenerate
hull, failed replicate).
"""
from __future__ import annotations

import argparse
import json
import logging
import platform
import sys

import numpy as np
import scipy

from . import __version__, kernels
from . import estimators as est
from .bench import BenchConfig, ReplicateError, run_bench
from .geometry import load_body, volume
from .hull import convex_hull, read_cloud_csv, write_cloud_csv
from .ppp import PppConfig, RejectionCapExceeded, sample_ppp, write_sample

log = logging.getLogger("hullvol")

DEFAULT_SEED = 20190101


class UsageError(Exception):
    pass


class RuntimeFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _body(spec: str):
    try:
        return load_body(spec)
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad body spec: {exc}") from None


def _positive(value: float | None, flag: str) -> None:
    if value is not None and not value > 0:
        raise UsageError(f"{flag} must be positive, got {value}")


def _cloud(path, dim=None):
    try:
        return read_cloud_csv(path, dim)
    except OSError as exc:
        raise RuntimeFailure(f"cannot read {path}: {exc}") from None
    except ValueError as exc:
        raise RuntimeFailure(f"malformed cloud: {exc}") from None


def _log_context(**fields):
    fields.update(version=__version__, python=platform.python_version(),
                  numpy=np.__version__, scipy=scipy.__version__, kernels=kernels.BACKEND)
    log.info("run %s", json.dumps(fields, sort_keys=True, default=str))


def cmd_sample(args) -> int:
    _positive(args.intensity, "--intensity")
    body = _body(args.body)
    _log_context(command="sample", body=body.to_dict(), intensity=args.intensity, seed=args.seed)
    try:
        config = PppConfig(body, args.intensity, args.seed)
        cloud = sample_ppp(config)
    except RejectionCapExceeded as exc:
        raise RuntimeFailure(str(exc)) from None
    meta = write_sample(cloud, config, args.out, args.sidecar)
    print(meta["n"])
    return 0


def _estimate_rows(cloud, lam, truth_volume):
    h = convex_hull(cloud)
    rows = []
    for name, e in est.estimate_all(h, cloud, lam).items():
        row = {"estimator": name, "value": e.value, "used_intensity": e.used_intensity}
        if e.note:
            row["note"] = e.note
        if truth_volume is not None:
            row["error"] = e.value - truth_volume
            row["relative_error"] = (e.value - truth_volume) / truth_volume
        rows.append(row)
    return h, rows


def cmd_estimate(args) -> int:
    _positive(args.intensity, "--intensity")
    truth = _body(args.truth) if args.truth else None
    cloud = _cloud(args.cloud, args.dim)
    _log_context(command="estimate", cloud=args.cloud, intensity=args.intensity,
                 truth=truth.to_dict() if truth else None)
    if len(cloud) == 0:
        log.warning("cloud %s is empty; all estimates are zero", args.cloud)
    if truth is not None and truth.dim != cloud.dim and len(cloud):
        raise UsageError("truth body dimension does not match the cloud")
    truth_volume = volume(truth) if truth is not None else None
    h, rows = _estimate_rows(cloud, args.intensity, truth_volume)
    if args.json:
        doc = {
            "cloud": {"n_total": h.n_total, "n_boundary": h.n_boundary,
                      "n_interior": h.n_interior, "hull_volume": h.hull_volume, "dim": h.dim},
            "intensity": args.intensity,
            "truth_volume": truth_volume,
            "estimates": rows,
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        cols = ["estimator", "value"] + (["error", "relative_error"] if truth else [])
        print(f"# N={h.n_total} N_boundary={h.n_boundary} N_interior={h.n_interior} "
              f"hull_volume={h.hull_volume:.10g}")
        print("  ".join(f"{c:>15}" for c in cols))
        for r in rows:
            cells = [f"{r['estimator']:>15}"] + [f"{r[c]:>15.10g}" for c in cols[1:]]
            print("  ".join(cells))
    return 0


def cmd_dilate(args) -> int:
    cloud = _cloud(args.cloud, args.dim)
    _log_context(command="dilate", cloud=args.cloud, centre=args.centre)
    h = convex_hull(cloud)
    if h.degenerate:
        raise RuntimeFailure("hull has zero volume; nothing to dilate")
    poly = est.dilated_hull(h, args.centre)
    write_cloud_csv(poly.vertices, args.out)
    doc = {"vertices": len(poly.vertices), "volume": poly.volume(),
           "final_estimate": est.final(h).value, "factor": est.dilation_factor(h)}
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"wrote {doc['vertices']} vertices to {args.out}; volume {doc['volume']:.12g} "
              f"(final estimate {doc['final_estimate']:.12g}, factor {doc['factor']:.12g})")
    return 0


def cmd_hull(args) -> int:
    cloud = _cloud(args.cloud, args.dim)
    _log_context(command="hull", cloud=args.cloud)
    text = convex_hull(cloud).to_json(indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_bench(args) -> int:
    try:
        config = BenchConfig.load(args.config)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad bench config: {exc}") from None
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.no_plots:
        overrides["plots"] = False
    if overrides:
        doc = {k: getattr(config, k) for k in config.__dataclass_fields__}
        doc.update(overrides)
        config = BenchConfig(**doc)
    _log_context(command="bench", config=config.to_dict(), config_hash=config.config_hash())
    try:
        result, ratios = run_bench(config, args.out)
    except (ReplicateError, RejectionCapExceeded) as exc:
        raise RuntimeFailure(str(exc)) from None
    print(f"wrote {args.out}/results.csv ({len(result.stats)} rows, config {result.config_hash})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hullvol", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="simulate a Poisson point process on a body")
    s.add_argument("--body", required=True, help="body JSON text or path to a JSON file")
    s.add_argument("--intensity", type=float, required=True, help="points per unit volume")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--out", required=True, help="CSV path for the points")
    s.add_argument("--sidecar", help="JSON sidecar path (default: OUT.json)")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("estimate", help="volume estimates from a point cloud")
    e.add_argument("--cloud", required=True)
    e.add_argument("--intensity", type=float, help="known intensity; enables oracle-type estimators")
    e.add_argument("--truth", help="true body (JSON text or file) to report errors against")
    e.add_argument("--dim", type=int, help="dimension, needed only for an empty file")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_estimate)

    d = sub.add_parser("dilate", help="write the dilated hull set estimator")
    d.add_argument("--cloud", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--centre", choices=["vertex", "centroid"], default="vertex")
    d.add_argument("--dim", type=int)
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_dilate)

    h = sub.add_parser("hull", help="export the convex hull summary as JSON")
    h.add_argument("--cloud", required=True)
    h.add_argument("--out")
    h.add_argument("--dim", type=int)
    h.set_defaults(func=cmd_hull)

    b = sub.add_parser("bench", help="Monte Carlo benchmark from a JSON config")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--workers", type=int)
    b.add_argument("--no-plots", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, --help/--version exit 0
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr,
                        force=True)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hullvol: error: {exc}", file=sys.stderr)
        return 1
    except RuntimeFailure as exc:
        print(f"hullvol: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
