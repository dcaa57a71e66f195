"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row reports the best-of-``repeat`` wall time per call for both
backends and the speedup. Outputs are checked for equality first.
"""
import argparse
import json
import sys
import timeit

import numpy as np

from hullvol import _pykernels

try:
    from hullvol import _ckernels
except ImportError:
    _ckernels = None


def _chain_case(n, rng):
    pts = rng.normal(size=(n, 2))
    order = np.lexsort((pts[:, 1], pts[:, 0])).astype(np.int64)
    return (pts, order, 1e-12)


def _mask_case(n, d, rng):
    normals = rng.normal(size=(64, d))
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    return (rng.normal(size=(n, d)) * 0.8, normals, -np.ones(64), 1e-9)


def cases(rng):
    for n in (1_000, 10_000, 100_000):
        args = _chain_case(n, rng)
        yield f"monotone_chain n={n}", "monotone_chain", args
        ring = _pykernels.monotone_chain(*args)
        yield f"shoelace n={n} ring={len(ring)}", "shoelace", (args[0], ring)
    for d in (2, 4, 6):
        yield f"outside_mask n=100000 d={d}", "outside_mask", _mask_case(100_000, d, rng)


def best(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write rows to this file")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    rows = []
    print(f"{'case':<36}{'python (s)':>14}{'cython (s)':>14}{'speedup':>10}")
    for label, name, call_args in cases(rng):
        py, cy = getattr(_pykernels, name), getattr(_ckernels, name)
        a, b = py(*call_args), cy(*call_args)
        if not np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                           rtol=1e-12, atol=0):
            raise SystemExit(f"{label}: backends disagree")
        t_py, t_cy = best(py, call_args, args.repeat), best(cy, call_args, args.repeat)
        rows.append({"case": label, "python_s": t_py, "cython_s": t_cy, "speedup": t_py / t_cy})
        print(f"{label:<36}{t_py:>14.3e}{t_cy:>14.3e}{t_py / t_cy:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
