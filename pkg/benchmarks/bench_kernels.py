"""Compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--n 2000]

Both backends are imported directly so one process times both. Each row
reports the best-of-``repeat`` wall time and the max relative difference
between the two outputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from degenheat import _kernels_py as py

try:
    from degenheat import _ckernels as cy
except ImportError:  # pragma: no cover - depends on the build
    cy = None


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(n: int, rng: np.random.Generator):
    h = 1.0 / n
    diag = -2.0 / h**2 * (1.0 + rng.uniform(0.0, 0.5, n))
    off = 1.0 / h**2 * np.ones(n - 1)
    y0 = rng.standard_normal((n, 8))
    shifts = np.linspace(diag.min() * 2.5, 0.0, 400)
    x = np.linspace(-1.0, 1.0, 20000)
    vec = np.sin(np.linspace(0.0, 40.0 * np.pi, n))
    return {
        "cn_propagate": lambda m: m.cn_propagate(diag, off, y0, 1e-4, 200, 2),
        "sturm_count": lambda m: m.sturm_count(diag, off, shifts),
        "gegenbauer_table": lambda m: m.gegenbauer_table(64, 0.5, x),
        "oscillation_spacing": lambda m: m.oscillation_spacing(vec),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)
    cases = _cases(args.n, np.random.default_rng(args.seed))
    print(f"{'kernel':<22}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max rel diff':>14}")
    for name, call in cases.items():
        tp, op = _best(lambda: call(py), args.repeat)
        if cy is None:
            print(f"{name:<22}{tp:>12.4g}{'n/a':>12}{'':>10}{'':>14}")
            continue
        tc, oc = _best(lambda: call(cy), args.repeat)
        a, b = np.asarray(op, float), np.asarray(oc, float)
        diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))
        print(f"{name:<22}{tp:>12.4g}{tc:>12.4g}{tp / tc:>10.2f}{diff:>14.3g}")


if __name__ == "__main__":
    main()
