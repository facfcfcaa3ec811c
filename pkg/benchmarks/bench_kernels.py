"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]

Times the three kernel entry points plus an end-to-end fit, once per
backend, and reports the best-of-N wall time and the speed-up.  The fit
is timed in a subprocess per backend because the backend is fixed at import.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from qgrowth._kernels import _pure

try:
    from qgrowth._kernels import _ckernels
except ImportError:
    _ckernels = None

GRID = np.linspace(0.0, 10.0, 201)

CASES = {
    "rhs x1e4": lambda k: [k.unified_rhs(0.3, 0.5, 2.0, 1.5, 1.0, 0.0) for _ in range(10_000)],
    "dopri5 Verhulst": lambda k: k.dopri5_unified(
        0.0, 1.0, 1.0, 1.0, 0.0, 1e-3, GRID, 1e-9, 1e-12, math.inf, 100_000, math.inf, False),
    "dopri5 Turner": lambda k: k.dopri5_unified(
        1.0, 2.0, 1.5, 1.0, 0.0, 1e-3, GRID, 1e-9, 1e-12, math.inf, 100_000, math.inf, False),
    "dopri5 branch point": lambda k: k.dopri5_unified(
        0.9, 1.0, 0.5, 1.0, 0.0, 1e-3, GRID, 1e-9, 1e-12, math.inf, 100_000, math.inf, True),
    "beta quadrature": lambda k: k.power_quad(0.0, 1.0 / 0.9, -0.5, 0.0, 0.5 ** 0.9,
                                              1e-14, 1e-13),
}

FIT_SCRIPT = """
import time, numpy as np
from qgrowth.fitkit import ObservationSeries, fit
from qgrowth.dynamics import integrate
from qgrowth.models import model_table
t = np.linspace(0, 10, 50)
prm = model_table("TsoularisWallace", qprime=0.0, q=2.0, gamma=1.5, kappa=1.0, p0=0.01)
series = ObservationSeries(t, integrate(prm, t).values)
init = {"q": 3.0, "gamma": 1.5, "kappa": 1.5, "p0": 0.015}
start = time.perf_counter()
fit(series, "TsoularisWallace", ["q", "kappa", "p0"], init, fixed={"qprime": 0.0, "gamma": 1.5})
print(time.perf_counter() - start)
"""


def best_of(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def time_fit(pure):
    env = dict(os.environ, QGROWTH_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", FIT_SCRIPT], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--skip-fit", action="store_true")
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1

    rows = []
    for name, case in CASES.items():
        t_py = best_of(lambda: case(_pure), args.repeat)
        t_c = best_of(lambda: case(_ckernels), args.repeat)
        rows.append({"case": name, "python_s": t_py, "cython_s": t_c, "speedup": t_py / t_c})
    if not args.skip_fit:
        t_py, t_c = time_fit(True), time_fit(False)
        rows.append({"case": "fit (ODE forward model)", "python_s": t_py, "cython_s": t_c,
                     "speedup": t_py / t_c})

    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'case':<26}{'python':>12}{'cython':>12}{'speed-up':>10}")
    for r in rows:
        print(f"{r['case']:<26}{r['python_s'] * 1e3:>10.3f}ms{r['cython_s'] * 1e3:>10.3f}ms"
              f"{r['speedup']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
