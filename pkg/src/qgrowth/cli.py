"""``qgrowth`` command line: simulate, fit, table and check.

Exit codes: 0 success, 1 check failure, 2 usage or domain error,
3 fit did not converge (the best point is still reported).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import unicodedata
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import IntegratorConfig, integrate, propagate_beta, solve_params
from .errors import QGrowthError
from .fitkit import LOSS_SPACES, ObservationSeries, fit
from .models import (ROWS, TABLE_KINDS, ModelKind, closed_form, has_closed_form,
                     model_table, parse_kind, schaefer_equivalent_params)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

TABLE_COLUMNS = ("model", "name", "qprime", "alpha", "q", "gamma", "kappa", "free",
                 "equation", "closed_form", "approximation")


class UsageError(Exception):
    """Bad command-line input (exit status 2)."""


def fmt(x):
    """17 significant digits: lossless for doubles."""
    return format(float(x), ".17g")


def _json_number(x):
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# argument helpers


def _parse_assignments(items, what="--param"):
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name:
            raise UsageError(f"{what} expects name=value, got {item!r}")
        if name in out:
            raise UsageError(f"{what} {name} given twice")
        out[name] = value.strip()
    return out


def _floats(mapping, what="--param"):
    out = {}
    for name, value in mapping.items():
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"{what} {name}: {value!r} is not a number") from None
    return out


def _parse_bounds(items):
    out = {}
    for name, value in _parse_assignments(items, "--bound").items():
        lo, sep, hi = value.partition(":")
        if not sep:
            raise UsageError(f"--bound {name} expects lo:hi (either side may be empty)")
        try:
            out[name] = (float(lo) if lo.strip() else None, float(hi) if hi.strip() else None)
        except ValueError:
            raise UsageError(f"--bound {name}: {value!r} is not lo:hi") from None
    return out


def _time_grid(args):
    if args.times:
        try:
            return np.array([float(v) for v in args.times.split(",")])
        except ValueError:
            raise UsageError(f"--times: cannot parse {args.times!r}") from None
    if args.t_count < 1:
        raise UsageError("--t-count must be >= 1")
    if args.t_count == 1:
        return np.array([args.t_start])
    return np.linspace(args.t_start, args.t_stop, args.t_count)


def _config(args):
    return IntegratorConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol)


def _kind(name):
    try:
        return parse_kind(name)
    except QGrowthError as exc:
        raise UsageError(str(exc)) from None


def _header(args, text):
    return "" if args.no_header_comment else f"# qgrowth {__version__} {text}\n"


def _write(args, text):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _trajectory_csv(traj, method):
    rows = [(fmt(t), fmt(p), method, flag)
            for t, p, flag in zip(traj.times, traj.values, traj.flags)]
    return _csv_text(("t", "p", "method", "flag"), rows)


def _trajectory_json_rows(traj, method):
    return [{"t": _json_number(t), "p": _json_number(p), "method": method, "flag": flag}
            for t, p, flag in zip(traj.times, traj.values, traj.flags)]


def _dump_json(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _describe(assignments):
    return " ".join(f"{k}={v}" for k, v in assignments.items())


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args):
    kind = _kind(args.model)
    given = _floats(_parse_assignments(args.param))
    params = model_table(kind, given)
    grid = _time_grid(args)
    traj, method = solve_params(kind, params, grid, _config(args))
    if args.format == "json":
        text = _dump_json({
            "schema_version": SCHEMA_VERSION,
            "model": kind.value,
            "params": params.as_dict(),
            "method": method,
            "data": _trajectory_json_rows(traj, method),
        })
    else:
        text = _header(args, f"simulate model={kind.value} {_describe(params.as_dict())}")
        text += _trajectory_csv(traj, method)
    _write(args, text)
    return EXIT_OK


def _read_series(path, n_inf):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = [line for line in fh if line.strip() and not line.lstrip().startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    reader = csv.DictReader(lines)
    columns = [c.strip() for c in (reader.fieldnames or [])]
    reader.fieldnames = columns
    if "t" not in columns:
        raise UsageError(f"{path}: missing column 't'")
    if "p" in columns:
        value_col, units = "p", "normalized"
    elif "n" in columns:
        value_col, units = "n", "raw"
    else:
        raise UsageError(f"{path}: missing column 'p' (or 'n' for raw counts)")
    times, values = [], []
    for lineno, row in enumerate(reader, start=2):
        try:
            times.append(float(row["t"]))
            values.append(float(row[value_col]))
        except (TypeError, ValueError):
            raise UsageError(f"{path}: row {lineno}: non-numeric t or {value_col}") from None
    if units == "normalized" and n_inf is not None:
        raise UsageError("--n-inf applies to raw counts (column 'n') only")
    return ObservationSeries(times, values, units, n_inf)


def cmd_fit(args):
    kind = _kind(args.model)
    row = ROWS[kind]
    if not args.input:
        raise UsageError("fit needs --input")
    series = _read_series(args.input, args.n_inf)
    given = _floats(_parse_assignments(args.param))
    if args.free:
        free = list(dict.fromkeys(args.free))
    else:
        rate = "r" if "r" in given else "kappa"
        free = [rate if name == "kappa" else name for name in row.required] + ["p0"]
    init = {name: given[name] for name in free if name in given}
    if "p0" in free and "p0" not in init:
        if series.times[0] != 0:
            raise UsageError("give --param p0=... (data do not start at t = 0)")
        init["p0"] = float(series.normalized(init.get("n_inf", given.get("n_inf")))[0])
    missing = [name for name in free if init.get(name) is None]
    if missing:
        raise UsageError(f"initial value needed for free parameter(s): {', '.join(missing)}"
                         " (use --param name=value)")
    fixed = {k: v for k, v in given.items() if k not in free}
    result = fit(series, kind, free, init, bounds=_parse_bounds(args.bound),
                 loss_space=args.loss, fixed=fixed, cfg=_config(args))
    traj, method = solve_params(kind, result.params, series.times, _config(args))
    report = {
        "schema_version": SCHEMA_VERSION,
        "model": kind.value,
        "params": result.params.as_dict(),
        "fit": {
            "free": result.free_values,
            "fixed": result.fixed,
            "sse": result.sse,
            "sse_init": result.sse_init,
            "n_evals": result.n_evals,
            "converged": result.converged,
            "loss_space": result.loss_space,
            "n_inf": result.free_values.get("n_inf", series.carrying_capacity),
        },
        "data": _trajectory_json_rows(traj, method),
    }
    _write(args, _dump_json(report))
    if args.output:
        out = Path(args.output)
        traj_path = out.with_name(out.stem + "_trajectory.csv")
        text = _header(args, f"fit model={kind.value} {_describe(result.free_values)}")
        traj_path.write_text(text + _trajectory_csv(traj, method), encoding="utf-8")
    if not result.converged:
        print(f"qgrowth: fit did not converge after {result.n_evals} evaluations; "
              "best point reported", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def table_rows(include_all=False):
    """Rows of the model table as dicts keyed by :data:`TABLE_COLUMNS`."""
    kinds = list(ModelKind) if include_all else list(TABLE_KINDS)
    order = {k: i for i, k in enumerate(ROWS)}
    out = []
    for kind in sorted(kinds, key=order.get):
        row = ROWS[kind]
        out.append({
            "model": kind.value,
            "name": row.display,
            "qprime": row.qprime_text,
            "alpha": row.alpha_column,
            "q": row.q_text,
            "gamma": row.gamma_text,
            "kappa": row.kappa_text,
            "free": " ".join(row.free),
            "equation": row.equation,
            "closed_form": "yes" if has_closed_form(kind) else "no",
            "approximation": "yes" if row.approximation else "no",
        })
    return out


def _width(text):
    # combining marks (the tilde of q\u0303) take no column
    return sum(not unicodedata.combining(ch) for ch in text)


def _pad(text, width):
    return text + " " * (width - _width(text))


def _render_text_table(rows, columns):
    widths = {c: max(_width(c), *(_width(r[c]) for r in rows)) for c in columns}
    lines = ["  ".join(_pad(c, widths[c]) for c in columns).rstrip()]
    lines.append("  ".join("-" * widths[c] for c in columns))
    for r in rows:
        lines.append("  ".join(_pad(r[c], widths[c]) for c in columns).rstrip())
    return "\n".join(lines) + "\n"


def cmd_table(args):
    rows = table_rows(args.all)
    if args.format == "json":
        text = _dump_json(rows)
    elif args.format == "csv":
        text = _csv_text(TABLE_COLUMNS, [[r[c] for c in TABLE_COLUMNS] for r in rows])
    else:
        text = _render_text_table(rows, ("model", "qprime", "alpha", "q", "gamma", "kappa",
                                         "free", "closed_form", "equation"))
    _write(args, text)
    return EXIT_OK


# parameter sets of the self-check: kappa = 1, q = 2, gamma = 1.5, p0 = 0.001 where free
CHECK_ANALYTIC = {
    ModelKind.MALTHUS: {"kappa": 1.0},
    ModelKind.VERHULST: {"kappa": 1.0},
    ModelKind.GOMPERTZ: {"kappa": 1.0},
    ModelKind.HYPER_GOMPERTZ: {"gamma": 1.5, "kappa": 1.0},
    ModelKind.RICHARDS: {"q": 2.0, "kappa": 1.0},
    ModelKind.MITSCHERLICH: {"kappa": 1.0},
    ModelKind.TURNER: {"q": 2.0, "gamma": 1.5, "kappa": 1.0},
    ModelKind.SPECIALIZED_VON_BERTALANFFY: {"kappa": 1.0},
    ModelKind.GENERALIZED_VON_BERTALANFFY: {"q": 2.0, "kappa": 1.0},
    ModelKind.RICHARDS_SCHAEFER: {"q": 2.0, "kappa": 1.0, "epsilon": -0.1},
    ModelKind.ZIPF_MANDELBROT_KINETIC: {"qprime": 0.5, "kappa": 1.0},
}

CHECK_BETA = [
    (ModelKind.BLUMBERG, {"qprime": 0.9, "gamma": 0.5, "kappa": 1.0}),
    (ModelKind.TSOULARIS_WALLACE, {"qprime": 0.5, "q": 2.0, "gamma": 0.5, "kappa": 1.0}),
    (ModelKind.TSOULARIS_WALLACE, {"qprime": -0.5, "q": -1.0, "gamma": 0.8, "kappa": 1.0}),
]


def _max_delta(a, b):
    a, b = np.asarray(a), np.asarray(b)
    both_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    d = np.where(both_inf, 0.0, np.abs(a - b))
    d = np.where(np.isnan(d), np.inf, d)
    return float(np.max(d))


def run_check(kinds=None, tol=1e-6, cfg=None, t_stop=10.0, t_count=201, p0=0.001):
    """Compare analytic (and implicit beta) trajectories with the ODE integrator.

    Returns a list of result dicts with keys ``model``, ``comparison``,
    ``params``, ``max_delta`` and ``ok``.
    """
    cfg = cfg or IntegratorConfig()
    grid = np.linspace(0.0, t_stop, t_count)
    selected = set(kinds) if kinds else None
    results = []
    for kind, free in CHECK_ANALYTIC.items():
        if selected is not None and kind not in selected:
            continue
        params = model_table(kind, dict(free, p0=p0))
        exact, _ = closed_form(kind, params, grid)
        ode_params = params
        if kind is ModelKind.RICHARDS_SCHAEFER:
            k_eff, e_eff = schaefer_equivalent_params(params.q, params.kappa, params.effort)
            ode_params = params.with_(kappa=k_eff, effort=e_eff)
        numeric = integrate(ode_params, grid, cfg).values
        delta = _max_delta(exact, numeric)
        results.append({"model": kind.value, "comparison": "analytic-ode",
                        "params": free, "max_delta": delta, "ok": delta <= tol})
    for kind, free in CHECK_BETA:
        if selected is not None and kind not in selected:
            continue
        params = model_table(kind, dict(free, p0=p0))
        implicit = propagate_beta(params, grid).values
        numeric = integrate(params, grid, cfg).values
        delta = _max_delta(implicit, numeric)
        results.append({"model": kind.value, "comparison": "beta-ode",
                        "params": free, "max_delta": delta, "ok": delta <= tol})
    return results


def cmd_check(args):
    kinds = [_kind(m) for m in args.model] if args.model else None
    if kinds:
        covered = set(CHECK_ANALYTIC) | {k for k, _ in CHECK_BETA}
        uncovered = [k.value for k in kinds if k not in covered]
        if uncovered:
            raise UsageError(f"no reference solution to check for: {', '.join(uncovered)}")
    results = run_check(kinds, args.tol, _config(args))
    passed = all(r["ok"] for r in results)
    if args.format == "json":
        text = _dump_json({
            "schema_version": SCHEMA_VERSION,
            "model": [r["model"] for r in results],
            "params": {"tol": args.tol, "rel_tol": args.rel_tol, "abs_tol": args.abs_tol},
            "passed": passed,
            "data": results,
        })
    else:
        lines = [f"{'model':<26}  {'comparison':<12}  {'max_delta':<23}  status"]
        for r in results:
            lines.append(f"{r['model']:<26}  {r['comparison']:<12}  {fmt(r['max_delta']):<23}  "
                         f"{'PASS' if r['ok'] else 'FAIL'}")
        lines.append(f"{'all passed' if passed else 'FAILED'} (tol = {fmt(args.tol)})")
        text = "\n".join(lines) + "\n"
    _write(args, text)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser


def _add_common(p):
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--no-header-comment", action="store_true",
                   help="omit the leading '# qgrowth ...' metadata line")
    p.add_argument("--rel-tol", type=float, default=1e-9, help="integrator relative tolerance")
    p.add_argument("--abs-tol", type=float, default=1e-12, help="integrator absolute tolerance")


def _add_grid(p):
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--t-stop", type=float, default=10.0)
    p.add_argument("--t-count", type=int, default=201)
    p.add_argument("--times", help="explicit comma-separated times (overrides the linear grid)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qgrowth",
        description="Deformed-logarithm growth models: simulate, fit, tabulate, self-check.")
    parser.add_argument("--version", action="version", version=f"qgrowth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="solve a model on a time grid")
    p.add_argument("--model", "-m", required=True)
    p.add_argument("--param", "-p", action="append", default=[], metavar="NAME=VALUE",
                   help="qprime, q, gamma, kappa (or r), epsilon, p0")
    _add_grid(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="estimate parameters from a CSV series")
    p.add_argument("--model", "-m", required=True)
    p.add_argument("--input", "-i", required=True, help="CSV with columns t and p (or n)")
    p.add_argument("--param", "-p", action="append", default=[], metavar="NAME=VALUE",
                   help="initial value of a free parameter, or value of a fixed one")
    p.add_argument("--free", action="append", metavar="NAME",
                   help="parameter to estimate (repeatable; default: the row's free slots and p0)")
    p.add_argument("--bound", action="append", default=[], metavar="NAME=LO:HI")
    p.add_argument("--n-inf", type=float, help="carrying capacity used to normalise column n")
    p.add_argument("--loss", choices=LOSS_SPACES, default="log")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("table", help="print the model table")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--all", action="store_true",
                   help="include the rows outside the 13-row summary table")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("check", help="analytic/beta versus ODE self-check")
    p.add_argument("--model", "-m", action="append", help="restrict to this row (repeatable)")
    p.add_argument("--tol", type=float, default=1e-6, help="maximum allowed |difference|")
    p.add_argument("--format", choices=("text", "json"), default="text")
    _add_common(p)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qgrowth {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QGrowthError as exc:
        print(f"qgrowth {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
