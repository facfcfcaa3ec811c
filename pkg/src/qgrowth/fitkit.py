"""Least-squares estimation of growth-model parameters from a time series.

The forward model is :func:`qgrowth.dynamics.solve_params`, so the same
closed-form / beta / ODE dispatch as simulation is used.  Minimisation is
derivative-free (Nelder-Mead) in coordinates scaled by the initial guess,
which makes the simplex-diameter stopping rule relative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .dynamics import IntegratorConfig, solve_params
from .errors import DomainError, QGrowthError
from .models import ROWS, GrowthParams, ModelKind, model_table, parse_kind

__all__ = ["ObservationSeries", "FitResult", "residuals", "sse", "fit", "LOSS_SPACES"]

LOSS_SPACES = ("linear", "log")


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Observed population at increasing times.

    ``units`` is ``"normalized"`` when ``values`` are already ``p = n/n_inf``
    or ``"raw"`` for counts ``n``; raw counts need ``carrying_capacity`` unless
    ``n_inf`` is itself fitted.
    """

    times: np.ndarray
    values: np.ndarray
    units: str = "normalized"
    carrying_capacity: float | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise DomainError("times and values must be 1-d and of equal length")
        if times.size < 3:
            raise DomainError(f"need at least 3 observations, got {times.size}")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DomainError("observations must be finite")
        if np.any(np.diff(times) <= 0):
            raise DomainError("observation times must be strictly increasing")
        if times[0] < 0:
            raise DomainError("observation times must be >= 0")
        if np.any(values <= 0):
            raise DomainError("observed values must be > 0")
        if self.units not in ("normalized", "raw"):
            raise DomainError(f"units must be 'normalized' or 'raw', got {self.units!r}")
        if self.carrying_capacity is not None and not self.carrying_capacity > 0:
            raise DomainError("carrying capacity must be > 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.times.size

    def normalized(self, n_inf=None):
        """Observed ``p``; raw counts are divided by ``n_inf`` (or the stored capacity)."""
        if self.units == "normalized":
            return self.values
        n_inf = self.carrying_capacity if n_inf is None else n_inf
        if n_inf is None:
            raise DomainError("raw counts need a carrying capacity (or fit n_inf)")
        return self.values / n_inf


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit`.

    ``converged`` is true when the simplex diameter fell below the relative
    tolerance before the evaluation budget ran out; the best point found is
    reported either way.
    """

    kind: ModelKind
    params: GrowthParams
    free_values: dict
    sse: float
    n_evals: int
    converged: bool
    loss_space: str
    sse_init: float = math.nan
    fixed: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "model": self.kind.value,
            "free": dict(self.free_values),
            "fixed": dict(self.fixed),
            "params": self.params.as_dict(),
            "sse": self.sse,
            "sse_init": self.sse_init,
            "n_evals": self.n_evals,
            "converged": self.converged,
            "loss_space": self.loss_space,
        }


def _check_loss(loss_space):
    if loss_space not in LOSS_SPACES:
        raise DomainError(f"loss space must be one of {LOSS_SPACES}, got {loss_space!r}")


def residuals(series, params, loss_space="log", kind=ModelKind.TSOULARIS_WALLACE,
              n_inf=None, cfg=None):
    """Observed minus model at the observation times.

    ``loss_space="log"`` gives ``ln(observed) - ln(model)``; ``"linear"``
    gives ``observed - model``, both in normalised units.  ``kind`` selects
    the forward-model method (closed form where the row has one); the
    default solves the general law numerically.
    """
    _check_loss(loss_space)
    observed = series.normalized(n_inf)
    traj, _ = solve_params(kind, params, series.times, cfg)
    model = traj.values
    if loss_space == "linear":
        return observed - model
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(observed) - np.log(model)


def sse(series, params, loss_space="log", kind=ModelKind.TSOULARIS_WALLACE, n_inf=None,
        cfg=None):
    """Sum of squared :func:`residuals`; ``inf`` when the model is not finite."""
    r = residuals(series, params, loss_space, kind, n_inf, cfg)
    total = float(np.dot(r, r))
    return total if math.isfinite(total) else math.inf


def _allowed_free(kind):
    return set(ROWS[kind].free) | {"n_inf"}


def fit(series, kind, free, init, bounds=None, loss_space="log", fixed=None, cfg=None,
        max_evals=10_000, xtol=1e-9):
    """Fit the free parameters of a model row to ``series``.

    Parameters
    ----------
    series : ObservationSeries
    kind : ModelKind or str
    free : sequence of str
        Names to estimate; any free slot of the row, ``p0`` or ``n_inf``.
    init : mapping
        Starting value of every free parameter.
    bounds : mapping, optional
        ``name -> (lo, hi)`` box constraints (``None`` for an open side).
        Candidates outside the box, or where the model is undefined, score
        an infinite loss.
    loss_space : {"log", "linear"}
    fixed : mapping, optional
        Values of the row's remaining parameters.
    cfg : IntegratorConfig, optional
        Used when the forward model is numerical.
    max_evals : int
        Budget of objective evaluations.
    xtol : float
        Simplex diameter at which the search stops, relative to ``|init|``.

    Raises
    ------
    DomainError
        Unknown or duplicate free parameter, missing initial value, an
        initial point outside the bounds or the model domain, or fewer
        observations than free parameters + 1.
    """
    kind = parse_kind(kind)
    _check_loss(loss_space)
    free = list(free)
    fixed = dict(fixed or {})
    bounds = dict(bounds or {})
    cfg = cfg or IntegratorConfig()
    if not free:
        raise DomainError("nothing to fit: the free parameter list is empty")
    if len(set(free)) != len(free):
        raise DomainError("duplicate free parameter")
    allowed = _allowed_free(kind)
    for name in free + list(fixed):
        if name not in allowed:
            raise DomainError(
                f"{kind.value} has no parameter {name!r}; choose from {', '.join(sorted(allowed))}")
    clash = set(free) & set(fixed)
    if clash:
        raise DomainError(f"parameter(s) {sorted(clash)} both free and fixed")
    missing = [name for name in free if name not in init]
    if missing:
        raise DomainError(f"missing initial value for {', '.join(missing)}")
    for name in bounds:
        if name not in free:
            raise DomainError(f"bound given for non-free parameter {name!r}")
    if len(series) < len(free) + 1:
        raise DomainError(
            f"{len(free)} free parameters need at least {len(free) + 1} observations, "
            f"got {len(series)}")
    if series.units == "raw" and series.carrying_capacity is None and "n_inf" not in free \
            and "n_inf" not in fixed:
        raise DomainError("raw counts need a carrying capacity: give one or fit n_inf")

    x_init = np.array([float(init[name]) for name in free])
    lo = np.array([(bounds.get(n) or (None, None))[0] for n in free], dtype=object)
    hi = np.array([(bounds.get(n) or (None, None))[1] for n in free], dtype=object)
    lo = np.array([-math.inf if v is None else float(v) for v in lo])
    hi = np.array([math.inf if v is None else float(v) for v in hi])
    if np.any(x_init < lo) or np.any(x_init > hi):
        raise DomainError("initial point lies outside the bounds")
    scale = np.where(x_init != 0, np.abs(x_init), 1.0)

    def bind(x):
        values = dict(fixed)
        values.update(zip(free, (float(v) for v in x)))
        n_inf = values.pop("n_inf", None)
        if n_inf is not None and not n_inf > 0:
            raise DomainError("n_inf must be > 0")
        if n_inf is not None and kind is ModelKind.TSOULARIS_WALLACE and "r" in values:
            values["n_inf"] = n_inf
        return model_table(kind, values), n_inf

    def loss(x):
        params, n_inf = bind(x)
        return sse(series, params, loss_space, kind, n_inf, cfg)

    try:
        sse_init = loss(x_init)
    except QGrowthError as exc:
        raise DomainError(f"initial point is outside the model domain: {exc}") from exc

    n_evals = 1

    def objective(z):
        nonlocal n_evals
        n_evals += 1
        x = z * scale
        if np.any(x < lo) or np.any(x > hi):
            return math.inf
        try:
            return loss(x)
        except (QGrowthError, FloatingPointError, ZeroDivisionError, OverflowError):
            return math.inf

    z = x_init / scale
    best_z, best_f = z, sse_init
    converged = False
    # a restart from the best vertex guards against a collapsed simplex
    for _ in range(2):
        budget = max_evals - n_evals
        if budget <= 0:
            break
        res = minimize(objective, best_z, method="Nelder-Mead",
                       options={"xatol": xtol, "fatol": math.inf, "maxfev": budget})
        if res.fun <= best_f:
            moved = np.max(np.abs(res.x - best_z))
            best_z, best_f = res.x, float(res.fun)
        else:
            moved = 0.0
        converged = bool(res.success) and math.isfinite(best_f)
        if not converged or moved <= xtol:
            break

    x_best = best_z * scale
    params, _ = bind(x_best)
    return FitResult(
        kind=kind,
        params=params,
        free_values={name: float(v) for name, v in zip(free, x_best)},
        sse=float(best_f),
        n_evals=n_evals,
        converged=converged,
        loss_space=loss_space,
        sse_init=float(sse_init),
        fixed={k: float(v) for k, v in fixed.items()},
    )
