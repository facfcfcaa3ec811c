"""Trajectories of the unified growth law: adaptive ODE integration, the
implicit incomplete-beta solution, and dispatch between those and the closed
forms of :mod:`qgrowth.models`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, IntegrationError
from .models import (CLAMPED, DIVERGED, OK, GrowthParams, ModelKind, closed_form,
                     divergence_time, has_closed_form, model_table, parse_kind)
from .specfun import inc_beta, inc_beta_inverse

__all__ = [
    "Trajectory",
    "IntegratorConfig",
    "integrate",
    "integrate_rhs",
    "propagate_beta",
    "beta_regime",
    "solve",
    "solve_params",
]

_FLAG_NAMES = {_kernels.OK: OK, _kernels.CLAMPED: CLAMPED, _kernels.DIVERGED: DIVERGED}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled normalised population ``p(t)`` with a status flag per point.

    ``flags`` entries are ``"ok"``, ``"clamped"`` (pinned at carrying capacity
    or extinction) or ``"diverged"`` (value ``inf``).
    """

    times: np.ndarray
    values: np.ndarray
    flags: tuple

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        flags = tuple(str(f) for f in self.flags)
        if times.ndim != 1 or values.shape != times.shape or len(flags) != len(times):
            raise DomainError("times, values and flags must be 1-d and of equal length")
        if np.any(np.diff(times) <= 0):
            raise DomainError("times must be strictly increasing")
        bad = set(flags) - {OK, CLAMPED, DIVERGED}
        if bad:
            raise DomainError(f"unknown flag(s) {sorted(bad)}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "flags", flags)

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return float(self.values[-1])

    def flagged(self, flag):
        """Boolean mask of points carrying ``flag``."""
        return np.array([f == flag for f in self.flags], dtype=bool)


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and budgets of the adaptive integrator."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 100_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be > 0")
        if not self.max_step > 0:
            raise DomainError("max_step must be > 0")
        if not self.max_steps > 0:
            raise DomainError("max_steps must be > 0")


def _prepare_grid(t_grid):
    """Validate a time grid; prepend t = 0 when it starts later.

    Returns ``(grid, offset)`` where ``offset`` is the number of leading
    points added (0 or 1) and must be dropped from the result.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("time grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(t)):
        raise DomainError("time grid must be finite")
    if np.any(np.diff(t) <= 0):
        raise DomainError("time grid must be strictly increasing")
    if t[0] < 0:
        raise DomainError("time grid must start at t >= 0 (p(0) = p0; no backward integration)")
    if t[0] > 0:
        return np.concatenate(([0.0], t)), 1
    return t, 0


def _logistic_blowup(params):
    """Divergence time when params describe the repulsive logistic branch, else inf."""
    logistic = (params.qprime == 0 and params.q == 1 and params.gamma == 1
                and params.effort == 0)
    if logistic and params.kappa < 0 and params.p0 > 1:
        return divergence_time(params.kappa, params.p0)
    return math.inf


def _finish(grid, offset, values, status, err_code, t_err, p_err, what):
    if err_code == _kernels.E_MAXSTEPS:
        raise IntegrationError(f"{what}: step budget exhausted at t = {t_err!r}, p = {p_err!r}",
                               t_err, p_err)
    if err_code == _kernels.E_DOMAIN:
        raise IntegrationError(
            f"{what}: right-hand side undefined near t = {t_err!r}, p = {p_err!r}", t_err, p_err)
    flags = tuple(_FLAG_NAMES[int(s)] for s in status[offset:])
    return Trajectory(grid[offset:], np.asarray(values[offset:]), flags)


def integrate(params, t_grid, cfg=None):
    """Integrate ``dp/dt = kappa p**(1-q') (-qln(q, p))**gamma - effort p`` on ``t_grid``.

    Dormand-Prince 5(4) with step-size control on ``rel_tol``/``abs_tol``
    and 4th-order dense output at the grid points.  For ``gamma < 1``
    (``gamma != 0``) the law has a branch point at ``p = 1``: once
    ``1 - p < 10 abs_tol`` the remaining points are pinned at
    ``1 - 10 abs_tol`` and flagged ``"clamped"``.  On the repulsive logistic
    branch (``kappa < 0``, ``p0 > 1``) integration stops at ``0.999 t*`` and
    later points are flagged ``"diverged"``; any other blow-up past ``1e300``
    is flagged the same way.

    Raises
    ------
    IntegrationError
        Step budget exhausted, or the step size collapsed because the
        right-hand side is undefined (carries the last accepted ``t`` and ``p``).
    """
    cfg = cfg or IntegratorConfig()
    grid, offset = _prepare_grid(t_grid)
    t_star = _logistic_blowup(params)
    t_stop = 0.999 * t_star if math.isfinite(t_star) else math.inf
    stop_near_one = params.gamma < 1 and params.gamma != 0
    values, status, err_code, t_err, p_err, _ = _kernels.dopri5_unified(
        params.qprime, params.q, params.gamma, params.kappa, params.effort, params.p0,
        grid, cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.max_steps, t_stop, stop_near_one)
    return _finish(grid, offset, values, status, err_code, t_err, p_err, "integrate")


def integrate_rhs(f, p0, t_grid, cfg=None, stop_near_one=False):
    """Integrate an arbitrary autonomous law ``dp/dt = f(p)`` (pure-Python kernel).

    ``f`` should return NaN where it is undefined.  Used for laws outside the
    unified family, e.g. :func:`qgrowth.models.smith_rhs`.
    """
    cfg = cfg or IntegratorConfig()
    if not (math.isfinite(p0) and p0 > 0):
        raise DomainError(f"p0 must be finite and > 0, got {p0!r}")
    grid, offset = _prepare_grid(t_grid)
    values, status, err_code, t_err, p_err, _ = _kernels.dopri5_grid(
        f, float(p0), grid, cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.max_steps,
        math.inf, stop_near_one)
    return _finish(grid, offset, values, status, err_code, t_err, p_err, "integrate_rhs")


def beta_regime(params):
    """Which implicit incomplete-beta solution applies: 1, 2 or ``None``.

    Regime 1: ``q > 0``, ``q' > 0`` (``alpha < 1``), ``gamma < 1``.
    Regime 2: ``q < 0``, ``q' < 0`` (``alpha > 1``), ``gamma < 1`` and
    ``gamma > q'/q``.  Both need ``0 < p0 < 1``, no effort term and
    ``gamma != 0`` (without the saturation factor the curve passes ``p = 1``).
    """
    if params.effort != 0 or not params.gamma < 1 or params.gamma == 0 \
            or not 0 < params.p0 < 1:
        return None
    if params.q > 0 and params.qprime > 0:
        return 1
    if params.q < 0 and params.qprime < 0 and params.gamma > params.qprime / params.q:
        return 2
    return None


def _beta_setup(params, regime):
    q, qp, g = params.q, params.qprime, params.gamma
    if regime == 1:
        # x = p**q: p**(q'-1) dp (-qln(q,p))**-gamma = q**(gamma-1) x**(q'/q-1) (1-x)**-gamma dx
        return qp / q, 1.0 - g, q, q ** (g - 1.0)
    # s = p**(-q): the same form with shapes (gamma - q'/q, 1 - gamma)
    return g - qp / q, 1.0 - g, -q, (-q) ** (g - 1.0)


def propagate_beta(params, t_grid):
    """Evaluate the implicit solution ``c [B_x(a, b) - B_x0(a, b)] = kappa t`` on a grid.

    In regime 1 ``x = p**q``, ``a = q'/q``, ``c = q**(gamma-1)``; in regime 2
    ``x = p**(-q)``, ``a = gamma - q'/q``, ``c = (-q)**(gamma-1)``; in both
    ``b = 1 - gamma``.  Each point is found by inverting ``B_x`` to ``1e-10``
    in the integral.  When ``kappa t`` exceeds the remaining integral the
    curve has reached ``p = 1`` (flagged ``"clamped"``); for ``kappa < 0`` a
    target below zero means extinction (``p = 0``, also ``"clamped"``).

    Raises
    ------
    DomainError
        Parameters outside both regimes (see :func:`beta_regime`).
    """
    regime = beta_regime(params)
    if regime is None:
        raise DomainError(
            "implicit beta solution needs gamma < 1, gamma != 0, 0 < p0 < 1, no effort, and either "
            "q > 0, q' > 0 or q < 0, q' < 0 with gamma > q'/q")
    a, b, expo, c = _beta_setup(params, regime)
    grid, offset = _prepare_grid(t_grid)
    x0 = params.p0 ** expo
    b0 = inc_beta(a, b, x0)
    b_full = inc_beta(a, b, 1.0)
    values = np.empty_like(grid)
    flags = []
    lo, hi = 0.0, 1.0
    for i, t in enumerate(grid):
        target = b0 + params.kappa * t / c
        if t == 0:
            values[i], flag = params.p0, OK
        elif target >= b_full:
            values[i], flag = 1.0, CLAMPED
        elif target <= 0:
            values[i], flag = 0.0, CLAMPED
        else:
            if params.kappa > 0:
                x = inc_beta_inverse(target, a, b, bracket=(lo, 1.0))
                lo = x
            else:
                x = inc_beta_inverse(target, a, b, bracket=(0.0, hi))
                hi = x
            values[i], flag = x ** (1.0 / expo), OK
        flags.append(flag)
    return Trajectory(grid[offset:], values[offset:], tuple(flags[offset:]))


def solve_params(kind, params, t_grid, cfg=None):
    """Solve an already bound parameter set with the row's preferred method.

    Returns ``(trajectory, method)`` with ``method`` one of ``"analytic"``,
    ``"beta"`` or ``"ode"``.
    """
    kind = parse_kind(kind)
    if has_closed_form(kind):
        grid, offset = _prepare_grid(t_grid)
        values, flags = closed_form(kind, params, grid)
        return Trajectory(grid[offset:], values[offset:], tuple(flags[offset:])), "analytic"
    if kind in (ModelKind.TSOULARIS_WALLACE, ModelKind.BLUMBERG) and beta_regime(params):
        return propagate_beta(params, t_grid), "beta"
    return integrate(params, t_grid, cfg), "ode"


def solve(kind, free_params, t_grid, cfg=None):
    """Bind ``free_params`` with :func:`qgrowth.models.model_table` and solve.

    The closed form is used when the row has one, the implicit beta solution
    for Tsoularis-Wallace/Blumberg inside its regimes, and the ODE otherwise.
    A trajectory is always produced by a single method.
    """
    params = free_params if isinstance(free_params, GrowthParams) else model_table(kind, free_params)
    return solve_params(kind, params, t_grid, cfg)
