"""Lower incomplete beta integral (non-regularized) and its inverse in x.

``inc_beta(a, b, x) = integral_0^x t**(a-1) (1-t)**(b-1) dt`` is computed by
adaptive Gauss-Kronrod quadrature rather than the usual continued fraction,
because the growth-law parameterisations need ``b <= 0`` (with ``x < 1``) as
well as shapes below one.  Endpoint singularities are removed by the power
substitutions ``t = u**(1/a)`` near 0 (for ``a < 1``) and
``1 - t = v**(1/b)`` near 1 (for ``0 < b < 1``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels
from .errors import DivergenceError, DomainError, NoRootError

__all__ = ["BetaArgs", "inc_beta", "inc_beta_segment", "inc_beta_inverse", "beta_integrand"]

# internal quadrature target, two orders tighter than the 1e-10 contract
_ABSTOL = 1e-14
_RELTOL = 1e-13
_SPLIT = 0.5


@dataclass(frozen=True)
class BetaArgs:
    """Validated arguments of the lower incomplete beta integral."""

    a: float
    b: float
    x: float

    def __post_init__(self):
        _check_shapes(self.a, self.b)
        if not math.isfinite(self.x) or not 0.0 <= self.x <= 1.0:
            raise DomainError(f"x must lie in [0, 1], got {self.x!r}")
        if self.b <= 0 and self.x == 1.0:
            raise DivergenceError(f"B_1(a, b) diverges for b = {self.b} <= 0")


def _check_shapes(a, b):
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("beta shapes must be finite")
    if a <= 0:
        raise DomainError(f"first shape a must be > 0, got {a!r}")


def beta_integrand(a, b, t):
    """``t**(a-1) * (1-t)**(b-1)`` for ``0 < t < 1``."""
    return t ** (a - 1.0) * (1.0 - t) ** (b - 1.0)


def _quad(c1, e, c2, lo, hi):
    # a stalled refinement still returns its best estimate; the internal
    # target sits three orders below the 1e-10 contract
    value, _, _ = _kernels.power_quad(c1, e, c2, lo, hi, _ABSTOL, _RELTOL)
    return value


def _lower_piece(a, b, x1, x2):
    """Integral over [x1, x2] within [0, 1/2]."""
    if x2 <= x1:
        return 0.0
    if a < 1.0:
        # t = u**(1/a): t**(a-1) dt = du / a
        return _quad(0.0, 1.0 / a, b - 1.0, x1 ** a, x2 ** a) / a
    return _quad(a - 1.0, 1.0, b - 1.0, x1, x2)


def _upper_piece(a, b, x1, x2):
    """Integral over [x1, x2] within [1/2, 1], in the reflected variable s = 1 - t."""
    if x2 <= x1:
        return 0.0
    s_lo, s_hi = 1.0 - x2, 1.0 - x1
    if 0.0 < b < 1.0:
        # s = v**(1/b): s**(b-1) ds = dv / b
        return _quad(0.0, 1.0 / b, a - 1.0, s_lo ** b, s_hi ** b) / b
    return _quad(b - 1.0, 1.0, a - 1.0, s_lo, s_hi)


def inc_beta_segment(a, b, x1, x2):
    """``inc_beta(a, b, x2) - inc_beta(a, b, x1)`` as one integral over [x1, x2].

    Works for any ``0 <= x1 <= x2 <= 1`` (``x2 < 1`` when ``b <= 0``) and is
    more accurate than differencing two full integrals when the segment is short.
    """
    a, b, x1, x2 = float(a), float(b), float(x1), float(x2)
    BetaArgs(a, b, x1)
    BetaArgs(a, b, x2)
    if x2 < x1:
        return -inc_beta_segment(a, b, x2, x1)
    total = 0.0
    if x1 < _SPLIT:
        total += _lower_piece(a, b, x1, min(x2, _SPLIT))
    if x2 > _SPLIT:
        total += _upper_piece(a, b, max(x1, _SPLIT), x2)
    return total


def inc_beta(a, b=None, x=None):
    """Non-regularized lower incomplete beta ``B_x(a, b)``.

    Accepts either ``inc_beta(BetaArgs(a, b, x))`` or ``inc_beta(a, b, x)``.

    Raises
    ------
    DomainError
        ``a <= 0`` or ``x`` outside [0, 1].
    DivergenceError
        ``b <= 0`` with ``x = 1``.
    """
    if isinstance(a, BetaArgs):
        args = a
    else:
        args = BetaArgs(float(a), float(b), float(x))
    if args.x == 0.0:
        return 0.0
    return inc_beta_segment(args.a, args.b, 0.0, args.x)


def inc_beta_inverse(target, a, b, bracket=(0.0, 1.0), tol=1e-10, max_iter=100):
    """Solve ``inc_beta(a, b, x) = target`` for x inside ``bracket``.

    Newton steps on the known derivative (the integrand), safeguarded by
    bisection so every iterate stays inside a shrinking bracket.  Iteration
    continues past ``|inc_beta(a, b, x) - target| <= tol * max(1, target)``
    until the Newton correction is below ``1e-13 * x`` as well, so that x
    itself is accurate where the integrand is small.  Where the integrand is
    so steep (``b < 1`` near ``x = 1``) that no double meets the residual
    tolerance, the root bracketed to one ulp is returned.

    Raises
    ------
    NoRootError
        ``target`` is outside ``[inc_beta(lo), inc_beta(hi)]``.
    """
    a, b, target = float(a), float(b), float(target)
    lo, hi = (float(v) for v in bracket)
    _check_shapes(a, b)
    if not (0.0 <= lo <= hi <= 1.0):
        raise DomainError(f"bracket must lie in [0, 1], got {bracket!r}")
    if b <= 0 and hi == 1.0:
        raise DivergenceError(
            "B_x(a, b) is unbounded as x -> 1 for b <= 0; pass a bracket with hi < 1")
    f_lo = inc_beta(a, b, lo)
    f_hi = inc_beta(a, b, hi)
    scale = max(1.0, abs(target))
    if not (f_lo - tol * scale <= target <= f_hi + tol * scale):
        raise NoRootError(
            f"target {target!r} outside the bracket image [{f_lo!r}, {f_hi!r}]")
    if target <= f_lo:
        return lo
    if target >= f_hi:
        return hi

    # start from the linear interpolant; track F(x) by adding short segments
    x = lo + (hi - lo) * (target - f_lo) / (f_hi - f_lo)
    x = min(max(x, lo), hi)
    fx = f_lo + inc_beta_segment(a, b, lo, x)
    resid = fx - target
    for _ in range(max_iter):
        if resid == 0.0:
            return x
        if resid > 0:
            hi = x
        else:
            lo = x
        step = math.nan
        if 0.0 < x < 1.0:
            slope = beta_integrand(a, b, x)
            if slope > 0 and math.isfinite(slope):
                step = -resid / slope
        if abs(resid) <= tol * scale and abs(step) <= 1e-13 * x:
            return x
        if not lo < hi or math.nextafter(lo, hi) >= hi:
            # root bracketed between adjacent doubles: x is exact to 1 ulp even
            # when the integrand is so steep there that no double meets tol
            return x
        x_new = x + step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        fx = fx + inc_beta_segment(a, b, x, x_new)
        x = x_new
        resid = fx - target
    if abs(resid) <= tol * scale:
        return x
    raise NoRootError(f"inc_beta_inverse did not converge for target {target!r}")
