"""Hot numerical kernels with a compiled and a pure-Python implementation.

The Cython extension ``_ckernels`` is used when it has been built; otherwise,
or when the environment variable ``QGROWTH_PURE_PYTHON`` is set to a
non-empty value other than ``0``, the pure-Python module ``_pure`` is used.
Both expose the same functions:

``unified_rhs(p, qprime, q, gamma, kappa, effort)``
    right-hand side of the unified growth law, NaN outside its domain;
``dopri5_unified(qprime, q, gamma, kappa, effort, p0, t_grid, rtol, atol,
h_max, max_steps, t_stop, stop_near_one)``
    Dormand-Prince 5(4) integration of that law sampled on a grid;
``power_quad(c1, e, c2, lo, hi, abstol, reltol)``
    adaptive Gauss-Kronrod integral of ``u**c1 * (1 - u**e)**c2``.
"""
import os

from . import _pure
from ._pure import CLAMPED, DIVERGED, E_DOMAIN, E_MAXSTEPS, E_NONE, OK, dopri5_grid

_force_pure = os.environ.get("QGROWTH_PURE_PYTHON", "") not in ("", "0")

backend = _pure
if not _force_pure:
    try:
        from . import _ckernels as backend
    except ImportError:
        backend = _pure

BACKEND = backend.BACKEND
unified_rhs = backend.unified_rhs
dopri5_unified = backend.dopri5_unified
power_quad = backend.power_quad

__all__ = [
    "BACKEND", "backend", "unified_rhs", "dopri5_unified", "power_quad",
    "dopri5_grid", "OK", "CLAMPED", "DIVERGED", "E_NONE", "E_MAXSTEPS", "E_DOMAIN",
]
