"""Deformed logarithm and exponential.

``qln(q, x) = (x**q - 1) / q`` and its inverse ``qexp(q, x) = [1 + q x]_+ ** (1/q)``,
both continued to ``log``/``exp`` at ``q = 0``.  All functions accept scalars or
array-likes; scalar input gives a Python ``float`` back.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "Q_ZERO_THRESHOLD",
    "Deformation",
    "qln",
    "qexp",
    "qexp_clamp_boundary",
    "qexp_pole",
    "is_log_limit",
]

#: Below this |q| both functions are evaluated as the ordinary log/exp.
Q_ZERO_THRESHOLD = 1e-8


class Deformation(float):
    """A finite real deformation parameter (the ``q`` in ``qln``/``qexp``)."""

    def __new__(cls, value):
        value = float(value)
        if not math.isfinite(value):
            raise DomainError(f"deformation must be finite, got {value!r}")
        return super().__new__(cls, value)

    def __repr__(self):
        return f"Deformation({float(self)!r})"


def is_log_limit(q):
    """True when ``q`` is close enough to 0 to use the ordinary log/exp."""
    return abs(q) < Q_ZERO_THRESHOLD


def _check_q(q):
    q = float(q)
    if not math.isfinite(q):
        raise DomainError(f"deformation must be finite, got {q!r}")
    return q


def _unwrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


def qln(q, x):
    """Deformed logarithm ``(x**q - 1) / q``, equal to ``log(x)`` at ``q = 0``.

    Raises
    ------
    DomainError
        If any ``x <= 0`` or any input is non-finite.
    """
    q = _check_q(q)
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("qln argument must be finite")
    if np.any(xa <= 0):
        raise DomainError("qln is defined for x > 0 only")
    if is_log_limit(q):
        out = np.log(xa)
    else:
        # expm1 keeps full precision when q*log(x) is small
        out = np.expm1(q * np.log(xa)) / q
    return _unwrap(x, out)


def qexp(q, x, strict=False):
    """Deformed exponential ``[1 + q x]_+ ** (1/q)``, equal to ``exp(x)`` at ``q = 0``.

    For ``q > 0`` the result is exactly 0 where ``1 + q x <= 0`` (the clamp).
    For ``q < 0`` the same condition lies past the pole at ``x = -1/q`` and
    the result is ``+inf``.  With ``strict=True`` both cases raise instead.
    """
    q = _check_q(q)
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("qexp argument must be finite")
    if is_log_limit(q):
        with np.errstate(over="ignore"):
            return _unwrap(x, np.exp(xa))
    base = 1.0 + q * xa
    outside = base <= 0
    if strict and np.any(outside):
        where = "clamp" if q > 0 else "pole"
        raise DomainError(f"qexp({q}, x) outside its support (1 + q*x <= 0, {where})")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.exp(np.log1p(q * xa) / q)
    out = np.where(outside, 0.0 if q > 0 else np.inf, out)
    return _unwrap(x, out)


def qexp_clamp_boundary(q):
    """Argument at and below which ``qexp(q, .)`` is clamped to zero.

    ``-1/q`` for ``q > 0``.  For ``q <= 0`` the function never clamps and
    ``-inf`` is returned (for ``q < 0`` see :func:`qexp_pole`).
    """
    q = _check_q(q)
    if q > 0 and not is_log_limit(q):
        return -1.0 / q
    return -math.inf


def qexp_pole(q):
    """Argument at which ``qexp(q, .)`` blows up: ``-1/q`` for ``q < 0``, else ``+inf``."""
    q = _check_q(q)
    if q < 0 and not is_log_limit(q):
        return -1.0 / q
    return math.inf
