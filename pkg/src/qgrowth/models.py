"""Growth-model zoo built on the unified law

    d qln(q', p)/dt = kappa * (-qln(q, p))**gamma          (minus an effort term)

with ``p = n / n_inf`` the population normalised by its carrying capacity.
Every named model is a row of :data:`ROWS` fixing some of ``(q', q, gamma,
kappa)``; :func:`model_table` binds the remaining free entries.  Closed-form
solutions are vectorised over ``t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError
from .qcore import is_log_limit, qexp, qln

__all__ = [
    "DEFAULT_P0",
    "GrowthParams",
    "ModelKind",
    "ModelRow",
    "ROWS",
    "TABLE_KINDS",
    "MicroscopicParams",
    "parse_kind",
    "model_table",
    "saturation_rate",
    "rhs_dp_dt",
    "effort_form_rate",
    "malthus_solution",
    "logistic_solution",
    "gompertz_solution",
    "mitscherlich_solution",
    "richards_solution",
    "schaefer_solution",
    "schaefer_equivalent_params",
    "divergence_time",
    "gvb_solution",
    "hyper_gompertz_solution",
    "turner_solution",
    "kinetic_solution",
    "closed_form",
    "has_closed_form",
    "marusic_map",
    "marusic_y_from_p",
    "microscopic_qtilde",
    "blumberg_hyperbolic",
    "smith_rhs",
    "tw_kappa_from_r",
]

#: initial condition used when a caller does not supply ``p0`` (the value used
#: in the standard comparison set)
DEFAULT_P0 = 0.001

# trajectory point flags
OK = "ok"
CLAMPED = "clamped"
DIVERGED = "diverged"


def _is_integer(x):
    return float(x) == math.floor(x)


@dataclass(frozen=True)
class GrowthParams:
    """Fully bound parameters of the unified growth law.

    ``qprime`` deforms the left-hand logarithm, ``q`` the saturation
    logarithm, ``gamma`` is the saturation exponent, ``kappa`` the rate
    constant (1/time), ``effort`` a constant removal rate subtracted from
    ``d ln p/dt`` and ``p0`` the initial normalised population.
    """

    qprime: float
    q: float
    gamma: float
    kappa: float
    effort: float = 0.0
    p0: float = DEFAULT_P0

    def __post_init__(self):
        for name in ("qprime", "q", "gamma", "kappa", "effort", "p0"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.p0 <= 0:
            raise DomainError(f"p0 must be > 0, got {self.p0!r}")
        if self.p0 > 1 and self.gamma != 0 and not _is_integer(self.gamma):
            raise DomainError(
                f"p0 = {self.p0} > 1 makes (-qln(q, p))**gamma complex for "
                f"non-integer gamma = {self.gamma}")

    @property
    def alpha(self):
        """Exponent of the Tsoularis-Wallace form, ``1 - q'``."""
        return 1.0 - self.qprime

    def with_(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return {"qprime": self.qprime, "q": self.q, "gamma": self.gamma,
                "kappa": self.kappa, "epsilon": self.effort, "p0": self.p0}


class ModelKind(enum.Enum):
    MALTHUS = "Malthus"
    VERHULST = "Verhulst"
    GOMPERTZ = "Gompertz"
    HYPER_GOMPERTZ = "HyperGompertz"
    RICHARDS = "Richards"
    RICHARDS_SCHAEFER = "RichardsSchaefer"
    MITSCHERLICH = "Mitscherlich"
    BLUMBERG = "Blumberg"
    TURNER = "Turner"
    SPECIALIZED_VON_BERTALANFFY = "SpecializedVonBertalanffy"
    GENERALIZED_VON_BERTALANFFY = "GeneralizedVonBertalanffy"
    MARUSIC_BAJZER = "MarusicBajzer"
    TSOULARIS_WALLACE = "TsoularisWallace"
    ZIPF_MANDELBROT_KINETIC = "ZipfMandelbrotKinetic"
    SMITH_APPROX = "SmithApprox"


def parse_kind(name):
    """Look up a :class:`ModelKind` by value or member name, case-insensitively."""
    if isinstance(name, ModelKind):
        return name
    key = str(name).replace("-", "").replace("_", "").replace(" ", "").lower()
    for kind in ModelKind:
        if key in (kind.value.lower(), kind.name.replace("_", "").lower()):
            return kind
    known = ", ".join(k.value for k in ModelKind)
    raise DomainError(f"unknown model {name!r}; known models: {known}")


# ---------------------------------------------------------------------------
# rate laws


def _saturation_base(q, p):
    base = -np.asarray(qln(q, p), dtype=float)
    return base


def saturation_rate(params, p):
    """Relative growth rate ``d ln p/dt = kappa p**(-q') (-qln(q, p))**gamma - effort``.

    Raises
    ------
    DomainError
        ``p <= 0``, or the base ``-qln(q, p)`` is negative while ``gamma``
        is not an integer.
    """
    pa = np.asarray(p, dtype=float)
    if np.any(pa <= 0) or not np.all(np.isfinite(pa)):
        raise DomainError("saturation_rate needs finite p > 0")
    if params.gamma == 0:
        sat = np.ones_like(pa)
    else:
        base = _saturation_base(params.q, pa)
        if not _is_integer(params.gamma) and np.any(base < 0):
            raise DomainError(
                f"(-qln({params.q}, p))**{params.gamma} is complex for p > 1")
        with np.errstate(divide="ignore"):
            sat = base ** params.gamma
    out = params.kappa * pa ** (-params.qprime) * sat - params.effort
    return float(out) if np.ndim(p) == 0 else out


def rhs_dp_dt(params, p):
    """Absolute growth rate ``dp/dt = p * saturation_rate(params, p)``."""
    out = np.asarray(p, dtype=float) * saturation_rate(params, p)
    return float(out) if np.ndim(p) == 0 else out


def effort_form_rate(params, p):
    """``kappa gamma qln(gamma, -qln(q, p)) + kappa``: the saturation term
    rewritten as a deformed log with an effort-like constant ``-kappa``.

    Equal to ``kappa (-qln(q, p))**gamma`` wherever both are defined.
    """
    base = _saturation_base(params.q, p)
    if np.any(base <= 0):
        raise DomainError("effort form needs -qln(q, p) > 0, i.e. p < 1")
    out = params.kappa * params.gamma * np.asarray(qln(params.gamma, base)) + params.kappa
    return float(out) if np.ndim(p) == 0 else out


def smith_rhs(r, a):
    """Exact Smith law ``dp/dt = r p (1 - p) / (1 + r a p)`` as a callable of p."""
    def f(p):
        return r * p * (1.0 - p) / (1.0 + r * a * p)
    return f


def tw_kappa_from_r(r, q, gamma, qprime, n_inf=1.0):
    """Rate constant ``kappa = r q**gamma n_inf**(alpha - 1)`` with ``alpha = 1 - q'``."""
    return r * q ** gamma * n_inf ** (-qprime)


# ---------------------------------------------------------------------------
# closed forms


def _qexp_ext(q, x):
    """qexp extended to x = +-inf by its limits (+inf -> inf, -inf -> 0)."""
    shape = np.shape(x)
    x = np.array(x, dtype=float, ndmin=1)
    # 0 * inf arises only for a stationary start (p0 = 1): the argument is 0
    x = np.where(np.isnan(x), 0.0, x)
    finite = np.isfinite(x)
    out = np.where(x > 0, np.inf, 0.0)
    if np.any(finite):
        out[finite] = qexp(q, x[finite])
    return out.reshape(shape)


def _t_array(t):
    return np.asarray(t, dtype=float)


def _out(t, values):
    return float(values) if np.ndim(t) == 0 else values


def _pin_origin(values, ta, p0):
    """Return exactly p0 at t = 0 (the deformed round trip can be off by an ulp)."""
    values = np.array(values, dtype=float)
    values[np.asarray(ta) == 0] = p0
    return values


def _flags_from_values(values, inner_clamped=None):
    flags = np.full(np.shape(values), OK, dtype=object)
    flags[values == 0] = CLAMPED
    flags[~np.isfinite(values)] = DIVERGED
    if inner_clamped is not None:
        flags[np.asarray(inner_clamped) & (flags == OK)] = CLAMPED
    return flags


def _check_p0(p0):
    if not (math.isfinite(p0) and p0 > 0):
        raise DomainError(f"p0 must be finite and > 0, got {p0!r}")


def malthus_solution(kappa, p0, t):
    """``p0 exp(kappa t)``."""
    _check_p0(p0)
    ta = _t_array(t)
    with np.errstate(over="ignore"):
        return _out(t, p0 * np.exp(kappa * ta))


def logistic_solution(kappa, p0, t):
    """Verhulst closed form ``1 / (1 + (1/p0 - 1) exp(-kappa t))``."""
    _check_p0(p0)
    ta = _t_array(t)
    with np.errstate(over="ignore", divide="ignore"):
        den = 1.0 + (1.0 / p0 - 1.0) * np.exp(-kappa * ta)
        values = np.where(den > 0, 1.0 / den, np.inf)
    return _out(t, _pin_origin(values, ta, p0))


def gompertz_solution(kappa, p0, t):
    """``p0 ** exp(-kappa t)``."""
    _check_p0(p0)
    ta = _t_array(t)
    with np.errstate(over="ignore"):
        return _out(t, p0 ** np.exp(-kappa * ta))


def mitscherlich_solution(kappa, p0, t):
    """Monomolecular closed form ``1 - (1 - p0) exp(-kappa t)``."""
    _check_p0(p0)
    ta = _t_array(t)
    with np.errstate(over="ignore"):
        return _out(t, _pin_origin(1.0 - (1.0 - p0) * np.exp(-kappa * ta), ta, p0))


def _richards(q, kappa, p0, ta):
    with np.errstate(over="ignore", under="ignore"):
        arg = qln(-q, p0) * np.exp(-kappa * ta)
    values = _pin_origin(_qexp_ext(-q, arg), ta, p0)
    return values, _flags_from_values(values)


def richards_solution(q, kappa, p0, t, strict=False):
    """Richards closed form ``qexp(-q, qln(-q, p0) exp(-kappa t))``.

    Solves ``d ln p/dt = -kappa qln(q, p)``.  ``q = 1`` is the logistic curve,
    ``q -> 0`` the Gompertz curve and ``q = -1`` the Mitscherlich curve.  With
    ``strict=True`` a clamped (extinct, value 0) or divergent point raises
    :class:`DomainError` instead of being returned.
    """
    _check_p0(p0)
    values, flags = _richards(float(q), float(kappa), float(p0), _t_array(t))
    if strict:
        _raise_on_flags(flags, "richards_solution")
    return _out(t, values)


def _raise_on_flags(flags, name):
    if np.any(flags == CLAMPED):
        raise DomainError(f"{name}: trajectory clamped (extinction / saturation)")
    if np.any(flags == DIVERGED):
        raise DomainError(f"{name}: trajectory diverged")


def _schaefer_asymptote(q, effort):
    a = qexp(q, effort)
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"qexp({q}, {effort}) = {a}: no positive asymptote for this effort")
    return a


def _schaefer(q, kappa, effort, p0, ta):
    a = _schaefer_asymptote(q, effort)
    values, flags = _richards(q, kappa - q * effort, p0 / a, ta)
    return _pin_origin(a * values, ta, p0), flags


def schaefer_solution(q, kappa, effort, p0, t, strict=False):
    """Richards growth with effort: ``A qexp(-q, -qln(q, A/p0) exp(-(kappa - q eps) t))``.

    ``A = qexp(q, effort)`` is the asymptote.  This is the published closed
    form; it is the exact solution of ``d ln p/dt = -k (qln(q, p) - effort)``
    with ``k = (kappa - q effort) / (1 + q effort)`` (see
    :func:`schaefer_equivalent_params`), which reduces to the Richards law
    for ``effort = 0``.
    """
    _check_p0(p0)
    values, flags = _schaefer(float(q), float(kappa), float(effort), float(p0), _t_array(t))
    if strict:
        _raise_on_flags(flags, "schaefer_solution")
    return _out(t, values)


def schaefer_equivalent_params(q, kappa, effort):
    """``(kappa_eff, effort_eff)`` such that the unified law with ``q' = 0``,
    ``gamma = 1`` has :func:`schaefer_solution` as its exact solution."""
    a_q = 1.0 + q * effort
    if a_q <= 0:
        raise DomainError(f"1 + q*effort = {a_q} <= 0: no positive asymptote")
    kappa_eff = (kappa - q * effort) / a_q
    return kappa_eff, -kappa_eff * effort


def divergence_time(kappa, p0):
    """Blow-up time ``ln(1 - 1/p0) / kappa`` of the logistic curve started above capacity.

    Requires ``kappa < 0`` and ``p0 > 1``; otherwise the curve stays finite.
    """
    if not kappa < 0:
        raise DomainError(f"finite-time blow-up needs kappa < 0, got {kappa!r}")
    if not p0 > 1:
        raise DomainError(f"finite-time blow-up needs p0 > 1, got {p0!r}")
    return math.log1p(-1.0 / p0) / kappa


def _gvb(q, kappa, p0, ta):
    with np.errstate(over="ignore", under="ignore"):
        arg = qln(q, p0) * np.exp(-kappa * ta)
    values = _pin_origin(_qexp_ext(q, arg), ta, p0)
    return values, _flags_from_values(values)


def gvb_solution(q, kappa, p0, t, strict=False):
    """Generalized von Bertalanffy closed form ``qexp(q, qln(q, p0) exp(-kappa t))``."""
    _check_p0(p0)
    values, flags = _gvb(float(q), float(kappa), float(p0), _t_array(t))
    if strict:
        _raise_on_flags(flags, "gvb_solution")
    return _out(t, values)


def _hyper_gompertz(gamma, kappa, p0, ta):
    z0 = -math.log(p0)
    with np.errstate(over="ignore"):
        inner = _qexp_ext(1.0 - gamma, -kappa * ta / z0 ** (1.0 - gamma))
        values = _pin_origin(np.exp(-z0 * inner), ta, p0)
    flags = _flags_from_values(values, inner_clamped=(inner == 0) | ~np.isfinite(inner))
    return values, flags


def hyper_gompertz_solution(gamma, kappa, p0, t, strict=False):
    """Hyper-Gompertz closed form for ``d ln p/dt = kappa (-ln p)**gamma``:

        p(t) = exp(ln(p0) * qexp(1 - gamma, -kappa t / (-ln p0)**(1 - gamma)))

    For ``gamma < 1`` the inner deformed exponential clamps at finite time and
    the curve sits at ``p = 1`` from then on (flagged clamped).
    """
    if not 0 < p0 < 1:
        raise DomainError(f"hyper-Gompertz needs 0 < p0 < 1, got {p0!r}")
    values, flags = _hyper_gompertz(float(gamma), float(kappa), float(p0), _t_array(t))
    if strict:
        _raise_on_flags(flags, "hyper_gompertz_solution")
    return _out(t, values)


def _turner(q, gamma, kappa, p0, ta):
    v0 = qln(-q, p0)
    c = qln(q, 1.0 / p0) ** (gamma - 1.0)
    with np.errstate(over="ignore"):
        inner = _qexp_ext(1.0 - gamma, -kappa * ta * c)
        values = _pin_origin(_qexp_ext(-q, v0 * inner), ta, p0)
    flags = _flags_from_values(values, inner_clamped=(inner == 0) | ~np.isfinite(inner))
    return values, flags


def turner_solution(q, gamma, kappa, p0, t, strict=False):
    """Turner et al. closed form

        p(t) = qexp(-q, qln(-q, p0) qexp(1 - gamma, -kappa t qln(q, 1/p0)**(gamma - 1)))

    solving ``d ln p/dt = kappa p**(q (1 - gamma)) (-qln(q, p))**gamma``,
    i.e. the unified law with ``q' = q (gamma - 1)``.
    """
    if not 0 < p0 < 1:
        raise DomainError(f"Turner closed form needs 0 < p0 < 1, got {p0!r}")
    if not qln(q, 1.0 / p0) > 0:
        raise DomainError("Turner closed form needs qln(q, 1/p0) > 0")
    values, flags = _turner(float(q), float(gamma), float(kappa), float(p0), _t_array(t))
    if strict:
        _raise_on_flags(flags, "turner_solution")
    return _out(t, values)


def _kinetic(q, k, y0, xa):
    values = _pin_origin(y0 * _qexp_ext(q, xa * k / y0 ** q), xa, y0)
    return values, _flags_from_values(values)


def kinetic_solution(q, k, y0, x, strict=False):
    """Solution ``y0 qexp(q, k x / y0**q)`` of ``dy/dx = k y**(1 - q)``, ``y(0) = y0``."""
    if not (math.isfinite(y0) and y0 > 0):
        raise DomainError(f"y0 must be > 0, got {y0!r}")
    if k == 0:
        raise DomainError("kinetic equation needs k != 0")
    values, flags = _kinetic(float(q), float(k), float(y0), _t_array(x))
    if strict:
        _raise_on_flags(flags, "kinetic_solution")
    return _out(x, values)


# ---------------------------------------------------------------------------
# Model table rows


@dataclass(frozen=True)
class ModelRow:
    """One named model: fixed entries, free slots and how to bind them.

    ``qprime_text`` ... ``kappa_text`` are the table column entries (``*``
    marks a free slot).  ``required`` lists the free parameters a caller must
    supply (besides ``p0``); ``rate_alias`` names an alternative spelling of
    the rate (``r``) and how it converts into ``kappa``.
    """

    kind: ModelKind
    display: str
    qprime_text: str
    q_text: str
    gamma_text: str
    kappa_text: str
    equation: str
    required: tuple
    optional: tuple = ()
    rate_alias: bool = False
    in_table: bool = True
    approximation: bool = False
    alpha_text: str = ""
    bind: Callable = field(default=None, repr=False, compare=False)

    @property
    def alpha_column(self):
        """Tsoularis-Wallace exponent ``alpha = 1 - q'`` as table text."""
        return self.alpha_text or _ALPHA_OF[self.qprime_text]

    @property
    def free(self):
        """All parameter names this row accepts (``p0`` included)."""
        names = list(self.required) + list(self.optional) + ["p0"]
        if self.rate_alias:
            names.append("r")
        return tuple(names)


_ALPHA_OF = {"0": "1", "1": "0", "1/3": "2/3", "*": "*", "q̃": "1−q̃", "1-0.473": "0.473"}


def _bind_fixed(qprime=None, q=None, gamma=None):
    def bind(v):
        return dict(
            qprime=v["qprime"] if qprime is None else qprime(v) if callable(qprime) else qprime,
            q=v["q"] if q is None else q(v) if callable(q) else q,
            gamma=v["gamma"] if gamma is None else gamma(v) if callable(gamma) else gamma,
        )
    return bind


_ROW_LIST = [
    ModelRow(ModelKind.MALTHUS, "Malthus (exponential)", "0", "*", "0", "r",
             "d ln p/dt = r", required=("kappa",), optional=("q",), rate_alias=True,
             bind=_bind_fixed(0.0, lambda v: v.get("q", 0.0), 0.0)),
    ModelRow(ModelKind.VERHULST, "Verhulst (logistic)", "0", "1", "1", "r",
             "d ln p/dt = r (1-p)", required=("kappa",), rate_alias=True,
             bind=_bind_fixed(0.0, 1.0, 1.0)),
    ModelRow(ModelKind.GOMPERTZ, "Gompertz", "0", "0", "1", "*",
             "d ln p/dt = -κ ln p", required=("kappa",),
             bind=_bind_fixed(0.0, 0.0, 1.0)),
    ModelRow(ModelKind.HYPER_GOMPERTZ, "hyper-Gompertz", "0", "0", "*", "*",
             "d ln p/dt = κ (-ln p)^γ", required=("gamma", "kappa"),
             bind=_bind_fixed(0.0, 0.0, None)),
    ModelRow(ModelKind.RICHARDS, "Richards", "0", "*", "1", "r q̃",
             "d ln p/dt = r (1-p^q̃)", required=("q", "kappa"), rate_alias=True,
             bind=_bind_fixed(0.0, None, 1.0)),
    ModelRow(ModelKind.TSOULARIS_WALLACE, "Tsoularis and Wallace", "*", "*", "*", "*",
             "d ln_q̃′ p/dt = κ (-ln_q̃ p)^γ", required=("qprime", "q", "gamma", "kappa"),
             optional=("n_inf",), rate_alias=True, bind=_bind_fixed()),
    ModelRow(ModelKind.MARUSIC_BAJZER, "Marusic and Bajzer", "*", "*", "1", "*",
             "d ln_q̃′ p/dt = -κ ln_q̃ p", required=("qprime", "q", "kappa"),
             bind=_bind_fixed(None, None, 1.0)),
    ModelRow(ModelKind.MITSCHERLICH, "Mitscherlich (monomolecular)", "1", "1", "1", "*",
             "ln_1 dp/dt = dp/dt = κ (1-p)", required=("kappa",),
             bind=_bind_fixed(1.0, 1.0, 1.0)),
    ModelRow(ModelKind.BLUMBERG, "Blumberg", "*", "1", "*", "*",
             "d ln_q̃′ p/dt = κ (1-p)^γ", required=("qprime", "gamma", "kappa"),
             bind=_bind_fixed(None, 1.0, None)),
    ModelRow(ModelKind.TURNER, "Turner et al.", "q̃(γ−1)", "*", "*", "*",
             "d ln p/dt = κ p^(q̃(1-γ)) (-ln_q̃ p)^γ", required=("q", "gamma", "kappa"),
             alpha_text="1+q̃(1−γ)",
             bind=_bind_fixed(lambda v: v["q"] * (v["gamma"] - 1.0), None, None)),
    ModelRow(ModelKind.SPECIALIZED_VON_BERTALANFFY, "Specialized von Bertalanffy",
             "1/3", "1/3", "1", "*", "d ln_1/3 p/dt = -κ ln_1/3 p", required=("kappa",),
             bind=_bind_fixed(1.0 / 3.0, 1.0 / 3.0, 1.0)),
    ModelRow(ModelKind.GENERALIZED_VON_BERTALANFFY, "Generalized von Bertalanffy",
             "q̃", "*", "1", "*", "d ln_q̃ p/dt = -κ ln_q̃ p", required=("q", "kappa"),
             bind=_bind_fixed(lambda v: v["q"], None, 1.0)),
    ModelRow(ModelKind.SMITH_APPROX, "Smith", "1-0.473", "1", "1", "*", "approximation",
             required=("kappa",), approximation=True,
             bind=_bind_fixed(1.0 - 0.473, 1.0, 1.0)),
    ModelRow(ModelKind.RICHARDS_SCHAEFER, "Richards-Schaefer", "0", "*", "1", "*",
             "d ln p/dt = -κ ln_q̃ p - ε", required=("q", "kappa", "epsilon"),
             rate_alias=True, in_table=False,
             bind=_bind_fixed(0.0, None, 1.0)),
    ModelRow(ModelKind.ZIPF_MANDELBROT_KINETIC, "Zipf-Mandelbrot kinetic", "*", "*", "0", "*",
             "d ln_q̃′ p/dt = κ", required=("qprime", "kappa"), in_table=False,
             bind=_bind_fixed(None, 0.0, 0.0)),
]

#: every row keyed by kind
ROWS = {row.kind: row for row in _ROW_LIST}

#: the thirteen rows of the published summary table, in its order
TABLE_KINDS = tuple(row.kind for row in _ROW_LIST if row.in_table)

_ALIASES = {"epsilon": "epsilon", "effort": "epsilon", "eps": "epsilon", "ε": "epsilon",
            "qp": "qprime", "q_prime": "qprime", "κ": "kappa", "γ": "gamma"}


def _normalise_names(free_params):
    out = {}
    for key, value in free_params.items():
        name = _ALIASES.get(key, key)
        if name in out:
            raise DomainError(f"parameter {name!r} given twice")
        try:
            out[name] = float(value)
        except (TypeError, ValueError):
            raise DomainError(f"parameter {key!r} must be a real number, got {value!r}") from None
    return out


def model_table(kind, free_params=None, **kwargs):
    """Bind a model row's free slots into a :class:`GrowthParams`.

    Parameters are given as a mapping and/or keywords, spelled ``qprime``,
    ``q``, ``gamma``, ``kappa``, ``epsilon`` and ``p0`` (``p0`` defaults to
    :data:`DEFAULT_P0`).  Rows whose rate column is ``r`` or ``r q`` accept
    ``r`` instead of ``kappa``; Tsoularis-Wallace converts ``r`` with an
    optional ``n_inf``.

    Raises
    ------
    DomainError
        Unknown model, a missing or unexpected parameter, or a value outside
        the row's domain.
    """
    kind = parse_kind(kind)
    row = ROWS[kind]
    values = _normalise_names(dict(free_params or {}, **kwargs))
    allowed = set(row.free)
    extra = sorted(set(values) - allowed)
    if extra:
        raise DomainError(
            f"{kind.value} does not take parameter(s) {', '.join(extra)}; "
            f"free slots are {', '.join(row.free)}")
    if row.rate_alias and "r" in values:
        if "kappa" in values:
            raise DomainError(f"{kind.value}: give either r or kappa, not both")
    if "n_inf" in values and "r" not in values:
        raise DomainError(f"{kind.value}: n_inf only converts r into kappa")
    missing = [name for name in row.required
               if name not in values and not (name == "kappa" and "r" in values)]
    if missing:
        raise DomainError(f"{kind.value} needs parameter(s) {', '.join(missing)}")

    bound = row.bind(values)
    if "r" in values:
        r = values["r"]
        if kind in (ModelKind.RICHARDS, ModelKind.RICHARDS_SCHAEFER):
            kappa = r * bound["q"]
        elif kind is ModelKind.TSOULARIS_WALLACE:
            kappa = tw_kappa_from_r(r, bound["q"], bound["gamma"], bound["qprime"],
                                    values.get("n_inf", 1.0))
        else:
            kappa = r
    else:
        kappa = values["kappa"]
    effort = values.get("epsilon", 0.0)
    p0 = values.get("p0", DEFAULT_P0)

    if kind in (ModelKind.RICHARDS, ModelKind.RICHARDS_SCHAEFER) and bound["q"] < -1:
        raise DomainError(f"{kind.value} requires q >= -1, got {bound['q']}")
    if kind is ModelKind.RICHARDS_SCHAEFER:
        _schaefer_asymptote(bound["q"], effort)
    if kind in (ModelKind.HYPER_GOMPERTZ, ModelKind.TURNER) and not 0 < p0 < 1:
        raise DomainError(f"{kind.value} requires 0 < p0 < 1, got {p0}")
    return GrowthParams(bound["qprime"], bound["q"], bound["gamma"], kappa, effort, p0)


def has_closed_form(kind):
    return parse_kind(kind) in _CLOSED_FORMS


def closed_form(kind, params, t):
    """Evaluate the row's closed-form solution at times ``t``.

    Returns ``(values, flags)`` arrays; flags are ``"ok"``, ``"clamped"``
    (deformed exponential clamped: extinction or saturation reached in
    finite time) or ``"diverged"``.
    """
    kind = parse_kind(kind)
    try:
        fn = _CLOSED_FORMS[kind]
    except KeyError:
        raise DomainError(f"{kind.value} has no closed-form solution") from None
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    return fn(params, ta)


def _cf_malthus(prm, ta):
    values = np.asarray(malthus_solution(prm.kappa, prm.p0, ta))
    return values, _flags_from_values(values)


def _cf_mitscherlich(prm, ta):
    values = np.asarray(mitscherlich_solution(prm.kappa, prm.p0, ta))
    return values, _flags_from_values(values)


def _cf_hyper_gompertz(prm, ta):
    if not 0 < prm.p0 < 1:
        raise DomainError("hyper-Gompertz needs 0 < p0 < 1")
    return _hyper_gompertz(prm.gamma, prm.kappa, prm.p0, ta)


def _cf_turner(prm, ta):
    if not 0 < prm.p0 < 1:
        raise DomainError("Turner closed form needs 0 < p0 < 1")
    return _turner(prm.q, prm.gamma, prm.kappa, prm.p0, ta)


_CLOSED_FORMS = {
    ModelKind.MALTHUS: _cf_malthus,
    ModelKind.VERHULST: lambda prm, ta: _richards(1.0, prm.kappa, prm.p0, ta),
    ModelKind.GOMPERTZ: lambda prm, ta: _richards(0.0, prm.kappa, prm.p0, ta),
    ModelKind.HYPER_GOMPERTZ: _cf_hyper_gompertz,
    ModelKind.RICHARDS: lambda prm, ta: _richards(prm.q, prm.kappa, prm.p0, ta),
    ModelKind.RICHARDS_SCHAEFER: lambda prm, ta: _schaefer(prm.q, prm.kappa, prm.effort, prm.p0, ta),
    ModelKind.MITSCHERLICH: _cf_mitscherlich,
    ModelKind.TURNER: _cf_turner,
    ModelKind.SPECIALIZED_VON_BERTALANFFY: lambda prm, ta: _gvb(1.0 / 3.0, prm.kappa, prm.p0, ta),
    ModelKind.GENERALIZED_VON_BERTALANFFY: lambda prm, ta: _gvb(prm.q, prm.kappa, prm.p0, ta),
    ModelKind.ZIPF_MANDELBROT_KINETIC: lambda prm, ta: _kinetic(prm.qprime, prm.kappa, prm.p0, ta),
}


# ---------------------------------------------------------------------------
# parameter maps


def _marusic_scale(a, b, q):
    if a == 0 or b == 0:
        raise DomainError("Marusic-Bajzer map needs a != 0 and b != 0")
    ratio = -b / a  # (m - k) / m
    if ratio <= 0:
        raise DomainError(
            f"(m - k)/m = -b/a = {ratio} <= 0: the rescaling to p = n/n_inf is not real")
    return ratio, ratio ** (-1.0 / q)  # c = [m/(m-k)]**(1/q)


def marusic_map(a, b, alpha, beta, y0=1.0):
    """Map ``dy/dx = a y**alpha + b y**beta`` onto the unified law with ``gamma = 1``.

    With ``m = a``, ``k = a + b``, ``q' = alpha - 1`` and ``q = alpha - beta``
    the rescaled variable ``p = 1 / (c y)``, ``c = [m/(m-k)]**(1/q)``, obeys
    ``d qln(q', p)/dt = kappa (-qln(q, p))`` with

        kappa = -m q [(m - k)/m]**(q'/q) = -a q (-b/a)**(q'/q).

    ``y0`` is the initial value of y, mapped to ``p0 = 1/(c y0)``.
    """
    a, b, alpha, beta, y0 = (float(v) for v in (a, b, alpha, beta, y0))
    qprime = alpha - 1.0
    q = alpha - beta
    if q == 0:
        raise DomainError(
            "alpha == beta: the equation collapses to dy/dx = (a+b) y**alpha "
            "and has no carrying capacity to normalise by")
    if not y0 > 0:
        raise DomainError(f"y0 must be > 0, got {y0!r}")
    ratio, c = _marusic_scale(a, b, q)
    kappa = -a * q * ratio ** (qprime / q)
    return GrowthParams(qprime, q, 1.0, kappa, 0.0, 1.0 / (c * y0))


def marusic_y_from_p(p, a, b, alpha, beta):
    """Invert the normalisation of :func:`marusic_map`: ``y = 1/(c p)``."""
    q = float(alpha) - float(beta)
    _, c = _marusic_scale(float(a), float(b), q)
    return 1.0 / (c * np.asarray(p, dtype=float))


@dataclass(frozen=True)
class MicroscopicParams:
    """Parameters of the cell-interaction model behind the Richards law.

    ``gamma_int`` is the decay exponent of the inhibitory interaction,
    ``d_f`` the fractal dimension of the cell cluster.  ``mean_g`` (mean
    replication rate), ``j_coupling`` and ``omega`` (geometry constant) enter
    only the rate, not the deformation.
    """

    gamma_int: float
    d_f: float
    mean_g: float = 0.0
    j_coupling: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.d_f > 0:
            raise DomainError(f"fractal dimension must be > 0, got {self.d_f!r}")
        if self.gamma_int < 0:
            raise DomainError(f"interaction exponent must be >= 0, got {self.gamma_int!r}")


def microscopic_qtilde(mp):
    """Deformation ``q = 1 - gamma_int / d_f`` and the growth regime it selects.

    Regimes: ``"Verhulst"`` (no decay, q = 1), ``"Gompertz"`` (decay matches
    the fractal dimension, q = 0), ``"Mitscherlich"`` (q = -1), otherwise
    ``"exponential-tail"`` for q < 0 and ``"Richards"`` for 0 < q < 1.
    """
    q = 1.0 - mp.gamma_int / mp.d_f
    if mp.gamma_int == 0:
        regime = "Verhulst"
    elif math.isclose(mp.gamma_int, mp.d_f, rel_tol=1e-12):
        regime, q = "Gompertz", 0.0
    elif math.isclose(mp.gamma_int, 2 * mp.d_f, rel_tol=1e-12):
        regime, q = "Mitscherlich", -1.0
    elif q < 0:
        regime = "exponential-tail"
    else:
        regime = "Richards"
    return q, regime


def blumberg_hyperbolic(n, convention="alpha"):
    """Partial parameters of the hyperbolic regenerative-growth special case.

    The two published readings disagree on which exponent carries ``1 - 1/N``:

    ``"alpha"``   gamma = 1 + 1/N and alpha = 1 - 1/N, i.e. ``q' = 1/N`` on
                  the Blumberg row (``q = 1``);
    ``"qtilde"``  gamma = 1 + 1/N and ``q = 1 - 1/N``; ``q'`` is left to the
                  caller.
    """
    n = float(n)
    if n == 0:
        raise DomainError("N must be non-zero")
    if convention == "alpha":
        return {"qprime": 1.0 / n, "q": 1.0, "gamma": 1.0 + 1.0 / n}
    if convention == "qtilde":
        return {"q": 1.0 - 1.0 / n, "gamma": 1.0 + 1.0 / n}
    raise DomainError(f"unknown convention {convention!r}; use 'alpha' or 'qtilde'")
