import math

import numpy as np
import pytest

from oracles import scipy_ode
from qgrowth.dynamics import (IntegratorConfig, Trajectory, beta_regime, integrate,
                              integrate_rhs, propagate_beta, solve, solve_params)
from qgrowth.errors import DomainError, IntegrationError
from qgrowth.models import (GrowthParams, closed_form, divergence_time, logistic_solution,
                            model_table, rhs_dp_dt, richards_solution, smith_rhs)

T10 = np.linspace(0, 10, 201)

# free deformations at kappa = 1, q = 2, gamma = 1.5 where the row has them
ORACLE_ROWS = [
    ("Malthus", {"kappa": 1.0}),
    ("Verhulst", {"kappa": 1.0}),
    ("Gompertz", {"kappa": 1.0}),
    ("HyperGompertz", {"gamma": 1.5, "kappa": 1.0}),
    ("Richards", {"q": 2.0, "kappa": 1.0}),
    ("Mitscherlich", {"kappa": 1.0}),
    ("Turner", {"q": 2.0, "gamma": 1.5, "kappa": 1.0}),
    ("SpecializedVonBertalanffy", {"kappa": 1.0}),
    ("GeneralizedVonBertalanffy", {"q": 2.0, "kappa": 1.0}),
    ("ZipfMandelbrotKinetic", {"qprime": 0.5, "kappa": 1.0}),
]


def test_integrate_examples():
    v = integrate(model_table("Verhulst", kappa=1, p0=0.5), [0, 1]).values[-1]
    assert abs(v - 1 / (1 + math.exp(-1))) <= 1e-8
    r = integrate(model_table("Richards", q=0.5, kappa=1, p0=0.01), [0, 5]).values[-1]
    assert abs(r - richards_solution(0.5, 1, 0.01, 5.0)) <= 1e-6
    m = integrate(model_table("Malthus", kappa=1), [0, 3]).values[-1]
    assert m == pytest.approx(0.001 * math.exp(3), rel=1e-8)


@pytest.mark.parametrize("kind, free", ORACLE_ROWS)
def test_oracle_agreement(kind, free):
    prm = model_table(kind, dict(free, p0=0.001))
    exact, _ = closed_form(kind, prm, T10)
    traj = integrate(prm, T10)
    assert np.max(np.abs(traj.values - exact)) <= 1e-6
    assert traj.values[0] == 0.001


def test_grid_invariance():
    prm = model_table("Turner", q=2, gamma=1.5, kappa=1)
    coarse = integrate(prm, np.linspace(0, 10, 11))
    fine = integrate(prm, np.linspace(0, 10, 1001))
    np.testing.assert_allclose(fine.values[::100], coarse.values, rtol=0, atol=1e-9)


def test_grid_not_starting_at_zero():
    prm = model_table("Verhulst", kappa=1, p0=0.1)
    traj = integrate(prm, [1.0, 2.0])
    np.testing.assert_allclose(traj.times, [1.0, 2.0])
    np.testing.assert_allclose(traj.values, logistic_solution(1, 0.1, [1.0, 2.0]), rtol=1e-8)


def test_tolerance_convergence():
    prm = model_table("Richards", q=2, kappa=1)
    exact, _ = closed_form("Richards", prm, T10)
    errs = []
    for rtol in (1e-4, 1e-6, 1e-8):
        traj = integrate(prm, T10, IntegratorConfig(rel_tol=rtol, abs_tol=1e-14))
        errs.append(np.max(np.abs(traj.values - exact)))
    assert errs[0] > errs[1] > errs[2]


def test_tolerance_halving_reduces_error():
    prm = model_table("Verhulst", kappa=1)
    exact = logistic_solution(1, 0.001, T10)
    err = [np.max(np.abs(integrate(prm, T10, IntegratorConfig(rel_tol=r, abs_tol=1e-14)).values
                         - exact)) for r in (2e-6, 1e-6, 5e-7)]
    assert err[0] >= err[1] >= err[2]


def test_divergent_branch_is_flagged_before_blowup():
    prm = model_table("Verhulst", kappa=-1, p0=2)
    ts = divergence_time(-1, 2)
    grid = np.linspace(0, 1, 101)
    traj = integrate(prm, grid)
    before = grid < 0.999 * ts
    assert all(f == "ok" for f, b in zip(traj.flags, before) if b)
    assert all(f == "diverged" for f, b in zip(traj.flags, before) if not b)
    assert np.all(np.isinf(traj.values[~before]))
    np.testing.assert_allclose(traj.values[before], richards_solution(1, -1, 2, grid[before]),
                               rtol=1e-6)


def test_generic_blowup_flagged():
    prm = GrowthParams(-1.0, 1, 0, 1.0, 0, 1.0)  # dp/dt = p**2, blow-up at t = 1
    traj = integrate(prm, [0.0, 0.5, 2.0])
    assert traj.flags == ("ok", "ok", "diverged")
    assert traj.values[1] == pytest.approx(2.0, rel=1e-8)


def test_branch_point_clamp():
    prm = model_table("HyperGompertz", gamma=0.5, kappa=1, p0=0.5)
    cfg = IntegratorConfig()
    traj = integrate(prm, np.linspace(0, 5, 51), cfg)
    clamped = traj.flagged("clamped")
    assert clamped[-1] and not clamped[0]
    assert np.all(traj.values[clamped] == 1 - 10 * cfg.abs_tol)
    exact, _ = closed_form("HyperGompertz", prm, traj.times)
    assert np.max(np.abs(traj.values - exact)) <= 1e-6


def test_finite_time_arrival_with_negative_gamma():
    prm = model_table("TsoularisWallace", qprime=0.3, q=0.5, gamma=-0.5, kappa=1)
    traj = integrate(prm, T10)
    assert traj.flags[-1] == "clamped"
    ref = propagate_beta(prm, T10)
    assert np.max(np.abs(traj.values - ref.values)) <= 1e-6


def test_finite_time_extinction():
    prm = model_table("Blumberg", qprime=0.9, gamma=0.5, kappa=-0.1, p0=0.5)
    traj = integrate(prm, T10)
    assert traj.flags[-1] == "clamped" and traj.values[-1] == 0.0


def test_step_budget_exhausted():
    prm = model_table("Verhulst", kappa=1)
    with pytest.raises(IntegrationError) as info:
        integrate(prm, T10, IntegratorConfig(max_steps=5))
    assert info.value.t is not None and info.value.p is not None


def test_domain_failure_carries_state():
    # p0 > 1 with gamma = 2: fine; with the base crossing zero and gamma non-integer it is not
    prm = GrowthParams(0, 1, 0.5, -1.0, 0.0, 0.5)  # decays from below: stays in domain
    integrate(prm, [0, 1])

    def bad(p):
        return math.nan if p > 0.3 else 1.0

    with pytest.raises(IntegrationError) as info:
        integrate_rhs(bad, 0.1, [0, 1])
    assert 0.29 < info.value.p <= 0.3


def test_bad_grids():
    prm = model_table("Verhulst", kappa=1)
    for grid in ([], [0, 0], [1, 0.5], [-1, 0], [0, math.nan]):
        with pytest.raises(DomainError):
            integrate(prm, grid)


def test_config_validation():
    with pytest.raises(DomainError):
        IntegratorConfig(rel_tol=0)
    with pytest.raises(DomainError):
        IntegratorConfig(max_steps=0)


def test_trajectory_validation():
    with pytest.raises(DomainError):
        Trajectory([0, 0], [1, 1], ("ok", "ok"))
    with pytest.raises(DomainError):
        Trajectory([0, 1], [1, 1], ("ok", "bogus"))
    with pytest.raises(DomainError):
        Trajectory([0, 1], [1], ("ok", "ok"))


# -- implicit beta solution ------------------------------------------------

BETA_CASES = [
    ("Blumberg", {"qprime": 0.9, "gamma": 0.5, "kappa": 1.0}),
    ("Blumberg", {"qprime": 0.3, "gamma": 0.2, "kappa": 0.5}),
    ("TsoularisWallace", {"qprime": 0.5, "q": 2.0, "gamma": 0.5, "kappa": 1.0}),
    ("TsoularisWallace", {"qprime": 0.2, "q": 0.7, "gamma": -1.0, "kappa": 0.4}),
    ("TsoularisWallace", {"qprime": -0.5, "q": -1.0, "gamma": 0.8, "kappa": 1.0}),
    ("TsoularisWallace", {"qprime": -0.2, "q": -2.0, "gamma": 0.3, "kappa": 2.0}),
]


@pytest.mark.parametrize("kind, free", BETA_CASES)
def test_beta_matches_ode(kind, free):
    prm = model_table(kind, dict(free, p0=0.001))
    b = propagate_beta(prm, T10)
    o = integrate(prm, T10)
    assert np.max(np.abs(b.values - o.values)) <= 1e-6


@pytest.mark.parametrize("kind, free", BETA_CASES)
def test_beta_matches_scipy(kind, free):
    prm = model_table(kind, dict(free, p0=0.01))
    t = np.linspace(0, 2, 21)
    ref = scipy_ode(lambda p: rhs_dp_dt(prm, p) if p < 1 else 0.0, 0.01, t)
    b = propagate_beta(prm, t)
    np.testing.assert_allclose(b.values, ref, rtol=1e-7, atol=1e-9)


def test_beta_starts_at_p0_and_is_monotone():
    prm = model_table("Blumberg", qprime=0.9, gamma=0.5, kappa=1)
    traj = propagate_beta(prm, np.linspace(0, 40, 401))
    assert traj.values[0] == prm.p0
    assert np.all(np.diff(traj.values) >= 0)
    assert traj.values[-1] == 1.0 and traj.flags[-1] == "clamped"


def test_beta_regimes():
    assert beta_regime(GrowthParams(0.5, 1, 0.5, 1, 0, 0.1)) == 1
    assert beta_regime(GrowthParams(-0.5, -1, 0.8, 1, 0, 0.1)) == 2
    assert beta_regime(GrowthParams(-0.5, -1, 0.3, 1, 0, 0.1)) is None  # gamma <= q'/q
    assert beta_regime(GrowthParams(0.5, 1, 1.0, 1, 0, 0.1)) is None
    assert beta_regime(GrowthParams(0.5, 1, 0.0, 1, 0, 0.1)) is None
    assert beta_regime(GrowthParams(0.5, -1, 0.5, 1, 0, 0.1)) is None
    assert beta_regime(GrowthParams(0.5, 1, 0.5, 1, 0.1, 0.1)) is None
    with pytest.raises(DomainError):
        propagate_beta(GrowthParams(0.5, 1, 1.5, 1, 0, 0.1), T10)


# -- dispatch --------------------------------------------------------------


def test_solve_dispatch():
    assert solve("Verhulst", {"kappa": 1}, T10)[1] == "analytic"
    assert solve("TsoularisWallace", {"qprime": 0.5, "q": 1, "gamma": 0.5, "kappa": 1},
                 T10)[1] == "beta"
    assert solve("Blumberg", {"qprime": 0.5, "gamma": 1.5, "kappa": 1}, T10)[1] == "ode"
    assert solve("SmithApprox", {"kappa": 1}, T10)[1] == "ode"
    assert solve("MarusicBajzer", {"qprime": 0.2, "q": 0.5, "kappa": 1}, T10)[1] == "ode"


def test_solve_uses_one_method_and_correct_values():
    traj, method = solve("Richards", {"q": 0.5, "kappa": 0.8, "p0": 0.01}, T10)
    assert method == "analytic"
    np.testing.assert_array_equal(traj.values, richards_solution(0.5, 0.8, 0.01, T10))


def test_solve_params_accepts_bound_params():
    prm = model_table("Gompertz", kappa=1)
    traj, method = solve_params("Gompertz", prm, T10)
    assert method == "analytic" and len(traj) == T10.size


def test_smith_exact_law_integration():
    t = np.linspace(0, 10, 51)
    traj = integrate_rhs(smith_rhs(1.0, 0.5), 0.01, t)
    ref = scipy_ode(smith_rhs(1.0, 0.5), 0.01, t)
    np.testing.assert_allclose(traj.values, ref, rtol=1e-7)
