"""Pure-Python reference kernels.

Same algorithms, same constants and same return conventions as ``_ckernels.pyx``;
the compiled module is a line-by-line port of this file.
"""
import math

import numpy as np

Q_ZERO_THRESHOLD = 1e-8

# per-point status codes
OK = 0
CLAMPED = 1
DIVERGED = 2

# integrator exit codes
E_NONE = 0
E_MAXSTEPS = 1
E_DOMAIN = 2

HUGE = 1e300
# 1 - p below which a collapsing step near p = 1 counts as arrival there
BRANCH_REACHED = 1e-6

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

# Shampine's 4th-order continuous extension; row i multiplies stage k_i
DENSE = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

# Gauss-Kronrod 7/15 (QUADPACK qk15)
XGK = (0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
       0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
       0.586087235467090129106643519620276, 0.405845151377397166906606412076961,
       0.207784955007898467600689403773245, 0.0)
WGK = (0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
       0.204432940075298892414161999234649, 0.209482141084727828012999174891714)
WG = (0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327)

BACKEND = "python"


def qln(q, x):
    if abs(q) < Q_ZERO_THRESHOLD:
        return math.log(x)
    return math.expm1(q * math.log(x)) / q


def unified_rhs(p, qprime, q, gamma, kappa, effort):
    """dp/dt = kappa p^(1-q') (-qln(q, p))^gamma - effort p; NaN outside the domain."""
    if not p > 0.0 or p == math.inf:
        return math.nan
    try:
        if gamma == 0.0:
            sat = 1.0
        else:
            base = -qln(q, p)
            if base < 0.0 and gamma != math.floor(gamma):
                return math.nan
            if base == 0.0 and gamma < 0.0:
                return math.nan
            sat = base ** gamma
        return kappa * p ** (1.0 - qprime) * sat - effort * p
    except OverflowError:
        return math.inf


def _initial_step(f, y0, f0, rtol, atol, h_max):
    sc = atol + rtol * abs(y0)
    d0 = abs(y0) / sc
    d1 = abs(f0) / sc
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, h_max)
    f1 = f(y0 + h0 * f0)
    if not math.isfinite(f1):
        return h0 * 1e-3
    d2 = abs(f1 - f0) / sc / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, h_max)


def dopri5_grid(f, p0, t_grid, rtol, atol, h_max, max_steps, t_stop, stop_near_one):
    """Integrate the autonomous scalar ODE dp/dt = f(p) and sample it at t_grid.

    Returns ``(values, status, err_code, err_t, err_p, n_steps)``.  Grid points
    at or past ``t_stop`` are flagged DIVERGED; with ``stop_near_one`` the run
    stops once ``1 - p < 10 atol`` and the remaining points are set to
    ``1 - 10 atol`` with CLAMPED.  ``f`` must return NaN outside its domain;
    such steps are rejected and retried with a smaller step.  If the step then
    collapses within ``BRANCH_REACHED`` of p = 1 (with ``stop_near_one``) or of
    p = 0, the solution has reached that point in finite time and the rest of
    the grid is CLAMPED there; any other collapse exits with E_DOMAIN.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    n = t_grid.shape[0]
    values = np.empty(n)
    status = np.zeros(n, dtype=np.int8)
    values[0] = p0
    t = t_grid[0]
    y = p0
    t_end = min(t_grid[-1], t_stop)
    near_one = 10.0 * atol
    gi = 1
    while gi < n and t_grid[gi] <= t:
        values[gi] = p0
        gi += 1
    if gi >= n:
        return values, status, E_NONE, t, y, 0

    k1 = f(y)
    if not math.isfinite(k1):
        return values, status, E_DOMAIN, t, y, 0
    h = _initial_step(f, y, k1, rtol, atol, h_max)
    n_steps = 0
    err_code = E_NONE
    stopped = False  # near-one stop
    diverged = False
    extinct = False

    while t < t_end:
        if n_steps >= max_steps:
            err_code = E_MAXSTEPS
            break
        n_steps += 1
        if h > h_max:
            h = h_max
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True

        k2 = f(y + h * A21 * k1)
        k3 = f(y + h * (A31 * k1 + A32 * k2))
        k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = f(y_new)
        if not (math.isfinite(y_new) and math.isfinite(k7)):
            if abs(y) > 1e100 or abs(y_new) > HUGE:
                diverged = True
                break
            h *= 0.25
            if h <= 16 * 2.220446049250313e-16 * max(1.0, abs(t)):
                if stop_near_one and 1.0 - y < BRANCH_REACHED:
                    # finite-time arrival at the p = 1 branch point
                    stopped = True
                elif y < BRANCH_REACHED:
                    # finite-time extinction at p = 0
                    extinct = True
                else:
                    err_code = E_DOMAIN
                break
            continue
        err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * max(abs(y), abs(y_new))
        ratio = abs(err) / sc
        if ratio > 1.0:
            h *= max(0.2, 0.9 * ratio ** -0.2)
            if h <= 16 * 2.220446049250313e-16 * max(1.0, abs(t)):
                if stop_near_one and 1.0 - y < BRANCH_REACHED:
                    # finite-time arrival at the p = 1 branch point
                    stopped = True
                elif y < BRANCH_REACHED:
                    # finite-time extinction at p = 0
                    extinct = True
                else:
                    err_code = E_DOMAIN
                break
            continue

        t_new = t_end if last else t + h
        while gi < n and t_grid[gi] <= t_new:
            theta = (t_grid[gi] - t) / h
            acc = 0.0
            for k, row in zip((k1, k2, k3, k4, k5, k6, k7), DENSE):
                acc += k * theta * (row[0] + theta * (row[1] + theta * (row[2] + theta * row[3])))
            values[gi] = y + h * acc
            gi += 1
        t = t_new
        y = y_new
        k1 = k7
        if abs(y) > HUGE:
            diverged = True
            break
        if stop_near_one and 1.0 - y < near_one:
            stopped = True
            break
        fac = 10.0 if ratio == 0.0 else min(10.0, max(0.2, 0.9 * ratio ** -0.2))
        h *= fac

    if stopped:
        for i in range(1, gi):
            if values[i] > 1.0 - near_one:
                values[i] = 1.0 - near_one
                status[i] = CLAMPED
        values[gi:] = 1.0 - near_one
        status[gi:] = CLAMPED
    elif extinct:
        values[gi:] = 0.0
        status[gi:] = CLAMPED
    elif diverged or (err_code == E_NONE and t_stop <= t_grid[-1]):
        values[gi:] = math.inf
        status[gi:] = DIVERGED
    return values, status, err_code, t, y, n_steps


def dopri5_unified(qprime, q, gamma, kappa, effort, p0, t_grid, rtol, atol,
                   h_max, max_steps, t_stop, stop_near_one):
    def f(p):
        return unified_rhs(p, qprime, q, gamma, kappa, effort)

    return dopri5_grid(f, p0, t_grid, rtol, atol, h_max, max_steps, t_stop, stop_near_one)


def _power_integrand(u, c1, e, c2):
    try:
        return u ** c1 * (1.0 - u ** e) ** c2
    except ZeroDivisionError:
        return math.inf


def _gk15(c1, e, c2, lo, hi):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fc = _power_integrand(center, c1, e, c2)
    resk = fc * WGK[7]
    resg = fc * WG[3]
    for j in range(7):
        dx = half * XGK[j]
        fsum = _power_integrand(center - dx, c1, e, c2) + _power_integrand(center + dx, c1, e, c2)
        resk += WGK[j] * fsum
        if j % 2 == 1:
            resg += WG[j // 2] * fsum
    return resk * half, abs((resk - resg) * half)


def power_quad(c1, e, c2, lo, hi, abstol, reltol, max_intervals=4000):
    """Adaptive Gauss-Kronrod integral of u^c1 (1 - u^e)^c2 over [lo, hi].

    Globally adaptive: the interval with the largest error estimate is bisected
    until the summed estimate meets max(abstol, reltol |I|).  Returns
    ``(value, error_estimate, converged)``.
    """
    if hi <= lo:
        return 0.0, 0.0, True
    val, err = _gk15(c1, e, c2, lo, hi)
    ivals = [(lo, hi, val, err)]
    total = val
    total_err = err
    while total_err > max(abstol, reltol * abs(total)):
        if len(ivals) >= max_intervals:
            return total, total_err, False
        worst = max(range(len(ivals)), key=lambda i: ivals[i][3])
        a, b, v, er = ivals[worst]
        m = 0.5 * (a + b)
        if not (a < m < b):
            return total, total_err, False
        v1, e1 = _gk15(c1, e, c2, a, m)
        v2, e2 = _gk15(c1, e, c2, m, b)
        ivals[worst] = (a, m, v1, e1)
        ivals.append((m, b, v2, e2))
        total = 0.0
        total_err = 0.0
        for iv in ivals:
            total += iv[2]
            total_err += iv[3]
    return total, total_err, True
