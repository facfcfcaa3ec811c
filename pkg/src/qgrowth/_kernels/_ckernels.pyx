# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; a port of ``_pure.py`` with identical signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, expm1, pow, fabs, floor, isfinite, NAN, INFINITY, fmax, fmin

cnp.import_array()

BACKEND = "cython"

cdef double Q_ZERO_THRESHOLD = 1e-8
cdef double HUGE = 1e300
# 1 - p below which a collapsing step near p = 1 counts as arrival there
cdef double BRANCH_REACHED = 1e-6
cdef double DBL_EPS = 2.220446049250313e-16

cdef enum:
    OK = 0
    CLAMPED = 1
    DIVERGED = 2
    E_NONE = 0
    E_MAXSTEPS = 1
    E_DOMAIN = 2

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double DENSE[7][4]
DENSE[0][:] = [1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432]
DENSE[1][:] = [0.0, 0.0, 0.0, 0.0]
DENSE[2][:] = [0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799]
DENSE[3][:] = [0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072]
DENSE[4][:] = [0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632]
DENSE[5][:] = [0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844]
DENSE[6][:] = [0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423]

cdef double XGK[8]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467090129106643519620276, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.0]
cdef double WGK[8]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
cdef double WG[4]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]


cdef inline double _qln(double q, double x) nogil:
    if fabs(q) < Q_ZERO_THRESHOLD:
        return log(x)
    return expm1(q * log(x)) / q


cdef inline double _rhs(double p, double qprime, double q, double gamma,
                        double kappa, double effort) nogil:
    cdef double base, sat
    if not p > 0.0 or p == INFINITY:
        return NAN
    if gamma == 0.0:
        sat = 1.0
    else:
        base = -_qln(q, p)
        if base < 0.0 and gamma != floor(gamma):
            return NAN
        if base == 0.0 and gamma < 0.0:
            return NAN
        sat = pow(base, gamma)
    return kappa * pow(p, 1.0 - qprime) * sat - effort * p


def qln(double q, double x):
    return _qln(q, x)


def unified_rhs(double p, double qprime, double q, double gamma, double kappa, double effort):
    return _rhs(p, qprime, q, gamma, kappa, effort)


cdef double _initial_step(double y0, double f0, double rtol, double atol, double h_max,
                          double qprime, double q, double gamma, double kappa, double effort) nogil:
    cdef double sc = atol + rtol * fabs(y0)
    cdef double d0 = fabs(y0) / sc
    cdef double d1 = fabs(f0) / sc
    cdef double h0, h1, f1, d2
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = fmin(h0, h_max)
    f1 = _rhs(y0 + h0 * f0, qprime, q, gamma, kappa, effort)
    if not isfinite(f1):
        return h0 * 1e-3
    d2 = fabs(f1 - f0) / sc / h0
    if fmax(d1, d2) <= 1e-15:
        h1 = fmax(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / fmax(d1, d2), 0.2)
    return fmin(fmin(100 * h0, h1), h_max)


def dopri5_unified(double qprime, double q, double gamma, double kappa, double effort,
                   double p0, t_grid_in, double rtol, double atol, double h_max,
                   long max_steps, double t_stop, bint stop_near_one):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_grid = np.ascontiguousarray(t_grid_in, dtype=np.float64)
    cdef Py_ssize_t n = t_grid.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] values = np.empty(n)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] status = np.zeros(n, dtype=np.int8)
    cdef double t, y, t_end, near_one, h, k1, k2, k3, k4, k5, k6, k7, y_new, err, sc, ratio
    cdef double t_new, theta, acc, fac
    cdef double ks[7]
    cdef Py_ssize_t gi, i, j
    cdef long n_steps = 0
    cdef int err_code = E_NONE
    cdef bint stopped = False, diverged = False, extinct = False, last

    values[0] = p0
    t = t_grid[0]
    y = p0
    t_end = fmin(t_grid[n - 1], t_stop)
    near_one = 10.0 * atol
    gi = 1
    while gi < n and t_grid[gi] <= t:
        values[gi] = p0
        gi += 1
    if gi >= n:
        return values, status, E_NONE, t, y, 0

    k1 = _rhs(y, qprime, q, gamma, kappa, effort)
    if not isfinite(k1):
        return values, status, E_DOMAIN, t, y, 0
    h = _initial_step(y, k1, rtol, atol, h_max, qprime, q, gamma, kappa, effort)

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

        k2 = _rhs(y + h * A21 * k1, qprime, q, gamma, kappa, effort)
        k3 = _rhs(y + h * (A31 * k1 + A32 * k2), qprime, q, gamma, kappa, effort)
        k4 = _rhs(y + h * (A41 * k1 + A42 * k2 + A43 * k3), qprime, q, gamma, kappa, effort)
        k5 = _rhs(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), qprime, q, gamma, kappa, effort)
        k6 = _rhs(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
                  qprime, q, gamma, kappa, effort)
        y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = _rhs(y_new, qprime, q, gamma, kappa, effort)
        if not (isfinite(y_new) and isfinite(k7)):
            if fabs(y) > 1e100 or fabs(y_new) > HUGE:
                diverged = True
                break
            h *= 0.25
            if h <= 16 * DBL_EPS * fmax(1.0, fabs(t)):
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
        sc = atol + rtol * fmax(fabs(y), fabs(y_new))
        ratio = fabs(err) / sc
        if ratio > 1.0:
            h *= fmax(0.2, 0.9 * pow(ratio, -0.2))
            if h <= 16 * DBL_EPS * fmax(1.0, fabs(t)):
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
        ks[0] = k1; ks[1] = k2; ks[2] = k3; ks[3] = k4; ks[4] = k5; ks[5] = k6; ks[6] = k7
        while gi < n and t_grid[gi] <= t_new:
            theta = (t_grid[gi] - t) / h
            acc = 0.0
            for j in range(7):
                acc += ks[j] * theta * (DENSE[j][0] + theta * (DENSE[j][1] + theta * (DENSE[j][2] + theta * DENSE[j][3])))
            values[gi] = y + h * acc
            gi += 1
        t = t_new
        y = y_new
        k1 = k7
        if fabs(y) > HUGE:
            diverged = True
            break
        if stop_near_one and 1.0 - y < near_one:
            stopped = True
            break
        if ratio == 0.0:
            fac = 10.0
        else:
            fac = fmin(10.0, fmax(0.2, 0.9 * pow(ratio, -0.2)))
        h *= fac

    if stopped:
        for i in range(1, gi):
            if values[i] > 1.0 - near_one:
                values[i] = 1.0 - near_one
                status[i] = CLAMPED
        for i in range(gi, n):
            values[i] = 1.0 - near_one
            status[i] = CLAMPED
    elif extinct:
        for i in range(gi, n):
            values[i] = 0.0
            status[i] = CLAMPED
    elif diverged or (err_code == E_NONE and t_stop <= t_grid[n - 1]):
        for i in range(gi, n):
            values[i] = INFINITY
            status[i] = DIVERGED
    return values, status, err_code, t, y, n_steps


cdef inline double _power_integrand(double u, double c1, double e, double c2) nogil:
    return pow(u, c1) * pow(1.0 - pow(u, e), c2)


cdef void _gk15(double c1, double e, double c2, double lo, double hi,
                double* val, double* err) nogil:
    cdef double center = 0.5 * (lo + hi)
    cdef double half = 0.5 * (hi - lo)
    cdef double fc = _power_integrand(center, c1, e, c2)
    cdef double resk = fc * WGK[7]
    cdef double resg = fc * WG[3]
    cdef double dx, fsum
    cdef int j
    for j in range(7):
        dx = half * XGK[j]
        fsum = _power_integrand(center - dx, c1, e, c2) + _power_integrand(center + dx, c1, e, c2)
        resk += WGK[j] * fsum
        if j % 2 == 1:
            resg += WG[j // 2] * fsum
    val[0] = resk * half
    err[0] = fabs((resk - resg) * half)


def power_quad(double c1, double e, double c2, double lo, double hi,
               double abstol, double reltol, int max_intervals=4000):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] iv
    cdef Py_ssize_t count, worst, i
    cdef double total, total_err, a, b, m, v1, e1, v2, e2, best
    if hi <= lo:
        return 0.0, 0.0, True
    iv = np.empty((max_intervals, 4))
    _gk15(c1, e, c2, lo, hi, &v1, &e1)
    iv[0, 0] = lo; iv[0, 1] = hi; iv[0, 2] = v1; iv[0, 3] = e1
    count = 1
    total = v1
    total_err = e1
    while total_err > fmax(abstol, reltol * fabs(total)):
        if count >= max_intervals:
            return total, total_err, False
        worst = 0
        best = iv[0, 3]
        for i in range(1, count):
            if iv[i, 3] > best:
                best = iv[i, 3]
                worst = i
        a = iv[worst, 0]
        b = iv[worst, 1]
        m = 0.5 * (a + b)
        if not (a < m and m < b):
            return total, total_err, False
        _gk15(c1, e, c2, a, m, &v1, &e1)
        _gk15(c1, e, c2, m, b, &v2, &e2)
        iv[worst, 0] = a; iv[worst, 1] = m; iv[worst, 2] = v1; iv[worst, 3] = e1
        iv[count, 0] = m; iv[count, 1] = b; iv[count, 2] = v2; iv[count, 3] = e2
        count += 1
        total = 0.0
        total_err = 0.0
        for i in range(count):
            total += iv[i, 2]
            total_err += iv[i, 3]
    return total, total_err, True
