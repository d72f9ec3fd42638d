# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: per-candidate energies, dissipation sums, exact updates.

Function-for-function mirror of rateindep._reference; rateindep.kernels picks
whichever backend imports.
"""

from libc.math cimport fabs, pow, sqrt, cos, acos, copysign, INFINITY, pi

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def weighted_l1(const double[::1] w, const double[::1] a, const double[::1] b):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double s = 0.0
    for i in range(n):
        s += w[i] * fabs(b[i] - a[i])
    return s


def weighted_l1_batch(const double[::1] w, const double[::1] a,
                      const double[:, ::1] B):
    cdef Py_ssize_t i, j, m = B.shape[0], n = B.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += w[j] * fabs(B[i, j] - a[j])
        out[i] = s
    return out_arr


cdef inline double _abs_pow(double z, double beta):
    # beta == 2 dominates in practice; z*z == |z|**2 exactly
    if beta == 2.0:
        return z * z
    return pow(fabs(z), beta)


def power_energy(const double[::1] w, const double[::1] alpha, double beta,
                 const double[::1] g, const double[::1] z):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double s = 0.0
    for i in range(n):
        s += w[i] * (alpha[i] * _abs_pow(z[i], beta) - g[i] * z[i])
    return s


def power_energy_batch(const double[::1] w, const double[::1] alpha, double beta,
                       const double[::1] g, const double[:, ::1] Z):
    cdef Py_ssize_t i, j, m = Z.shape[0], n = Z.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += w[j] * (alpha[j] * _abs_pow(Z[i, j], beta) - g[j] * Z[i, j])
        out[i] = s
    return out_arr


cdef inline double _sign(double x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def play_update(const double[::1] alpha, double beta, const double[::1] g,
                double c, const double[::1] prev, const double[::1] lo,
                const double[::1] hi):
    cdef Py_ssize_t i, n = alpha.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double ab, h_prev, target, y
    for i in range(n):
        ab = alpha[i] * beta
        h_prev = ab * _sign(prev[i]) * pow(fabs(prev[i]), beta - 1.0)
        if h_prev < g[i] - c:
            y = g[i] - c
            target = _sign(y) * pow(fabs(y) / ab, 1.0 / (beta - 1.0))
        elif h_prev > g[i] + c:
            y = g[i] + c
            target = _sign(y) * pow(fabs(y) / ab, 1.0 / (beta - 1.0))
        else:
            target = prev[i]
        if target < lo[i]:
            target = lo[i]
        elif target > hi[i]:
            target = hi[i]
        out[i] = target
    return out_arr


cdef inline double _maxlin(double sp, double sm, double v):
    cdef double a = sp * v
    cdef double b = -sm * v
    return a if a > b else b


def threshold_dissipation(const double[::1] w, double sp, double sm,
                          const double[::1] a, const double[::1] b):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double s = 0.0
    for i in range(n):
        s += w[i] * _maxlin(sp, sm, b[i] - a[i])
    return s


def threshold_dissipation_batch(const double[::1] w, double sp, double sm,
                                const double[::1] a, const double[:, ::1] B):
    cdef Py_ssize_t i, j, m = B.shape[0], n = B.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += w[j] * _maxlin(sp, sm, B[i, j] - a[j])
        out[i] = s
    return out_arr


def drop_dissipation(const double[::1] areas, double c_d,
                     const double[::1] a, const double[::1] b):
    cdef Py_ssize_t i, n = areas.shape[0]
    cdef double s = 0.0
    for i in range(n):
        if b[i] > a[i]:
            return INFINITY
        s += areas[i] * (a[i] - b[i])
    return c_d * s


def drop_dissipation_batch(const double[::1] areas, double c_d,
                           const double[::1] a, const double[:, ::1] B):
    cdef Py_ssize_t i, j, m = B.shape[0], n = B.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s
    cdef bint bad
    for i in range(m):
        s = 0.0
        bad = False
        for j in range(n):
            if B[i, j] > a[j]:
                bad = True
                break
            s += areas[j] * (a[j] - B[i, j])
        out[i] = INFINITY if bad else c_d * s
    return out_arr


def chain_energy_batch(double c_springs, const double[::1] kappas,
                       const double[:, ::1] Z, double load, int control):
    cdef Py_ssize_t i, j, m = Z.shape[0], n = Z.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double comp, zk
    cdef bint broken
    for i in range(m):
        comp = c_springs
        broken = False
        for j in range(n):
            zk = Z[i, j] * kappas[j]
            if zk == 0.0:
                broken = True
            else:
                comp += 1.0 / zk
        if control == 0:
            out[i] = 0.0 if broken else 0.5 * load * load / comp
        else:
            out[i] = -INFINITY if broken else -0.5 * load * load * comp
    return out_arr


def well_energy(double h, const double[::1] g, const double[::1] z):
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double s = 0.0, d, zz
    for i in range(n - 1):
        d = z[i + 1] - z[i]
        s += d * d
    s /= 2.0 * h
    for i in range(n):
        zz = z[i] * z[i] - 1.0
        s += h * (zz * zz - g[i] * z[i])
    return s


def well_energy_batch(double h, const double[::1] g, const double[:, ::1] Z):
    cdef Py_ssize_t i, j, m = Z.shape[0], n = Z.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s, d, zz
    for i in range(m):
        s = 0.0
        for j in range(n - 1):
            d = Z[i, j + 1] - Z[i, j]
            s += d * d
        s /= 2.0 * h
        for j in range(n):
            zz = Z[i, j] * Z[i, j] - 1.0
            s += h * (zz * zz - g[j] * Z[i, j])
        out[i] = s
    return out_arr


cdef inline double _cbrt(double x):
    return copysign(pow(fabs(x), 1.0 / 3.0), x)


cdef int _cubic_roots(double p, double q, double* roots):
    """Real roots of t^3 + p t + q = 0 into roots[0..]; returns the count."""
    cdef double disc, s, m, arg, theta
    cdef int k
    if p == 0.0 and q == 0.0:
        roots[0] = 0.0
        return 1
    disc = 0.25 * q * q + p * p * p / 27.0
    if disc > 0.0:
        s = sqrt(disc)
        roots[0] = _cbrt(-0.5 * q + s) + _cbrt(-0.5 * q - s)
        return 1
    if disc == 0.0:
        roots[0] = 3.0 * q / p
        roots[1] = -1.5 * q / p
        return 2
    m = 2.0 * sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    theta = acos(arg) / 3.0
    for k in range(3):
        roots[k] = m * cos(theta - 2.0 * pi * k / 3.0)
    return 3


def depressed_cubic_roots(double p, double q):
    cdef double roots[3]
    cdef int n = _cubic_roots(p, q, roots)
    return tuple(roots[i] for i in range(n))


cdef double _well_full_obj(double h, const double[::1] g, double c,
                           const double[::1] z, const double[::1] z_prev):
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double s = 0.0, d, zz
    for i in range(n - 1):
        d = z[i + 1] - z[i]
        s += d * d
    s /= 2.0 * h
    for i in range(n):
        zz = z[i] * z[i] - 1.0
        s += h * (zz * zz - g[i] * z[i]) + c * h * fabs(z[i] - z_prev[i])
    return s


def i2_descent(double h, const double[::1] g, double c,
               const double[::1] z_start, const double[::1] z_prev,
               const double[::1] lo, const double[::1] hi,
               const unsigned char[::1] fixed, double tol, int max_sweeps):
    cdef Py_ssize_t i, n = z_start.shape[0]
    z_arr = np.array(z_start, dtype=np.float64, copy=True)
    cdef double[::1] z = z_arr
    cdef double obj, new_obj, decrease
    cdef double nb_left, nb_right, nb_sum, p_kink, P, base_q, Q
    cdef double best_val, best_move, best_zeta, zeta, val, move, zz, sign_br
    cdef double roots[3]
    cdef double cands[9]
    cdef int n_cands, r, nr, sweeps, sweep, m, br

    obj = _well_full_obj(h, g, c, z, z_prev)
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        for i in range(n):
            if fixed[i]:
                continue
            nb_left = z[i - 1] if i > 0 else 0.0
            nb_right = z[i + 1] if i < n - 1 else 0.0
            m = (1 if i > 0 else 0) + (1 if i < n - 1 else 0)
            nb_sum = (nb_left if i > 0 else 0.0) + (nb_right if i < n - 1 else 0.0)
            p_kink = z_prev[i]
            P = m / (4.0 * h * h) - 1.0
            base_q = -nb_sum / h - h * g[i]
            cands[0] = p_kink
            cands[1] = lo[i]
            cands[2] = hi[i]
            n_cands = 3
            for br in range(2):
                sign_br = 1.0 if br == 0 else -1.0
                Q = (base_q + sign_br * c * h) / (4.0 * h)
                nr = _cubic_roots(P, Q, roots)
                for r in range(nr):
                    if (sign_br > 0.0 and roots[r] >= p_kink) or \
                       (sign_br < 0.0 and roots[r] <= p_kink):
                        zeta = roots[r]
                        if zeta < lo[i]:
                            zeta = lo[i]
                        elif zeta > hi[i]:
                            zeta = hi[i]
                        cands[n_cands] = zeta
                        n_cands += 1
            best_val = INFINITY
            best_move = INFINITY
            best_zeta = z[i]
            for r in range(n_cands):
                zeta = cands[r]
                if zeta < lo[i] or zeta > hi[i]:
                    continue
                zz = zeta * zeta - 1.0
                val = h * (zz * zz - g[i] * zeta) + c * h * fabs(zeta - p_kink)
                if i > 0:
                    val += (zeta - nb_left) * (zeta - nb_left) / (2.0 * h)
                if i < n - 1:
                    val += (nb_right - zeta) * (nb_right - zeta) / (2.0 * h)
                move = fabs(zeta - p_kink)
                if (val < best_val
                        or (val == best_val and move < best_move)
                        or (val == best_val and move == best_move and zeta < best_zeta)):
                    best_val = val
                    best_move = move
                    best_zeta = zeta
            z[i] = best_zeta
        new_obj = _well_full_obj(h, g, c, z, z_prev)
        decrease = obj - new_obj
        obj = new_obj
        if decrease < tol:
            break
    return z_arr, obj, sweeps
