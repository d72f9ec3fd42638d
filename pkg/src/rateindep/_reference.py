"""NumPy reference implementations of the hot kernels.

Mirrors rateindep._speedups function for function; selected at import time by
rateindep.kernels when the compiled extension is unavailable or disabled.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "numpy"


def weighted_l1(w, a, b):
    return float(np.dot(w, np.abs(b - a)))


def weighted_l1_batch(w, a, B):
    return np.abs(B - a) @ w


def power_energy(w, alpha, beta, g, z):
    return float(np.dot(w, alpha * np.abs(z) ** beta - g * z))


def power_energy_batch(w, alpha, beta, g, Z):
    return (alpha * np.abs(Z) ** beta - g * Z) @ w


def play_update(alpha, beta, g, c, prev, lo, hi):
    """Componentwise exact minimizer of a*|z|^beta - g*z + c*|z - prev| on [lo, hi].

    The driving map h(z) = a*beta*|z|^(beta-2)*z is strictly increasing, so
    the unconstrained minimizer is the play update: move to h^{-1}(g -+ c)
    when h(prev) leaves [g - c, g + c], else stay.  Clipping to the box keeps
    exactness because the per-component objective is convex.
    """
    ab = alpha * beta
    h_prev = ab * np.sign(prev) * np.abs(prev) ** (beta - 1.0)

    def hinv(y):
        return np.sign(y) * (np.abs(y) / ab) ** (1.0 / (beta - 1.0))

    out = np.where(h_prev < g - c, hinv(g - c),
                   np.where(h_prev > g + c, hinv(g + c), prev))
    return np.clip(out, lo, hi)


def threshold_dissipation(w, sp, sm, a, b):
    v = b - a
    return float(np.dot(w, np.maximum(sp * v, -sm * v)))


def threshold_dissipation_batch(w, sp, sm, a, B):
    V = B - a
    return np.maximum(sp * V, -sm * V) @ w


def drop_dissipation(areas, c_d, a, b):
    drop = a - b
    if np.any(drop < 0.0):
        return math.inf
    return float(c_d * np.dot(areas, drop))


def drop_dissipation_batch(areas, c_d, a, B):
    drop = a - B
    out = c_d * (drop @ areas)
    out[np.any(drop < 0.0, axis=1)] = math.inf
    return out


def chain_energy_batch(c_springs, kappas, Z, load, control):
    """Reduced energies of a series spring chain with glue interfaces.

    ``c_springs`` is the summed compliance of the plain springs and ``kappas``
    the glue stiffnesses; a row of ``Z`` holds the glue fractions.  Control 0
    is a prescribed end displacement ``load`` (zero compliance -> zero
    energy); control 1 is an end force (energy ``-load^2 * compliance / 2``,
    unbounded as glue vanishes, so callers keep glue away from zero).
    """
    with np.errstate(divide="ignore"):
        comp = c_springs + (1.0 / (Z * kappas)).sum(axis=1)
    if control == 0:
        with np.errstate(invalid="ignore"):
            out = 0.5 * load * load / comp
        out[np.isinf(comp)] = 0.0
        return out
    return -0.5 * load * load * comp


def well_energy(h, g, z):
    grad = float(np.sum(np.diff(z) ** 2)) / (2.0 * h)
    return grad + h * float(np.sum((z * z - 1.0) ** 2 - g * z))


def well_energy_batch(h, g, Z):
    grad = np.sum(np.diff(Z, axis=1) ** 2, axis=1) / (2.0 * h)
    return grad + h * np.sum((Z * Z - 1.0) ** 2 - g * Z, axis=1)


def depressed_cubic_roots(p, q):
    """Real roots of t^3 + p t + q = 0 (1, 2, or 3 roots, deterministic order)."""
    if p == 0.0 and q == 0.0:
        return (0.0,)
    disc = 0.25 * q * q + p * p * p / 27.0
    if disc > 0.0:
        s = math.sqrt(disc)
        u = math.copysign(abs(-0.5 * q + s) ** (1.0 / 3.0), -0.5 * q + s)
        v = math.copysign(abs(-0.5 * q - s) ** (1.0 / 3.0), -0.5 * q - s)
        return (u + v,)
    if disc == 0.0:
        return (3.0 * q / p, -1.5 * q / p)
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    two_pi_3 = 2.0 * math.pi / 3.0
    return tuple(m * math.cos(theta - two_pi_3 * k) for k in range(3))


def i2_descent(h, g, c, z_start, z_prev, lo, hi, fixed, tol, max_sweeps):
    """Cyclic exact coordinate descent on the incremental double-well objective.

    Objective: sum of a discrete gradient term, the double-well bulk term
    with loading ``g``, and the weighted l1 dissipation ``c*h*|z - z_prev|``.
    Each coordinate visit minimizes its one-dimensional section exactly via
    the real roots of the two branch cubics plus the kink and box candidates.
    Deterministic: ties prefer the smaller move, then the smaller value.
    """
    z = np.array(z_start, dtype=np.float64, copy=True)
    n = len(z)

    def full_obj(zz):
        return well_energy(h, g, zz) + c * h * float(np.sum(np.abs(zz - z_prev)))

    def local_obj(i, zeta, nb_left, nb_right):
        val = h * ((zeta * zeta - 1.0) ** 2 - g[i] * zeta) + c * h * abs(zeta - z_prev[i])
        if i > 0:
            val += (zeta - nb_left) ** 2 / (2.0 * h)
        if i < n - 1:
            val += (nb_right - zeta) ** 2 / (2.0 * h)
        return val

    obj = full_obj(z)
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        for i in range(n):
            if fixed[i]:
                continue
            nb_left = z[i - 1] if i > 0 else 0.0
            nb_right = z[i + 1] if i < n - 1 else 0.0
            m = (1 if i > 0 else 0) + (1 if i < n - 1 else 0)
            nb_sum = nb_left + nb_right
            p_kink = z_prev[i]
            P = m / (4.0 * h * h) - 1.0
            base_q = -nb_sum / h - h * g[i]
            cands = [p_kink, lo[i], hi[i]]
            for sign_br in (1.0, -1.0):
                Q = (base_q + sign_br * c * h) / (4.0 * h)
                for r in depressed_cubic_roots(P, Q):
                    if (sign_br > 0.0 and r >= p_kink) or (sign_br < 0.0 and r <= p_kink):
                        cands.append(min(max(r, lo[i]), hi[i]))
            best_val = math.inf
            best_move = math.inf
            best_zeta = z[i]
            for zeta in cands:
                if zeta < lo[i] or zeta > hi[i]:
                    continue
                val = local_obj(i, zeta, nb_left, nb_right)
                move = abs(zeta - p_kink)
                if (val < best_val
                        or (val == best_val and move < best_move)
                        or (val == best_val and move == best_move and zeta < best_zeta)):
                    best_val, best_move, best_zeta = val, move, zeta
            z[i] = best_zeta
        new_obj = full_obj(z)
        decrease = obj - new_obj
        obj = new_obj
        if decrease < tol:
            break
    return z, obj, sweeps
