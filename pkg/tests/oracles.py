"""Independent reference computations used to freeze expected values.

Nothing here imports the code paths under test except plain data types.
"""
import math

import numpy as np

LN2 = math.log(2.0)


def ee_grid_search(P_RF, N_0, K, lo=0.5, hi=10.0, step=1e-4):
    """Dense grid over (lo, hi]; returns (P_best, EE_best)."""
    L = math.log2(math.log2(K))
    P = lo + step * np.arange(1, int(round((hi - lo) / step)) + 1)
    ee = np.log2(P / N_0 * L) / (P + P_RF)
    i = int(np.argmax(ee))
    return float(P[i]), float(ee[i])


def ee_plain(P, P_RF, N_0, K):
    return math.log2(P / N_0 * math.log2(math.log2(K))) / (P + P_RF)


def central_difference(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def richardson_derivative(f, x, h):
    """Central difference with one Richardson step, O(h^4)."""
    d1 = central_difference(f, x, h)
    d2 = central_difference(f, x, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def second_difference(f, x, h):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def survival_alpha2(x, R_D):
    """P(g > x) for uniform-area placement and alpha = 2, in closed form.

    integral_0^R (2r/R^2) exp(-(1 + r^2) x) dr = exp(-x) (1 - exp(-R^2 x)) / (R^2 x).
    """
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    pos = x > 0
    xp = x[pos]
    out[pos] = np.exp(-xp) * -np.expm1(-R_D**2 * xp) / (R_D**2 * xp)
    return out


def ergodic_rate_exact(rho, share, residual, R_D, alpha):
    """E[log2(1 + g rho share / (g rho residual + 1))] by nested adaptive quadrature.

    Uses the exact gain law (distance then exponential), not the Chebyshev mixture.
    """
    from scipy import integrate

    def inner(r):
        c = 1.0 + r**alpha
        val, _ = integrate.quad(
            lambda x: math.log2(1 + x * rho * share / (x * rho * residual + 1)) * c * math.exp(-c * x),
            0, 40.0 / c, epsabs=1e-12, limit=200)
        return val * 2 * r / R_D**2

    val, _ = integrate.quad(inner, 0, R_D, epsabs=1e-10, limit=200)
    return val
