"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The public names (``mc_sum_rate_moments``, ``exp_mixture``) dispatch to the
numba versions unless ``NOMA_EE_NUMBA=0`` is set or numba is missing. The two
paths agree to floating-point round-off, not bit-for-bit: numpy sums pairwise,
the compiled loops sum sequentially.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

_MIXTURE_CHUNK = 1 << 15


def _mc_sum_rate_moments_numpy(gains, rho, gamma, residual):
    sinr = rho * gains * gamma / (rho * gains * residual + 1.0)
    per_user = np.log2(1.0 + sinr)
    total = per_user.sum(axis=1)
    mean = total.mean()
    m2 = float(((total - mean) ** 2).sum())
    return float(mean), m2, per_user.mean(axis=0)


@njit(cache=True, nogil=True)
def _mc_sum_rate_moments_numba(gains, rho, gamma, residual):
    n, k_users = gains.shape
    user_sum = np.zeros(k_users)
    mean = 0.0
    m2 = 0.0
    for t in range(n):
        total = 0.0
        for k in range(k_users):
            x = rho * gains[t, k]
            r = np.log2(1.0 + x * gamma[k] / (x * residual[k] + 1.0))
            user_sum[k] += r
            total += r
        # Welford update
        delta = total - mean
        mean += delta / (t + 1)
        m2 += delta * (total - mean)
    return mean, m2, user_sum / n


def _exp_mixture_numpy(x, weights, rates):
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    flat_x = x.reshape(-1)
    flat_out = out.reshape(-1)
    for start in range(0, flat_x.size, _MIXTURE_CHUNK):
        block = flat_x[start:start + _MIXTURE_CHUNK]
        flat_out[start:start + _MIXTURE_CHUNK] = np.exp(-np.outer(block, rates)) @ weights
    return out


@njit(cache=True, nogil=True)
def _exp_mixture_numba_flat(x, weights, rates):
    out = np.empty(x.size)
    for i in range(x.size):
        acc = 0.0
        for j in range(weights.size):
            acc += weights[j] * np.exp(-rates[j] * x[i])
        out[i] = acc
    return out


def _exp_mixture_numba(x, weights, rates):
    x = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(x.reshape(-1))
    return _exp_mixture_numba_flat(flat, weights, rates).reshape(x.shape)


def mc_sum_rate_moments(gains, rho, gamma, residual):
    """Mean, sum of squared deviations, and per-user mean of the SIC sum rate.

    ``gains`` has shape (trials, K); column k is fed to rate term k with power
    share ``gamma[k]`` and residual interference share ``residual[k]``.
    """
    gains = np.ascontiguousarray(gains, dtype=np.float64)
    gamma = np.ascontiguousarray(gamma, dtype=np.float64)
    residual = np.ascontiguousarray(residual, dtype=np.float64)
    if USE_NUMBA:
        mean, m2, per_user = _mc_sum_rate_moments_numba(gains, float(rho), gamma, residual)
        return float(mean), float(m2), per_user
    return _mc_sum_rate_moments_numpy(gains, float(rho), gamma, residual)


def exp_mixture(x, weights, rates):
    """Evaluate sum_j weights[j] * exp(-rates[j] * x) elementwise over ``x``."""
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    if USE_NUMBA:
        return _exp_mixture_numba(x, weights, rates)
    return _exp_mixture_numpy(x, weights, rates)
