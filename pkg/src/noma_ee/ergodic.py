"""Ergodic NOMA sum rate: Gauss-Chebyshev PDF model, Monte-Carlo oracle, asymptotic law.

The single-antenna gain g = |a|^2 / (1 + d^alpha) with d uniform over the disk
area has density

    f(x) = integral_0^R (2r/R^2) c(r) exp(-c(r) x) dr,   c(r) = 1 + r^alpha.

Mapping r = (R/2)(theta + 1) and applying an N-node Gauss-Chebyshev rule turns
f into a mixture of N exponentials, (1/R) sum_j delta_j exp(-c_j x).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .channel import Placement, make_rng, sample_gains
from .errors import DomainError, InvariantError, NonConvergenceError
from .kernels import exp_mixture, mc_sum_rate_moments

DEFAULT_NODES = 50
QUAD_TOL = 1e-8
TAIL_MASS = 1e-12


@dataclass(frozen=True)
class GcqCoefficients:
    R_D: float
    alpha: float
    theta: np.ndarray
    omega: np.ndarray
    t: np.ndarray
    c: np.ndarray
    delta: np.ndarray

    @property
    def N(self):
        return self.theta.size

    def normalization(self):
        """Total probability mass of the approximate PDF; tends to 1 as N grows."""
        return float(np.sum(self.delta / self.c) / self.R_D)


def gcq_coefficients(N, R_D, alpha):
    if int(N) != N or N < 1:
        raise DomainError(f"node count must be a positive integer, got {N!r}")
    if not R_D > 0 or not alpha > 0:
        raise DomainError(f"need R_D > 0 and alpha > 0, got R_D={R_D!r}, alpha={alpha!r}")
    j = np.arange(1, int(N) + 1)
    theta = np.cos((2 * j - 1) * np.pi / (2 * N))
    omega = np.full(int(N), np.pi / N)
    t = 0.5 * R_D * theta + 0.5 * R_D
    c = 1.0 + t**alpha
    delta = omega * np.sqrt(1.0 - theta**2) * t * c
    return GcqCoefficients(R_D=float(R_D), alpha=float(alpha), theta=theta, omega=omega,
                           t=t, c=c, delta=delta)


def _check_gain(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("channel gain must be >= 0")
    return x


def _scalar_or_array(v):
    return float(v) if np.ndim(v) == 0 else v


def gain_pdf(x, coeffs):
    x = _check_gain(x)
    return _scalar_or_array(exp_mixture(x, coeffs.delta / coeffs.R_D, coeffs.c))


def gain_cdf(x, coeffs):
    """CDF implied by the mixture PDF, 1 - (1/R) sum_j (delta_j/c_j) exp(-c_j x)."""
    x = _check_gain(x)
    return _scalar_or_array(1.0 - exp_mixture(x, coeffs.delta / (coeffs.c * coeffs.R_D), coeffs.c))


def _term_integral(rho, share, residual, coeffs, tol):
    weights = coeffs.delta / coeffs.R_D
    # integrand weight decays at least like exp(-c_min x)
    x_max = -math.log(TAIL_MASS) / coeffs.c.min()

    def integrand(x):
        rate = math.log2(1.0 + x * rho * share / (x * rho * residual + 1.0))
        return rate * float(np.dot(weights, np.exp(-coeffs.c * x)))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(integrand, 0.0, x_max, epsabs=tol, epsrel=0.0, limit=500)
        except integrate.IntegrationWarning as exc:
            raise NonConvergenceError(
                f"outer rate integral did not converge: {exc}",
                diagnostics={"share": share, "residual": residual, "x_max": x_max, "rho": rho},
            ) from exc
    if abserr > tol:
        raise NonConvergenceError(
            f"outer rate integral error estimate {abserr:.3g} exceeds {tol:.3g}",
            diagnostics={"share": share, "residual": residual, "x_max": x_max, "abserr": abserr},
        )
    return value


def ergodic_terms_gcq(config, alloc, nodes=DEFAULT_NODES, tol=QUAD_TOL):
    """Per-UE ergodic rate terms under the mixture PDF, SIC order."""
    if alloc.K != config.K:
        raise DomainError(f"allocation over {alloc.K} users for K={config.K}")
    if Placement(config.placement) is not Placement.UNIFORM_AREA:
        raise InvariantError("the quadrature PDF model assumes uniform_area placement")
    coeffs = gcq_coefficients(nodes, config.R_D, config.alpha)
    residual = alloc.residual
    terms = np.zeros(alloc.K)
    for k in range(alloc.K):
        if alloc.gamma[k] == 0.0:
            continue
        terms[k] = _term_integral(config.rho, alloc.gamma[k], residual[k], coeffs, tol)
    return terms


def ergodic_sum_rate_gcq(config, alloc, nodes=DEFAULT_NODES, tol=QUAD_TOL):
    """Ergodic sum rate with every UE's gain drawn from the same (unordered) PDF.

    Single-antenna model: ``config.M`` is ignored.
    """
    return float(ergodic_terms_gcq(config, alloc, nodes, tol).sum())


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int
    per_user: np.ndarray


def _partition_sizes(trials, partitions):
    base, extra = divmod(trials, partitions)
    return [base + (1 if p < extra else 0) for p in range(partitions)]


def ergodic_sum_rate_mc(config, alloc, trials, seed=None, key=(), partitions=8,
                        ordered=False, workers=1):
    """Monte-Carlo estimate of the ergodic sum rate.

    Trials are split into ``partitions`` blocks; block p draws from substream
    ``(seed, *key, p)``. Block statistics are merged in block order, so the
    result depends only on (seed, key, trials, partitions), never on ``workers``.

    With ``ordered=False`` each rate term gets its own independent, unsorted
    gain, which is the model behind the quadrature formula. ``ordered=True``
    sorts each realization's gains first (true SIC order statistics).
    Single-antenna model: ``config.M`` is ignored.
    """
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    if alloc.K != config.K:
        raise DomainError(f"allocation over {alloc.K} users for K={config.K}")
    seed = config.seed if seed is None else seed
    sizes = [n for n in _partition_sizes(int(trials), max(1, int(partitions))) if n]
    gamma, residual = alloc.gamma, alloc.residual

    def run(p):
        rng = make_rng(seed, *key, p)
        gains = sample_gains(config, sizes[p], rng, antennas=1)
        if ordered:
            gains.sort(axis=1)
        return sizes[p], *mc_sum_rate_moments(gains, config.rho, gamma, residual)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, range(len(sizes))))
    else:
        blocks = [run(p) for p in range(len(sizes))]

    n, mean, m2 = 0, 0.0, 0.0
    per_user = np.zeros(alloc.K)
    for nb, mb, m2b, ub in blocks:
        # pairwise merge of (count, mean, M2)
        tot = n + nb
        d = mb - mean
        mean += d * nb / tot
        m2 += m2b + d * d * n * nb / tot
        per_user += ub * nb
        n = tot
    stderr = math.sqrt(m2 / (n - 1) / n) if n > 1 else float("nan")
    return MonteCarloEstimate(mean=mean, stderr=stderr, trials=n, per_user=per_user / n)


def asymptotic_rate(rho, K):
    """Reference law log2(rho * log2(log2 K)) for large K; a curve, not a bound."""
    if K < 3:
        raise DomainError(f"asymptotic rate needs K >= 3 so that log2(log2 K) > 0, got K={K}")
    arg = rho * math.log2(math.log2(K))
    if not arg > 1:
        raise DomainError(f"asymptotic rate needs rho*log2(log2 K) > 1, got {arg!r}")
    return math.log2(arg)
