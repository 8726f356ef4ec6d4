"""NOMA superposition coding with successive interference cancellation.

Users are indexed in SIC order, 0-based: index 0 is the weakest UE and K-1 the
strongest. UE k cancels the signals of every weaker UE i < k and treats the
stronger UEs i > k as noise, so its residual interference share is
sum(gamma[k+1:]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, EffectiveGain
from .errors import DomainError, InvariantError

SUM_TOL = 1e-12


@dataclass(frozen=True)
class PowerAllocation:
    gamma: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        if gamma.size == 0:
            raise InvariantError("power allocation needs at least one coefficient")
        if np.any(~np.isfinite(gamma)) or np.any(gamma < 0):
            raise InvariantError(f"power coefficients must be finite and >= 0, got {gamma.tolist()}")
        if abs(gamma.sum() - 1.0) > SUM_TOL:
            raise InvariantError(f"power coefficients must sum to 1, got {gamma.sum()!r}")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)

    @property
    def K(self):
        return self.gamma.size

    @property
    def residual(self):
        """Interference share left after SIC for each UE: sum of gamma above k."""
        tail = np.cumsum(self.gamma[::-1])[::-1]
        return np.append(tail[1:], 0.0)

    @classmethod
    def linear(cls, K):
        """gamma[k] proportional to K - k (0-based), more power to weaker UEs."""
        w = np.arange(K, 0, -1, dtype=float)
        return cls(w / w.sum())

    @classmethod
    def equal(cls, K):
        return cls(np.full(K, 1.0 / K))


@dataclass(frozen=True)
class RateReport:
    per_user: np.ndarray  # bits/s/Hz, SIC order
    order: np.ndarray  # original UE index for each SIC position
    sum: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sum", float(np.sum(self.per_user)))


def order_users(gains):
    """Stable ascending sort of effective gains; returns original indices."""
    gains = np.asarray(gains, dtype=float).reshape(-1)
    if gains.size == 0:
        raise DomainError("cannot order an empty set of users")
    return np.argsort(gains, kind="stable")


def sic_rate(k, gain, rho, alloc):
    """Achievable rate of the UE in SIC position ``k`` (0-based).

    log2(1 + rho*g*gamma[k] / (rho*g*residual[k] + 1)); ``gain`` may be an array.
    """
    if not 0 <= k < alloc.K or int(k) != k:
        raise DomainError(f"user index {k!r} outside 0..{alloc.K - 1}")
    share, residual = float(alloc.gamma[k]), float(alloc.residual[k])
    if np.ndim(gain) == 0:
        x = rho * float(gain)
        return math.log2(1.0 + x * share / (x * residual + 1.0))
    x = rho * np.asarray(gain, dtype=float)
    return np.log2(1.0 + x * share / (x * residual + 1.0))


def sum_rate(gains, rho, alloc, mode=EffectiveGain.MAX):
    """Per-UE and total NOMA rate for one realization.

    ``gains`` is either a :class:`ChannelRealization` (reduced to per-UE gains
    with ``mode``) or a length-K array of effective gains in any order; UEs are
    relabeled by :func:`order_users` before applying the SIC rates.
    """
    if isinstance(gains, ChannelRealization):
        gains = gains.effective_gains(mode)
    gains = np.asarray(gains, dtype=float).reshape(-1)
    if gains.size != alloc.K:
        raise DomainError(f"{gains.size} gains for an allocation over {alloc.K} users")
    order = order_users(gains)
    per_user = np.array([sic_rate(k, gains[i], rho, alloc) for k, i in enumerate(order)])
    return RateReport(per_user=per_user, order=order)
