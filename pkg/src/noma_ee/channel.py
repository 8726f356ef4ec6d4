"""Single-cell downlink channel: disk placement, distance path loss, Rayleigh fading.

The base station sits at the cell center. Every UE gets one distance, shared by
all M antennas (UE-to-BS distances dwarf the array aperture), so the path-loss
factor is per UE while fast fading is i.i.d. per (antenna, UE) link.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, InvariantError
from .kernels import exp_mixture


class Placement(str, enum.Enum):
    UNIFORM_AREA = "uniform_area"
    UNIFORM_RADIUS = "uniform_radius"


class EffectiveGain(str, enum.Enum):
    MAX = "max"
    SUM = "sum"


@dataclass(frozen=True)
class SystemConfig:
    M: int = 1
    K: int = 2
    R_D: float = 10.0
    alpha: float = 2.0
    rho: float = 10.0
    seed: int = 0
    placement: Placement = Placement.UNIFORM_AREA
    effective_gain: EffectiveGain = EffectiveGain.MAX

    def __post_init__(self):
        object.__setattr__(self, "placement", Placement(self.placement))
        object.__setattr__(self, "effective_gain", EffectiveGain(self.effective_gain))
        if int(self.M) != self.M or self.M < 1:
            raise InvariantError(f"M must be a positive integer, got {self.M!r}")
        if int(self.K) != self.K or self.K < 1:
            raise InvariantError(f"K must be a positive integer, got {self.K!r}")
        for name in ("R_D", "alpha", "rho"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvariantError(f"{name} must be finite and > 0, got {value!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvariantError(f"seed must fit in 64 bits, got {self.seed!r}")


@dataclass(frozen=True)
class ChannelRealization:
    distances: np.ndarray  # (K,)
    fading: np.ndarray  # (M, K) complex
    beta: np.ndarray  # (K,)
    gains: np.ndarray = field(init=False)  # (M, K)

    def __post_init__(self):
        power = self.fading.real**2 + self.fading.imag**2
        object.__setattr__(self, "gains", power * self.beta)

    @property
    def M(self):
        return self.fading.shape[0]

    @property
    def K(self):
        return self.fading.shape[1]

    def effective_gains(self, mode=EffectiveGain.MAX):
        """Per-UE gain seen by the NOMA cluster.

        ``max`` picks the best single antenna for each UE; ``sum`` is the
        coherent-combining upper bound.
        """
        mode = EffectiveGain(mode)
        if mode is EffectiveGain.MAX:
            return self.gains.max(axis=0)
        return self.gains.sum(axis=0)


def make_rng(seed, *key):
    """Independent generator for substream ``key`` of master ``seed``.

    Substreams with distinct keys are statistically independent, so trials can
    be partitioned across workers without changing any draw.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def path_loss(d, alpha):
    """Distance attenuation 1/(1 + d**alpha); accepts scalars or arrays."""
    d = np.asarray(d, dtype=float)
    if not alpha > 0:
        raise DomainError(f"path-loss exponent must be > 0, got {alpha!r}")
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise DomainError("distance must be >= 0")
    beta = 1.0 / (1.0 + d**alpha)
    return float(beta) if beta.ndim == 0 else beta


def _radii(placement, R_D, u):
    if placement is Placement.UNIFORM_AREA:
        return R_D * np.sqrt(u)
    return R_D * u


def sample_placement(config, rng, size=None):
    """Distances of K UEs from the BS; ``size`` prepends batch dimensions."""
    shape = (config.K,) if size is None else (*np.atleast_1d(size), config.K)
    return _radii(config.placement, config.R_D, rng.random(shape))


def _complex_gaussian(rng, shape):
    # unit variance: real and imaginary parts each carry 1/2
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def sample_channel(config, distances, rng):
    distances = np.asarray(distances, dtype=float)
    if distances.shape != (config.K,):
        raise DomainError(f"expected {config.K} distances, got shape {distances.shape}")
    fading = _complex_gaussian(rng, (config.M, config.K))
    return ChannelRealization(distances=distances, fading=fading,
                              beta=path_loss(distances, config.alpha))


def sample_realization(config, rng):
    """Placement followed by fading, drawn from one stream in that order."""
    return sample_channel(config, sample_placement(config, rng), rng)


def sample_gains(config, n, rng, antennas=None):
    """Effective per-UE gains for ``n`` independent realizations, shape (n, K).

    Uses the same draw order as :func:`sample_realization`, so ``n=1`` gives the
    gains of ``sample_realization`` on an identically seeded stream.
    """
    M = config.M if antennas is None else antennas
    d = sample_placement(config, rng, size=n)
    a = _complex_gaussian(rng, (n, M, config.K))
    power = a.real**2 + a.imag**2
    g = power * path_loss(d, config.alpha)[:, None, :]
    if EffectiveGain(config.effective_gain) is EffectiveGain.MAX:
        return g.max(axis=1)
    return g.sum(axis=1)


def gain_survival(x, R_D, alpha, placement=Placement.UNIFORM_AREA, nodes=256):
    """P(g > x) for a single-antenna gain, by Gauss-Legendre integration over radius.

    Conditional on distance the gain is exponential with rate 1 + d**alpha, so
    the survival is the placement average of exp(-(1 + d**alpha) x).
    """
    placement = Placement(placement)
    u, w = leggauss(nodes)
    r = 0.5 * R_D * (u + 1.0)
    if placement is Placement.UNIFORM_AREA:
        weights = w * 0.5 * R_D * 2.0 * r / R_D**2
    else:
        weights = w * 0.5
    return exp_mixture(x, weights, 1.0 + r**alpha)


def realization_to_csv(realization, fp=None):
    """Long-format dump, one row per (UE, antenna). Returns the text if ``fp`` is None."""
    own = fp is None
    if own:
        fp = io.StringIO()
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["k", "d", "beta", "m", "re_a", "im_a", "gain"])
    for k in range(realization.K):
        for m in range(realization.M):
            a = realization.fading[m, k]
            writer.writerow([k, *(f"{v:.17g}" for v in (realization.distances[k], realization.beta[k])),
                             m, *(f"{v:.17g}" for v in (a.real, a.imag, realization.gains[m, k]))])
    if own:
        return fp.getvalue()
    return None
