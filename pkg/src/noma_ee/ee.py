"""Energy-efficiency maximization by Dinkelbach fractional programming.

The decision variable is one per-UE transmit power P shared by all K UEs. The
rate is the high-SNR proxy log2((P/N0) log2(log2 K)) and the objective is
rate / (P + P_RF). For a fixed ratio guess S the Dinkelbach subproblem
rate(P) - S (P + P_RF) is concave in P, so its maximizer over the feasible
interval is found by bisection on the derivative.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InfeasibleError, InvariantError, NonConvergenceError

LN2 = math.log(2.0)
DOMAIN_MARGIN = 1e-9


class GradientForm(str, enum.Enum):
    CORRECTED = "corrected"
    PAPER_LITERAL = "paper_literal"


class InnerSolver(str, enum.Enum):
    BISECTION = "bisection"
    SUBGRADIENT = "subgradient"


@dataclass(frozen=True)
class PowerModel:
    eta: float = 1.0
    P_c: float = 0.0
    P_RF: float = 1.0
    P_T: float = 1000.0
    N_0: float = 1.0

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise InvariantError(f"eta must lie in (0, 1], got {self.eta!r}")
        if not self.P_T > 0:
            raise InvariantError(f"P_T must be > 0, got {self.P_T!r}")
        if not self.N_0 > 0:
            raise InvariantError(f"N_0 must be > 0, got {self.N_0!r}")
        for name in ("eta", "P_c", "P_RF", "P_T", "N_0"):
            if not math.isfinite(getattr(self, name)):
                raise InvariantError(f"{name} must be finite")


def _counts(values, name):
    arr = np.atleast_1d(np.asarray(values))
    if arr.size and (np.any(arr < 0) or np.any(arr != np.round(arr))):
        raise InvariantError(f"{name} must hold nonnegative integers, got {arr.tolist()}")
    return arr.astype(int)


@dataclass(frozen=True)
class AntennaBudget:
    N_bs_a: int
    N_bs_rf: int
    N_k_b_a: np.ndarray
    N_k_c_ue: np.ndarray
    N_k_c_rf: np.ndarray = None

    def __post_init__(self):
        for name in ("N_bs_a", "N_bs_rf"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise InvariantError(f"{name} must be a nonnegative integer, got {value!r}")
        object.__setattr__(self, "N_k_b_a", _counts(self.N_k_b_a, "N_k_b_a"))
        object.__setattr__(self, "N_k_c_ue", _counts(self.N_k_c_ue, "N_k_c_ue"))
        # one RF chain per selected antenna unless stated otherwise
        rf = self.N_k_b_a if self.N_k_c_rf is None else self.N_k_c_rf
        object.__setattr__(self, "N_k_c_rf", _counts(rf, "N_k_c_rf"))

    @classmethod
    def single_antenna(cls, K, N_bs_a=None, N_bs_rf=None):
        """One antenna and one RF chain per UE; BS sized to exactly fit K UEs."""
        return cls(N_bs_a=K if N_bs_a is None else N_bs_a,
                   N_bs_rf=K if N_bs_rf is None else N_bs_rf,
                   N_k_b_a=np.ones(K, int), N_k_c_ue=np.ones(K, int))


@dataclass(frozen=True)
class ConstraintReport:
    C1: bool
    C2: bool
    C3: bool
    C4: bool

    @property
    def feasible(self):
        return self.C1 and self.C2 and self.C3 and self.C4

    def violated(self):
        return [name for name in ("C1", "C2", "C3", "C4") if not getattr(self, name)]


@dataclass
class EeSolution:
    P_star: float
    S_star: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)  # (S_n, F(S_n), P_n)
    residual: float = float("nan")


def _loglog(K):
    if K < 3:
        raise DomainError(f"rate proxy needs K >= 3 so that log2(log2 K) > 0, got K={K}")
    return math.log2(math.log2(K))


def min_power(power, K):
    """Lower end of the rate-proxy domain, nudged inside it."""
    return (1.0 + DOMAIN_MARGIN) * power.N_0 / _loglog(K)


def max_power(power, K):
    """Largest homogeneous per-UE power allowed by the total budget."""
    return power.eta * (power.P_T / K - power.P_c - power.P_RF)


def rate_model(P, power, K):
    arg = P / power.N_0 * _loglog(K)
    if not arg > 0:
        raise DomainError(f"rate proxy needs P > 0 with a positive log argument, got P={P!r}")
    return math.log2(arg)


def ee_objective(P, power, K):
    denom = P + power.P_RF
    if not denom > 0:
        raise DomainError(f"total power P + P_RF must be > 0, got {denom!r}")
    return rate_model(P, power, K) / denom


def dinkelbach_value(S, P, power, K):
    """rate(P) - S (P + P_RF); its maximum over P is zero exactly at the optimal ratio."""
    return rate_model(P, power, K) - S * (P + power.P_RF)


def ee_gradient(P, power, K, form=GradientForm.CORRECTED):
    """d/dP of the EE objective.

    The paper-literal form omits the (P + P_RF) factor on the first quotient
    term; it is kept only to quantify that discrepancy.
    """
    r = rate_model(P, power, K)
    D = P + power.P_RF
    if GradientForm(form) is GradientForm.CORRECTED:
        return (D / (P * LN2) - r) / D**2
    return (1.0 / (P * LN2) - r) / D**2


def ee_second_derivative(P, power, K, form=GradientForm.CORRECTED):
    r = rate_model(P, power, K)
    D = P + power.P_RF
    if GradientForm(form) is GradientForm.CORRECTED:
        r1 = 1.0 / (P * LN2)
        r2 = -1.0 / (P * P * LN2)
        return r2 / D - 2.0 * r1 / D**2 + 2.0 * r / D**3
    L = _loglog(K)
    first = (-LN2 / (P * LN2) ** 2 - 1.0 / (P * L * LN2)) / D**2
    return first - 2.0 * (1.0 / (P * LN2) - r) / D**3


def check_constraints(P, power, budget, K):
    """One flag per constraint for homogeneous per-UE power ``P``."""
    c1 = K * (P / power.eta + power.P_c + power.P_RF) <= power.P_T
    c2 = int(budget.N_k_b_a.sum()) <= budget.N_bs_a
    rf_total = int(budget.N_k_c_rf.sum())
    ue_need = int(budget.N_k_c_ue.max()) if budget.N_k_c_ue.size else 0
    c3 = ue_need <= rf_total <= budget.N_bs_rf
    c4 = P >= 0 and power.P_c >= 0 and power.P_RF >= 0
    return ConstraintReport(C1=bool(c1), C2=bool(c2), C3=bool(c3), C4=bool(c4))


def feasible_interval(power, budget, K):
    """[P_lo, P_hi] of powers satisfying C1-C4 inside the rate-proxy domain.

    Raises InfeasibleError naming the first constraint that empties the set.
    """
    report = check_constraints(min_power(power, K), power, budget, K)
    for name in ("C4", "C2", "C3"):
        if not getattr(report, name):
            raise InfeasibleError(name, _explain(name, power, budget, K))
    lo, hi = min_power(power, K), max_power(power, K)
    if hi < lo:
        raise InfeasibleError(
            "C1", f"budget P_T={power.P_T!r} allows P <= {hi!r}, below the rate-domain minimum {lo!r}")
    return lo, hi


def _explain(name, power, budget, K):
    if name == "C2":
        return f"antennas demanded {int(budget.N_k_b_a.sum())} > available N_bs_a={budget.N_bs_a}"
    if name == "C3":
        return (f"need max(N_k_c_ue)={int(budget.N_k_c_ue.max())} <= sum(N_k_c_rf)="
                f"{int(budget.N_k_c_rf.sum())} <= N_bs_rf={budget.N_bs_rf}")
    return f"negative power in P_c={power.P_c!r}, P_RF={power.P_RF!r}"


def _inner_bisection(S, lo, hi, tol):
    # derivative of the subproblem: 1/(P ln2) - S, decreasing in P
    def slope(P):
        return 1.0 / (P * LN2) - S

    if slope(hi) >= 0:
        return hi
    if slope(lo) <= 0:
        return lo
    a, b = lo, hi
    while b - a > tol * max(1.0, a):
        mid = 0.5 * (a + b)
        if slope(mid) > 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _inner_subgradient(S, lo, hi, tol, start, max_steps=200_000):
    # projected ascent with diminishing steps step0/n
    P = min(max(start, lo), hi)
    step0 = max(hi - lo, 1.0) if math.isfinite(hi) else max(P, 1.0)
    step0 = min(step0, 10.0 * max(P, 1.0))
    for n in range(1, max_steps + 1):
        g = 1.0 / (P * LN2) - S
        new = min(max(P + step0 / n * g * P, lo), hi)
        if abs(new - P) <= tol * max(1.0, P):
            return new
        P = new
    return P


def maximize_ee(power, budget, K, tol=1e-8, max_iter=50, inner_tol=1e-10,
                inner=InnerSolver.BISECTION):
    """Dinkelbach iteration for max_P rate(P) / (P + P_RF) over the feasible interval.

    Starts from S_0 = 0. Each step solves the concave subproblem at S_n, takes
    its maximizer P_n and sets S_{n+1} = rate(P_n) / (P_n + P_RF). Stops once
    the subproblem optimum F(S_n) is within ``tol`` of zero.
    """
    inner = InnerSolver(inner)
    lo, hi = feasible_interval(power, budget, K)
    S = 0.0
    P = hi
    trace = []
    for it in range(1, max_iter + 1):
        if inner is InnerSolver.BISECTION:
            P = _inner_bisection(S, lo, hi, inner_tol)
        else:
            P = _inner_subgradient(S, lo, hi, inner_tol, start=P)
        F = dinkelbach_value(S, P, power, K)
        trace.append((S, F, P))
        if abs(F) <= tol:
            S_star = ee_objective(P, power, K)
            P_check = _inner_bisection(S_star, lo, hi, inner_tol)
            return EeSolution(P_star=P, S_star=S_star, iterations=it, converged=True, trace=trace,
                              residual=dinkelbach_value(S_star, P_check, power, K))
        S = ee_objective(P, power, K)
    raise NonConvergenceError(
        f"Dinkelbach did not reach |F| <= {tol:g} in {max_iter} iterations",
        trace=trace, diagnostics={"last_S": S, "last_P": P})
