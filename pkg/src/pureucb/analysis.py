"""Closed-form bound evaluators and boundary-crossing oracles.

Everything the theory side of the toolkit computes lives here:

* replay oracles (`crossing_time`, `u1_star`) that walk the exact sample
  paths the engine saw, via the shared counter streams;
* the sample-mean tail bound of Nagaev type with its explicit constants,
  and the derived mean/variance bounds for constrained crossing times;
* the expected-crossing-time bound under a location-scale structure and
  the budget-constant solver `solve_gamma0` built on it;
* the non-IZ budget formulas and the closed-form threshold for the
  heavy-tail confidence-sequence bonus;
* exact no-crossing probability / expected crossing time series for a
  constant boundary, given the sample-mean tail function;
* a Monte Carlo estimator of the two-factor probability-of-correct-
  selection lower bound.

Evaluators switch to log space where exponents would overflow doubles.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _backend
from .bonus import BonusSpec, heavy_cs_nf, n_f, nagaev_a1_a2, pack
from .configs import ProblemConfig
from .distributions import DistributionSpec, encode
from .errors import BetaTooLarge, GammaOutOfRange, Infeasible, QTooSmall
from ._rng import hash64

_LOG_DBL_MAX = 709.0


# ---------------------------------------------------------------------------
# replay oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossingTime:
    """First index at which an arm's UCB path dips below a boundary.

    `value` is None when no crossing occurred up to the horizon
    (censored); the bound checks treat censoring conservatively.
    """

    value: Optional[int]
    boundary: float
    arm: int
    horizon: int

    @property
    def censored(self) -> bool:
        return self.value is None


def crossing_time(seed: int, arm: int, dist: DistributionSpec, bonus: BonusSpec,
                  boundary: float, start_n: int = 1, horizon: int = 10 ** 6) -> CrossingTime:
    """First n in [start_n, horizon] with sample mean + f(n) < boundary.

    Replays the same deterministic stream the engine would consume for
    (seed, arm), so trace-level assertions are exact, not statistical.
    """
    if horizon < start_n or start_n < 1:
        raise ValueError("need horizon >= start_n >= 1")
    fam, p0, p1, shift, m = encode(dist)
    code, params = pack(bonus)
    hit = _backend.impl.crossing_time(
        fam, p0, p1, shift, m, code, np.array(params),
        seed & ((1 << 64) - 1), arm, boundary, start_n, horizon,
    )
    return CrossingTime(int(hit) if hit else None, boundary, arm, horizon)


def u1_star(seed: int, dist: DistributionSpec, bonus: BonusSpec,
            horizon: int = 10 ** 6, arm: int = 0) -> float:
    """Minimum of the UCB value process over n in [1, horizon].

    A finite-horizon upper bound for the true infinite-horizon infimum;
    non-increasing in the horizon.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    fam, p0, p1, shift, m = encode(dist)
    code, params = pack(bonus)
    return float(_backend.impl.ucb_min(
        fam, p0, p1, shift, m, code, np.array(params),
        seed & ((1 << 64) - 1), arm, horizon,
    ))


def ucb_stays_above(seed: int, dist: DistributionSpec, bonus: BonusSpec,
                    boundary: float, horizon: int, arm: int = 0) -> bool:
    """Whether the UCB path stays at or above `boundary` up to the horizon."""
    fam, p0, p1, shift, m = encode(dist)
    code, params = pack(bonus)
    return bool(_backend.impl.ucb_stays_above(
        fam, p0, p1, shift, m, code, np.array(params),
        seed & ((1 << 64) - 1), arm, boundary, horizon,
    ))


# ---------------------------------------------------------------------------
# closed-form constants and bounds
# ---------------------------------------------------------------------------

def best_arm_confidence_floor(sigma1: float, gamma0: float) -> float:
    """Distribution-free floor on the chance the best arm's UCB process
    never drops more than gamma0 below its mean: exp(-pi^2 sigma1^2 /
    (6 gamma0^2)).  Lives in (0, 1]."""
    if sigma1 <= 0 or gamma0 <= 0:
        raise ValueError("sigma1 and gamma0 must be positive")
    return math.exp(-(math.pi ** 2) * sigma1 * sigma1 / (6.0 * gamma0 * gamma0))


def tail_bound_constants(q: float, M: float) -> dict:
    """The five constants of the polynomial/exponential tail machinery.

    a1, a2 drive the sample-mean tail bound; c1-c3 the crossing-time
    mean/variance bounds.  c3 needs q > 3 (its defining series diverges
    at q = 3), and this evaluator returns the full set or raises.
    """
    if q <= 3:
        raise QTooSmall(f"constants need q > 3, got {q}")
    a1, a2 = nagaev_a1_a2(q, M)
    return {
        "a1": a1,
        "a2": a2,
        "c1": a1 * (q - 1.0) / (q - 2.0),
        "c2": a2,
        "c3": 2.0 * a1 * (q - 2.0) / (q - 3.0),
    }


def nagaev_bound(q: float, M: float, n: int, x: float) -> float:
    """Upper bound on P(sample mean of n draws exceeds its mean by x).

    a1 * n^(1-q) * x^(-q) + exp(-a2 n x^2), clamped at 1 (it is a
    probability bound; x = 0 yields a value >= 1 by construction).
    """
    if n < 1 or x < 0:
        raise ValueError("need n >= 1 and x >= 0")
    a1, a2 = nagaev_a1_a2(q, M)
    if x == 0.0:
        return 1.0
    val = a1 * n ** (1.0 - q) * x ** -q + math.exp(-a2 * n * x * x)
    return min(1.0, val)


def crossing_moment_bounds(q: float, M: float, b: float, n0: int) -> dict:
    """Mean and variance bounds for the crossing time of a fixed level b,
    constrained to start at index n0, under a q-th moment budget M."""
    if b <= 0 or n0 < 1:
        raise ValueError("need b > 0 and n0 >= 1")
    cons = tail_bound_constants(q, M)
    c1, c2, c3 = cons["c1"], cons["c2"], cons["c3"]
    cb2 = c2 * b * b
    denom = -math.expm1(-cb2)  # 1 - exp(-c2 b^2), accurately for small cb2
    mean = c1 * b ** -q * n0 ** (2.0 - q) + math.exp(-n0 * cb2) / denom + n0
    var = c3 * b ** -q * n0 ** (3.0 - q) + 2.0 * n0 * math.exp(-n0 * cb2) / (denom * denom)
    return {"C": mean, "D": var}


def location_scale_crossing_bound(gap: float, sigma_lo: float, sigma_hi: float,
                                  bonus: BonusSpec) -> float:
    """Expected-crossing-time bound under a location-scale structure.

    N * exp(2 sigma_hi^2 pi^2 / (3 gap^2 N)) with N the bonus threshold
    at level gap*sigma_lo/(2*sigma_hi).  Returns inf when the exponent
    overflows doubles (tiny gaps).
    """
    if gap <= 0:
        return math.inf
    if not (0 < sigma_lo <= sigma_hi):
        raise ValueError("need 0 < sigma_lo <= sigma_hi")
    nthr = n_f(bonus, gap * sigma_lo / (2.0 * sigma_hi))
    log_val = math.log(nthr) + 2.0 * sigma_hi ** 2 * math.pi ** 2 / (3.0 * gap * gap * nthr)
    if log_val > _LOG_DBL_MAX:
        return math.inf
    return nthr * math.exp(2.0 * sigma_hi ** 2 * math.pi ** 2 / (3.0 * gap * gap * nthr))


def solve_gamma0(c: float, gamma: float, sigma_lo: float, sigma_hi: float,
                 bonus: BonusSpec, regime: str = "location_scale",
                 q: float = None, M: float = None, tol: float = 1e-6) -> float:
    """Largest gamma0 in (0, gamma) whose budget inequality still holds.

    The per-arm crossing bound is non-increasing in the residual gap
    gamma - gamma0, so the feasible set is an interval and bisection to
    absolute tolerance `tol` finds its supremum.  Raises Infeasible when
    even gamma0 -> 0 violates 2 * bound <= c.
    """
    if gamma <= 0 or c <= 0:
        raise ValueError("need gamma > 0 and c > 0")

    if regime == "location_scale":
        def bound(gap):
            return location_scale_crossing_bound(gap, sigma_lo, sigma_hi, bonus)
    elif regime == "moment":
        if q is None or M is None:
            raise ValueError("moment regime needs q and M")

        def bound(gap):
            if gap <= 0:
                return math.inf
            b = gap / 2.0
            return crossing_moment_bounds(q, M, b, n_f(bonus, b))["C"]
    else:
        raise ValueError(f"unknown regime {regime!r}")

    if 2.0 * bound(gamma) > c:
        raise Infeasible(
            f"even gamma0 -> 0 violates the budget inequality (need c > {2.0 * bound(gamma):.6g})"
        )
    lo, hi = 0.0, gamma
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 2.0 * bound(gamma - mid) <= c:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# non-IZ budget formulas
# ---------------------------------------------------------------------------

def noniz_budget_general(q: float, beta: float, alpha: float, M: float,
                         q_prime: float = 2.0) -> float:
    """Per-arm budget multiplier with explicit constants for the
    confidence-sequence bonus under polynomially shrinking gaps:
    d0 + d1/(1 - beta*q/(q-1-q')) + d2/(1-2 beta) + d3*beta/(1-2 beta)^2."""
    if not (1 < q_prime < q - 1):
        raise ValueError("q_prime must lie in (1, q-1)")
    limit = min((q - 1.0 - q_prime) / q, 0.5)
    if beta >= limit:
        raise BetaTooLarge(f"beta={beta} at or beyond the pole {limit:.6g}")
    a1, a2 = nagaev_a1_a2(q, M)
    from .bonus import zeta

    z1 = zeta(q_prime + 1.0)
    c1 = (2.0 * a1 * z1 / alpha) ** (1.0 / (q - 1.0 - q_prime))
    c2 = 2.0 * (math.log(2.0 * z1) + math.log(1.0 / alpha)) / a2
    c3 = 2.0 * (q_prime + 1.0) / a2
    d0 = 2.0 * alpha
    d1 = c1 * 2.0 ** (q / (q - 1.0 - q_prime))
    d2 = 2.0 * alpha / a2 + 4.0 * c2 + 8.0 * c3 * math.log(4.0 * c3)
    d3 = 16.0 * c3
    return (d0
            + d1 / (1.0 - beta * q / (q - 1.0 - q_prime))
            + d2 / (1.0 - 2.0 * beta)
            + d3 * beta / (1.0 - 2.0 * beta) ** 2)


def noniz_budget_simplified(q: float, beta: float) -> float:
    """Per-arm budget multiplier used by the non-IZ experiments:
    10 * [1/(1 - beta*q/(q-3)) + 1/(1-2 beta) + beta/(1-2 beta)^2]."""
    if q <= 3:
        raise ValueError("q must exceed 3")
    limit = min((q - 3.0) / q, 0.5)
    if beta >= limit:
        raise BetaTooLarge(f"beta={beta} at or beyond the pole {limit:.6g}")
    return 10.0 * (1.0 / (1.0 - beta * q / (q - 3.0))
                   + 1.0 / (1.0 - 2.0 * beta)
                   + beta / (1.0 - 2.0 * beta) ** 2)


# ---------------------------------------------------------------------------
# exact crossing-time series (constant boundary)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossingSeries:
    """Truncated-series values for a constant-boundary crossing time.

    p_never = exp(-sum 1/n P(mean(n) < b)) and e_tau = exp(sum 1/n
    P(mean(n) >= b)); a series whose last decade still contributes more
    than 1e-9 relatively is flagged divergent (p_never then tends to 0,
    e_tau to infinity).
    """

    p_never: float
    e_tau: float
    p_never_status: str
    e_tau_status: str
    p_never_remainder: float
    e_tau_remainder: float


def crossing_time_series(tail: Callable[[int], float], terms: int = 10 ** 4) -> CrossingSeries:
    """Evaluate both series from the sample-mean tail n -> P(mean(n) >= b)."""
    if terms < 10:
        raise ValueError("need at least 10 terms")
    s_up = 0.0    # sum 1/n * P(mean >= b)
    s_dn = 0.0    # sum 1/n * P(mean < b)
    dec_up = 0.0
    dec_dn = 0.0
    decade_start = terms // 10
    for n in range(1, terms + 1):
        t = float(tail(n))
        up = t / n
        dn = (1.0 - t) / n
        s_up += up
        s_dn += dn
        if n > decade_start:
            dec_up += up
            dec_dn += dn
    up_ok = dec_up < 1e-9 * max(s_up, 1e-300)
    dn_ok = dec_dn < 1e-9 * max(s_dn, 1e-300)
    return CrossingSeries(
        p_never=math.exp(-s_dn) if dn_ok else 0.0,
        e_tau=math.exp(s_up) if up_ok and s_up < _LOG_DBL_MAX else math.inf,
        p_never_status="converged" if dn_ok else "divergent",
        e_tau_status="converged" if up_ok else "divergent",
        p_never_remainder=dec_dn,
        e_tau_remainder=dec_up,
    )


def gaussian_mean_tail(b: float, std: float = 1.0) -> Callable[[int], float]:
    """Tail function n -> P(mean of n standard-normal-scaled draws >= b)."""
    import scipy.special as _sp

    def tail(n: int) -> float:
        return float(_sp.ndtr(-b * math.sqrt(n) / std))

    return tail


# ---------------------------------------------------------------------------
# Monte Carlo lower bound on the probability of correct selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PCSLowerBound:
    estimate: float
    stderr: float
    factor_budget: float
    factor_budget_stderr: float
    factor_boundary: float
    factor_boundary_stderr: float
    censored_fraction: float
    reps: int
    horizon: int
    bias_note: str


def pcs_lower_bound_mc(config: ProblemConfig, bonus: BonusSpec, budget: int,
                       gamma0: float, horizon: int = 10 ** 6, reps: int = 1000,
                       seed: int = 0) -> PCSLowerBound:
    """Monte Carlo product bound: P(budget covers twice the summed
    crossing times against the constant boundary mu1 - gamma0) times
    P(the best arm's UCB process stays above that boundary).

    Crossing times not observed by the horizon count as exceeding the
    budget (conservative for a lower bound).  The boundary factor uses a
    finite horizon, which can only overestimate the infinite-horizon
    probability; the bias direction is recorded in the result.
    """
    gamma = config.gamma
    if not (0 < gamma0 < gamma):
        raise GammaOutOfRange(f"need 0 < gamma0 < {gamma}, got {gamma0}")
    mu1 = config.means[config.best_arm]
    boundary = mu1 - gamma0
    scan_horizon = min(horizon, budget)

    successes = 0
    censored = 0
    for r in range(reps):
        total = 0
        ok = True
        for i in range(config.k):
            if i == config.best_arm:
                continue
            ct = crossing_time(hash64(seed, "crossing", r, i), i, config.arms[i],
                               bonus, boundary, 1, scan_horizon)
            if ct.censored:
                censored += 1
                ok = False
                break
            total += ct.value
            if 2 * total > budget:
                ok = False
                break
        if ok and 2 * total <= budget:
            successes += 1
    f1 = successes / reps
    se1 = math.sqrt(max(f1 * (1.0 - f1), 0.0) / reps)

    above = 0
    best = config.arms[config.best_arm]
    for r in range(reps):
        if ucb_stays_above(hash64(seed, "boundary", r), best, bonus, boundary, horizon):
            above += 1
    f2 = above / reps
    se2 = math.sqrt(max(f2 * (1.0 - f2), 0.0) / reps)

    est = f1 * f2
    stderr = math.sqrt(f1 * f1 * se2 * se2 + f2 * f2 * se1 * se1)
    return PCSLowerBound(
        estimate=est, stderr=stderr,
        factor_budget=f1, factor_budget_stderr=se1,
        factor_boundary=f2, factor_boundary_stderr=se2,
        censored_fraction=censored / reps, reps=reps, horizon=horizon,
        bias_note=(
            "boundary factor uses a finite horizon and so overestimates the "
            "infinite-horizon stay-above probability; censored crossings are "
            "counted as budget failures (conservative)"
        ),
    )


# ---------------------------------------------------------------------------
# consolidated report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """Evaluated theoretical quantities for one parameter set."""

    gamma0: float
    confidence_floor: float
    tail_bound: float
    a1: float
    a2: float
    c1: Optional[float]
    c2: Optional[float]
    c3: Optional[float]
    crossing_mean_bound: Optional[float]
    crossing_var_bound: Optional[float]
    location_scale_bound: float
    n_f_used: int
    budget: float

    def to_json_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if v is None:
                continue
            out[k] = v if not isinstance(v, float) or math.isfinite(v) else "inf"
        return out


def bound_report(bonus: BonusSpec, gamma: float, c: float,
                 sigma_lo: float = 1.0, sigma_hi: float = 1.0,
                 sigma1: float = None, q: float = None, M: float = None,
                 regime: str = "location_scale", beta: float = None) -> BoundReport:
    """Solve for gamma0 under the requested regime and evaluate every
    bound at the solved point (level b = (gamma-gamma0)/2, threshold
    n_f(b)).  The budget field echoes c, or the simplified non-IZ
    multiplier when beta is given."""
    g0 = solve_gamma0(c, gamma, sigma_lo, sigma_hi, bonus, regime=regime, q=q, M=M)
    gap = gamma - g0
    sigma1 = sigma_hi if sigma1 is None else sigma1
    floor = best_arm_confidence_floor(sigma1, g0) if g0 > 0 else 0.0
    b = gap / 2.0
    nf = n_f(bonus, b)
    c1 = c2 = c3 = cm = cv = None
    a1 = a2 = float("nan")
    tb = float("nan")
    if q is not None and M is not None:
        a1, a2 = nagaev_a1_a2(q, M)
        tb = nagaev_bound(q, M, nf, b)
        if q > 3:
            cons = tail_bound_constants(q, M)
            c1, c2, c3 = cons["c1"], cons["c2"], cons["c3"]
            cmb = crossing_moment_bounds(q, M, b, nf)
            cm, cv = cmb["C"], cmb["D"]
    budget = noniz_budget_simplified(q, beta) if (beta is not None and q is not None) else c
    return BoundReport(
        gamma0=g0, confidence_floor=floor, tail_bound=tb,
        a1=a1, a2=a2, c1=c1, c2=c2, c3=c3,
        crossing_mean_bound=cm, crossing_var_bound=cv,
        location_scale_bound=location_scale_crossing_bound(gap, sigma_lo, sigma_hi, bonus),
        n_f_used=nf, budget=budget,
    )


# re-exported here because thresholds belong to the bound toolkit too
__all__ = [
    "BoundReport",
    "CrossingSeries",
    "CrossingTime",
    "PCSLowerBound",
    "best_arm_confidence_floor",
    "bound_report",
    "crossing_moment_bounds",
    "crossing_time",
    "crossing_time_series",
    "gaussian_mean_tail",
    "heavy_cs_nf",
    "location_scale_crossing_bound",
    "nagaev_bound",
    "noniz_budget_general",
    "noniz_budget_simplified",
    "pcs_lower_bound_mc",
    "solve_gamma0",
    "tail_bound_constants",
    "u1_star",
    "ucb_stays_above",
]
