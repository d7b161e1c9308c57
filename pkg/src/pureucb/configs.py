"""Problem configurations built from mean-shifting models.

All constructors place the unique best arm at index 0 and derive the
inferior means by translating base distributions downward:

  slippage (sc):       every inferior mean sits exactly gamma below the best;
  monotone means (mm): inferior mean i sits gamma + lambda*((i+1)/k)^beta below;
  mixed:               like sc/mm but alternating two centered base families;
  noniz:               gamma = 0 with polynomially shrinking gaps
                       lambda*((i+1)/k)^beta and Pareto tails tuned to a
                       target moment order.

(The exponent uses the 1-based arm number, matching 0-based storage.)
"""

import math
import warnings
from dataclasses import dataclass

from .distributions import DistributionSpec
from .errors import DegenerateConfig, MeanMismatch, NonUniqueBest
from ._rng import hash64


@dataclass(frozen=True)
class ProblemConfig:
    """k arms with their marginal laws; best arm at index 0."""

    k: int
    arms: tuple
    means: tuple
    best_arm: int
    gap_params: dict
    kind: str = "custom"

    def __post_init__(self):
        if self.k < 2 or len(self.arms) != self.k:
            raise ValueError("need k >= 2 arms")
        best = max(range(self.k), key=lambda i: (self.means[i], -i))
        if sum(1 for m in self.means if m == self.means[best]) != 1:
            raise NonUniqueBest("means tie at the maximum")
        if best != self.best_arm:
            raise ValueError("best_arm inconsistent with means")

    @property
    def gamma(self):
        return self.gap_params.get("gamma", 0.0)

    def digest(self) -> int:
        return hash64(self.kind, self.k,
                      tuple(sorted(self.gap_params.items())),
                      tuple((a.family, tuple(sorted(a.params.items())), a.shift)
                            for a in self.arms))


def from_arms(arms, gap_params=None, kind="custom") -> ProblemConfig:
    arms = tuple(arms)
    means = tuple(a.mean() for a in arms)
    return ProblemConfig(
        k=len(arms), arms=arms, means=means, best_arm=0,
        gap_params=dict(gap_params or {}), kind=kind,
    )


def make_shifted(k: int, base: DistributionSpec, gamma: float,
                 lam: float = 0.0, beta: float = 0.0) -> ProblemConfig:
    """Mean-shifting configuration: arm 0 is the base, arm i >= 1 is the
    base shifted by -(gamma + lam*((i+1)/k)^beta).

    gamma > 0 with lam = 0 is the slippage configuration; lam > 0 with
    beta > 0 is the monotone-means configuration.  beta = 0 with lam > 0
    collapses to slippage with gap gamma + lam and is reclassified as such.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if gamma < 0 or lam < 0 or beta < 0:
        raise ValueError("gamma, lambda, beta must be >= 0")
    if gamma + lam == 0:
        raise DegenerateConfig("gamma = lambda = 0 leaves no unique best arm")
    if beta == 0.0 and lam > 0.0:
        gamma, lam = gamma + lam, 0.0
    kind = "sc" if lam == 0.0 else "mm"
    arms = [base]
    for i in range(1, k):
        delta = gamma + lam * ((i + 1) / k) ** beta
        arms.append(base.shifted(-delta))
    return from_arms(arms, {"gamma": gamma, "lambda": lam, "beta": beta}, kind)


def make_mixed(k: int, odd: DistributionSpec, even: DistributionSpec,
               gamma: float, lam: float = 0.0, beta: float = 0.0) -> ProblemConfig:
    """Two-family mean-shifting configuration (odd/even arm numbers).

    Both bases are centered to mean zero via their closed forms before
    shifting; without centering, the raw family means (e.g. a one-sided
    base against a symmetric one) would scramble the intended ordering.
    Arm numbers are 1-based in the parity rule: arm 0 ("alternative 1")
    and all other odd-numbered alternatives draw from the odd base.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if gamma < 0 or lam < 0 or beta < 0:
        raise ValueError("gamma, lambda, beta must be >= 0")
    if gamma + lam == 0:
        raise DegenerateConfig("gamma = lambda = 0 leaves no unique best arm")
    if beta == 0.0 and lam > 0.0:
        gamma, lam = gamma + lam, 0.0
    odd_c = odd.shifted(-odd.mean())
    even_c = even.shifted(-even.mean())
    if abs(odd_c.mean() - even_c.mean()) > 1e-9:
        raise MeanMismatch("centered base means disagree beyond 1e-9")
    arms = [odd_c]
    for i in range(1, k):
        number = i + 1
        base = odd_c if number % 2 == 1 else even_c
        delta = gamma + lam * (number / k) ** beta
        arms.append(base.shifted(-delta))
    return from_arms(
        arms, {"gamma": gamma, "lambda": lam, "beta": beta}, "mixed"
    )


def pareto_scale_for_unit_variance(shape: float) -> float:
    """Scale making a Pareto(shape, scale) have variance exactly one."""
    if shape <= 2:
        raise ValueError("unit variance needs shape > 2")
    return math.sqrt((shape - 1.0) ** 2 * (shape - 2.0) / shape)


def make_noniz(k: int, q: float, eps: float, beta: float, lam: float,
               mu1: float = 0.0) -> ProblemConfig:
    """Non-indifference-zone configuration with polynomially shrinking gaps.

    Pareto arms with shape q + eps and unit-variance scale, centered so
    arm 0 has mean mu1 and arm i >= 1 has mean mu1 - lam*((i+1)/k)^beta.
    Warns when beta is at or beyond min{(q-3)/q, 1/2}, the admissible
    shrinkage range for sample optimality.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if q <= 3:
        raise ValueError("q must exceed 3")
    if lam <= 0 or beta <= 0:
        raise ValueError("lambda and beta must be positive")
    limit = min((q - 3.0) / q, 0.5)
    if beta >= limit:
        warnings.warn(
            f"beta={beta} at or beyond the admissible bound {limit:.4g}",
            stacklevel=2,
        )
    shape = q + eps
    scale = pareto_scale_for_unit_variance(shape)
    base = DistributionSpec.pareto(shape, scale)
    center = -base.mean()
    arms = [base.shifted(center + mu1)]
    for i in range(1, k):
        delta = lam * ((i + 1) / k) ** beta
        arms.append(base.shifted(center + mu1 - delta))
    return from_arms(
        arms,
        {"gamma": 0.0, "lambda": lam, "beta": beta, "q": q, "eps": eps, "mu1": mu1},
        "noniz",
    )


def table1_presets() -> dict:
    """The five reference base distributions used across the experiments.

    Three location-scale bases (used for both slippage and monotone-means
    configurations) and the two mixed-configuration bases; all have
    variance approximately one.
    """
    return {
        "SC-Lognormal base": DistributionSpec.lognormal(-2.0, 1.45),
        "SC-Student's t base": DistributionSpec.student_t(3.0, 0.6),
        "SC-Pareto base": DistributionSpec.pareto(3.0, 1.2),
        "mixed Student's t": DistributionSpec.student_t(4.0, 0.7),
        "mixed Pareto": DistributionSpec.pareto(4.0, 2.1),
    }
