"""Fixed-budget sequential sampling engine.

Runs one budgeted pass of either a decoupled index algorithm (sample mean
plus a bonus that depends only on the arm's own count) or UCB1 (whose
bonus couples all arms through the global count).  Every arm is primed
with exactly one observation in index order; afterwards each round samples
the arm with the highest current index value, ties broken toward the
lowest arm index.  The final pick follows the selection standard, by
default the largest sample count.

Arms are 0-indexed throughout; round numbers are 1-based observation
counts, so rounds 1..k are the initialization pass.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _backend
from .bonus import BonusSpec, pack
from .configs import ProblemConfig
from .distributions import encode
from .errors import BudgetTooSmall, NonUniqueBest, TraceTooLarge

# Full-trace memory guard; streaming traces to disk is not implemented.
MAX_TRACE_BUDGET = 10 ** 7


class SelectionStandard(str, Enum):
    """Rule applied to the final state to pick the winner."""

    MAX_COUNT = "max_count"
    MAX_MEAN = "max_mean"
    MAX_UCB = "max_ucb"


@dataclass(frozen=True)
class Decoupled:
    """Meta algorithm: index = sample mean + bonus(own count)."""

    bonus: BonusSpec

    def label(self) -> str:
        return self.bonus.label()


@dataclass(frozen=True)
class UCB1:
    """Classic index with the global-count bonus sqrt(2 log n / n_i).

    `naive` forces the full-scan argmax; the default uses the count-bucket
    structure in the compiled backend.  Both select identical arms.
    """

    naive: bool = False

    def label(self) -> str:
        return "ucb1"


@dataclass(frozen=True)
class TraceRecord:
    round: int
    arm: int
    new_count: int
    observation: float
    new_ucb: float


class Trace:
    """Column-stored per-round log, viewable as a sequence of TraceRecords.

    Covers the post-initialization rounds k+1 .. B; the initialization
    pass lives in RunResult.init_observations / init_ucbs.
    """

    def __init__(self, k, arms, new_counts, observations, new_ucbs):
        self.k = int(k)
        self.arms = np.asarray(arms, dtype=np.int64)
        self.new_counts = np.asarray(new_counts, dtype=np.int64)
        self.observations = np.asarray(observations, dtype=np.float64)
        self.new_ucbs = np.asarray(new_ucbs, dtype=np.float64)

    def __len__(self):
        return len(self.arms)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return TraceRecord(
            round=self.k + 1 + int(i if i >= 0 else len(self) + i),
            arm=int(self.arms[i]),
            new_count=int(self.new_counts[i]),
            observation=float(self.observations[i]),
            new_ucb=float(self.new_ucbs[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        return (
            isinstance(other, Trace)
            and self.k == other.k
            and np.array_equal(self.arms, other.arms)
            and np.array_equal(self.new_counts, other.new_counts)
            and np.array_equal(self.observations, other.observations)
            and np.array_equal(self.new_ucbs, other.new_ucbs)
        )


@dataclass(frozen=True)
class RunResult:
    """Outcome of one engine run (immutable once constructed)."""

    selected_arm: int
    is_correct: bool
    final_counts: np.ndarray
    budget_used: int
    trace: Optional[Trace] = None
    final_means: Optional[np.ndarray] = field(default=None, repr=False)
    final_ucbs: Optional[np.ndarray] = field(default=None, repr=False)
    init_observations: Optional[np.ndarray] = field(default=None, repr=False)
    init_ucbs: Optional[np.ndarray] = field(default=None, repr=False)
    algorithm_kind: str = "decoupled"
    seed: int = 0

    def __eq__(self, other):
        if not isinstance(other, RunResult):
            return NotImplemented
        def arr_eq(a, b):
            if a is None or b is None:
                return (a is None) == (b is None)
            return np.array_equal(a, b)
        return (
            self.selected_arm == other.selected_arm
            and self.is_correct == other.is_correct
            and self.budget_used == other.budget_used
            and self.algorithm_kind == other.algorithm_kind
            and self.seed == other.seed
            and np.array_equal(self.final_counts, other.final_counts)
            and arr_eq(self.final_means, other.final_means)
            and arr_eq(self.final_ucbs, other.final_ucbs)
            and arr_eq(self.init_observations, other.init_observations)
            and arr_eq(self.init_ucbs, other.init_ucbs)
            and (self.trace == other.trace)
        )

    def to_json_dict(self) -> dict:
        return {
            "selected_arm": int(self.selected_arm),
            "is_correct": bool(self.is_correct),
            "budget_used": int(self.budget_used),
            "final_counts": [int(c) for c in self.final_counts],
        }


def argmax_ucb(values) -> int:
    """Index of the maximal value; ties go to the lowest index."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty value array")
    return int(np.argmax(values))


def select(standard: SelectionStandard, counts, means, ucbs) -> int:
    if standard == SelectionStandard.MAX_COUNT:
        return argmax_ucb(counts)
    if standard == SelectionStandard.MAX_MEAN:
        return argmax_ucb(means)
    return argmax_ucb(ucbs)


def resolve_bonus(algorithm: Decoupled, budget: int, k: int) -> BonusSpec:
    """Bind run-start parameters (the truncated bonus's c = B/k)."""
    spec = algorithm.bonus
    if spec.variant == "moss" and spec.unbound:
        return BonusSpec.moss(budget / k)
    return spec


def _encode_config(config: ProblemConfig):
    k = config.k
    fams = np.zeros(k, dtype=np.int32)
    p0s = np.zeros(k)
    p1s = np.zeros(k)
    shifts = np.zeros(k)
    ms = np.zeros(k, dtype=np.int32)
    for i, spec in enumerate(config.arms):
        fams[i], p0s[i], p1s[i], shifts[i], ms[i] = encode(spec)
    return fams, p0s, p1s, shifts, ms


def run(config: ProblemConfig, algorithm, budget: int,
        standard: SelectionStandard = SelectionStandard.MAX_COUNT,
        seed: int = 0, capture_trace: bool = False) -> RunResult:
    """Execute one run and apply the selection standard.

    Deterministic: identical (config, algorithm, budget, standard, seed)
    yield bit-identical results, on either backend.
    """
    k = config.k
    if budget < k:
        raise BudgetTooSmall(f"budget {budget} < number of arms {k}")
    best = argmax_ucb(config.means)
    if sum(1 for m in config.means if m == config.means[best]) != 1:
        raise NonUniqueBest("configuration means tie at the maximum")
    if capture_trace and budget > MAX_TRACE_BUDGET:
        raise TraceTooLarge(
            f"full trace refused for budget {budget} > {MAX_TRACE_BUDGET}"
        )

    fams, p0s, p1s, shifts, ms = _encode_config(config)
    if isinstance(algorithm, Decoupled):
        code, params = pack(resolve_bonus(algorithm, budget, k))
        raw = _backend.impl.run_decoupled(
            fams, p0s, p1s, shifts, ms, code, np.array(params),
            budget, seed & ((1 << 64) - 1), capture_trace,
        )
    elif isinstance(algorithm, UCB1):
        raw = _backend.impl.run_ucb1(
            fams, p0s, p1s, shifts, ms,
            budget, seed & ((1 << 64) - 1), capture_trace, algorithm.naive,
        )
    else:
        raise TypeError(f"unknown algorithm {algorithm!r}")

    counts, means, ucbs = raw["counts"], raw["means"], raw["ucbs"]
    winner = select(standard, counts, means, ucbs)
    trace = None
    if capture_trace:
        tr_arm, tr_cnt, tr_obs, tr_ucb = raw["trace"]
        trace = Trace(k, tr_arm, tr_cnt, tr_obs, tr_ucb)
    counts.setflags(write=False)
    return RunResult(
        selected_arm=winner,
        is_correct=(winner == config.best_arm),
        final_counts=counts,
        budget_used=int(counts.sum()),
        trace=trace,
        final_means=means,
        final_ucbs=ucbs,
        init_observations=raw["init_obs"] if capture_trace else None,
        init_ucbs=raw["init_ucb"] if capture_trace else None,
        algorithm_kind="decoupled" if isinstance(algorithm, Decoupled) else "ucb1",
        seed=seed,
    )


def trace_rows(run_result: RunResult):
    """All rounds 1..B as (round, arm, new_count, observation, new_ucb).

    Rounds 1..k replay the initialization pass from the captured init
    arrays; the remaining rounds come from the trace records.
    """
    if run_result.trace is None:
        return
    k = run_result.trace.k
    for i in range(k):
        yield (i + 1, i, 1,
               float(run_result.init_observations[i]),
               float(run_result.init_ucbs[i]))
    for rec in run_result.trace:
        yield (rec.round, rec.arm, rec.new_count, rec.observation, rec.new_ucb)
