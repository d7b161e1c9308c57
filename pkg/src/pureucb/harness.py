"""Replicated experiment harness.

Expands a plan over (configuration, algorithm, k) cells, runs independent
macro replications for each cell, and aggregates success counts into
probability-of-correct-selection estimates with Wilson intervals.  Each
replication's seed is a stable hash of (base seed, config digest,
algorithm digest, k, rep), so cells are independent of one another and
results are bit-identical across runs and across degrees of parallelism
(aggregation is integer accumulation keyed by replication index).

Also home to the trace-property verifier and allocation statistics.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import engine
from .analysis import crossing_time
from .bonus import BonusSpec
from .configs import ProblemConfig, make_mixed, make_noniz, make_shifted, table1_presets
from .distributions import DistributionSpec
from .engine import Decoupled, RunResult, SelectionStandard, UCB1
from .errors import CoupledAlgorithm, TraceMissing, ValidationError
from .analysis import noniz_budget_general, noniz_budget_simplified
from ._rng import hash64

_WILSON_Z = 1.959963984540054  # two-sided 95%
_REP_CHUNK = 32


def wilson_interval(successes: int, n: int, z: float = _WILSON_Z):
    """95% Wilson score interval; well behaved at 0 and n successes."""
    if n < 1 or not 0 <= successes <= n:
        raise ValueError("need 0 <= successes <= n, n >= 1")
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    # the score interval always contains p; guard the float rounding at 0/n
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


@dataclass(frozen=True)
class PCSEstimate:
    successes: int
    reps: int
    pcs: float
    ci_low: float
    ci_high: float

    @staticmethod
    def from_counts(successes: int, reps: int) -> "PCSEstimate":
        lo, hi = wilson_interval(successes, reps)
        return PCSEstimate(successes, reps, successes / reps, lo, hi)

    @property
    def stderr(self) -> float:
        return math.sqrt(max(self.pcs * (1.0 - self.pcs), 0.0) / self.reps)


# ---------------------------------------------------------------------------
# plan pieces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfigTemplate:
    """Config-generator parameters; a concrete config is built per k."""

    kind: str  # sc | mm | mixed | noniz
    params: tuple  # canonical ((key, value), ...) pairs
    label: str = ""

    @staticmethod
    def make(kind: str, label: str = "", **params) -> "ConfigTemplate":
        return ConfigTemplate(kind, tuple(sorted(params.items())), label or kind)

    def param_dict(self) -> dict:
        return dict(self.params)

    def build(self, k: int) -> ProblemConfig:
        p = self.param_dict()
        if self.kind == "sc":
            return make_shifted(k, DistributionSpec.from_json_dict(p["base"]),
                                p.get("gamma", 0.0), 0.0, 0.0)
        if self.kind == "mm":
            return make_shifted(k, DistributionSpec.from_json_dict(p["base"]),
                                p.get("gamma", 0.0), p.get("lambda", 0.0),
                                p.get("beta", 0.0))
        if self.kind == "mixed":
            return make_mixed(k, DistributionSpec.from_json_dict(p["odd"]),
                              DistributionSpec.from_json_dict(p["even"]),
                              p.get("gamma", 0.0), p.get("lambda", 0.0),
                              p.get("beta", 0.0))
        if self.kind == "noniz":
            return make_noniz(k, p["q"], p.get("epsilon", 0.1), p["beta"],
                              p.get("lambda", 0.25), p.get("mu1", 0.0))
        raise ValidationError(f"unknown config kind {self.kind!r}")

    def digest(self) -> int:
        return hash64("config", self.kind, self.params)


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm choice for a plan; bonuses may bind parameters per cell."""

    kind: str  # decoupled | ucb1
    bonus: Optional[BonusSpec] = None

    @staticmethod
    def ucb1() -> "AlgorithmSpec":
        return AlgorithmSpec("ucb1")

    @staticmethod
    def decoupled(bonus: BonusSpec) -> "AlgorithmSpec":
        return AlgorithmSpec("decoupled", bonus)

    def label(self) -> str:
        return "ucb1" if self.kind == "ucb1" else self.bonus.label()

    def materialize(self, template: ConfigTemplate):
        """Engine algorithm for a cell (binds UCBE+'s q from the config)."""
        if self.kind == "ucb1":
            return UCB1()
        b = self.bonus
        if b.variant == "ucbe_plus" and b.unbound:
            p = template.param_dict()
            if template.kind != "noniz" or "q" not in p:
                raise ValidationError(
                    "ucbe_plus without q only binds against a noniz config"
                )
            b = BonusSpec.ucbe_plus(p["q"])
        return Decoupled(b)


@dataclass(frozen=True)
class BudgetRule:
    """Per-k budget: fixed multiplier, explicit table, or non-IZ formula."""

    kind: str  # multiplier | explicit | noniz_simplified | noniz_general
    multiplier: float = 0.0
    explicit: tuple = ()
    alpha: float = 0.1
    M: float = 1.0
    q_prime: float = 2.0

    def resolve(self, template: ConfigTemplate, k: int) -> int:
        if self.kind == "multiplier":
            return int(math.ceil(self.multiplier * k))
        if self.kind == "explicit":
            table = dict(self.explicit)
            if k not in table:
                raise ValidationError(f"explicit budget table lacks k={k}")
            return int(table[k])
        p = template.param_dict()
        if template.kind != "noniz":
            raise ValidationError("formula budgets need a noniz config")
        if self.kind == "noniz_simplified":
            c = noniz_budget_simplified(p["q"], p["beta"])
        elif self.kind == "noniz_general":
            c = noniz_budget_general(p["q"], p["beta"], self.alpha, self.M, self.q_prime)
        else:
            raise ValidationError(f"unknown budget rule {self.kind!r}")
        return int(math.ceil(c * k))


@dataclass
class ExperimentPlan:
    configs: list
    algorithms: list
    k_values: list
    budget: BudgetRule
    reps: int = 500
    base_seed: int = 0
    selection_standard: SelectionStandard = SelectionStandard.MAX_COUNT
    capture: str = "none"  # none | allocation | full_trace

    def __post_init__(self):
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")
        if list(self.k_values) != sorted(self.k_values):
            raise ValidationError("k_values must be sorted ascending")
        if self.capture not in ("none", "allocation", "full_trace"):
            raise ValidationError(f"unknown capture mode {self.capture!r}")


def rep_seed(base_seed: int, template: ConfigTemplate, algo: AlgorithmSpec,
             k: int, rep: int) -> int:
    return hash64(base_seed, template.digest(), algo.label(), k, rep)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class CellResult:
    config_label: str
    algorithm_label: str
    standard: str
    k: int
    budget: int
    estimate: PCSEstimate
    counts: Optional[np.ndarray] = field(default=None, repr=False)  # reps x k
    traces: Optional[list] = field(default=None, repr=False)


RESULTS_HEADER = "config,algorithm,standard,k,B,reps,successes,pcs,ci_low,ci_high"


def _fmt(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class ResultsTable:
    cells: list
    errors: list

    def to_csv_text(self) -> str:
        lines = [RESULTS_HEADER]
        for c in self.cells:
            e = c.estimate
            lines.append(
                f"{c.config_label},{c.algorithm_label},{c.standard},{c.k},"
                f"{c.budget},{e.reps},{e.successes},{_fmt(e.pcs)},"
                f"{_fmt(e.ci_low)},{_fmt(e.ci_high)}"
            )
        return "\n".join(lines) + "\n"


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("PUREUCB_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def run_experiment(plan: ExperimentPlan, threads: Optional[int] = None) -> ResultsTable:
    """Execute every (config, algorithm, k) cell of the plan.

    Cell failures are recorded and do not abort other cells.  With the
    compiled backend the engine releases the GIL, so replication chunks
    run concurrently on a thread pool.
    """
    capture_counts = plan.capture in ("allocation", "full_trace")
    capture_trace = plan.capture == "full_trace"

    cells = []
    errors = []
    tasks = []  # (cell_idx, template, algo_spec, k, B, rep_lo, rep_hi)
    for template in plan.configs:
        for algo in plan.algorithms:
            for k in plan.k_values:
                try:
                    config = template.build(k)
                    budget = plan.budget.resolve(template, k)
                    algorithm = algo.materialize(template)
                except Exception as exc:  # record, keep going
                    errors.append((template.label, algo.label(), k, str(exc)))
                    continue
                idx = len(cells)
                cells.append({
                    "template": template, "algo": algo, "k": k, "B": budget,
                    "config": config, "algorithm": algorithm,
                    "success": np.zeros(plan.reps, dtype=np.int64),
                    "counts": np.zeros((plan.reps, k), dtype=np.int64)
                    if capture_counts else None,
                    "traces": [None] * plan.reps if capture_trace else None,
                })
                for lo in range(0, plan.reps, _REP_CHUNK):
                    tasks.append((idx, lo, min(lo + _REP_CHUNK, plan.reps)))

    def work(task):
        idx, lo, hi = task
        cell = cells[idx]
        for r in range(lo, hi):
            seed = rep_seed(plan.base_seed, cell["template"], cell["algo"],
                            cell["k"], r)
            res = engine.run(cell["config"], cell["algorithm"], cell["B"],
                             plan.selection_standard, seed, capture_trace)
            cell["success"][r] = 1 if res.is_correct else 0
            if cell["counts"] is not None:
                cell["counts"][r, :] = res.final_counts
            if cell["traces"] is not None:
                cell["traces"][r] = res

    n_threads = _thread_count(threads)
    if n_threads == 1:
        for t in tasks:
            work(t)
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(work, tasks))

    out = []
    for cell in cells:
        est = PCSEstimate.from_counts(int(cell["success"].sum()), plan.reps)
        out.append(CellResult(
            config_label=cell["template"].label,
            algorithm_label=cell["algo"].label(),
            standard=plan.selection_standard.value,
            k=cell["k"], budget=cell["B"], estimate=est,
            counts=cell["counts"], traces=cell["traces"],
        ))
    return ResultsTable(out, errors)


# ---------------------------------------------------------------------------
# allocation statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AllocationSummary:
    """Final-count statistics aggregated over replications."""

    k: int
    budget: int
    reps: int
    per_arm_mean: np.ndarray
    per_arm_median: np.ndarray
    per_arm_max: np.ndarray
    best_share: float
    hist_edges: np.ndarray   # power-of-two bin edges over inferior counts
    hist_counts: np.ndarray

    def hist_rows(self):
        for i in range(len(self.hist_counts)):
            yield int(self.hist_edges[i]), int(self.hist_edges[i + 1]), int(self.hist_counts[i])

    def to_json_dict(self) -> dict:
        return {
            "k": self.k, "budget": self.budget, "reps": self.reps,
            "best_share": self.best_share,
            "per_arm_mean": [float(x) for x in self.per_arm_mean],
            "per_arm_median": [float(x) for x in self.per_arm_median],
            "per_arm_max": [int(x) for x in self.per_arm_max],
            "hist": [list(r) for r in self.hist_rows()],
        }


def allocation_summary(counts: np.ndarray, budget: int, best_arm: int = 0) -> AllocationSummary:
    """Summarize a reps-by-k matrix of final counts.

    The histogram pools the inferior arms' counts into power-of-two bins
    [1,2), [2,4), ..., so its total is (k-1)*reps exactly.
    """
    counts = np.asarray(counts)
    reps, k = counts.shape
    inferior = np.delete(counts, best_arm, axis=1).ravel()
    top = int(inferior.max())
    n_bins = max(1, int(math.floor(math.log2(top))) + 1)
    edges = np.array([2 ** i for i in range(n_bins + 1)], dtype=np.int64)
    hist, _ = np.histogram(inferior, bins=edges)
    return AllocationSummary(
        k=k, budget=int(budget), reps=reps,
        per_arm_mean=counts.mean(axis=0),
        per_arm_median=np.median(counts, axis=0),
        per_arm_max=counts.max(axis=0),
        best_share=float((counts[:, best_arm] / budget).mean()),
        hist_edges=edges, hist_counts=hist,
    )


# ---------------------------------------------------------------------------
# trace-property verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceCheckReport:
    """Outcome of the realized-boundary checks on one traced run.

    Check 1: an arm whose current UCB value drops strictly below the
    best arm's realized minimum UCB is never sampled afterwards.
    Check 2: no arm's final count exceeds its boundary-crossing time
    against that realized minimum, replayed by the analysis oracle.
    """

    ok: bool
    boundary: float
    resample_violations: tuple  # (arm, fell_below_round, sampled_round)
    count_violations: tuple     # (arm, final_count, crossing_time)
    arms_checked: int


def verify_trace_properties(run: RunResult, bonus: BonusSpec,
                            config: Optional[ProblemConfig] = None) -> TraceCheckReport:
    """Check the boundary-crossing properties on a fully traced run.

    Refuses runs of coupled algorithms: the realized-minimum boundary
    argument needs each arm's UCB value to depend on its own count only.
    When `config` is provided, check 2 replays each inferior arm's stream
    through the analysis crossing-time oracle (same seed, same bits);
    otherwise it uses the UCB values recorded in the trace.
    """
    if run.algorithm_kind != "decoupled":
        raise CoupledAlgorithm("trace verification requires a decoupled algorithm")
    if run.trace is None or run.init_ucbs is None:
        raise TraceMissing("run was executed without full-trace capture")

    trace = run.trace
    k = trace.k
    best = 0

    # realized minimum of the best arm's UCB value process
    m1 = float(run.init_ucbs[best])
    best_rows = trace.arms == best
    if best_rows.any():
        m1 = min(m1, float(trace.new_ucbs[best_rows].min()))

    resample_violations = []
    below_since = [None] * k
    cur = [float(u) for u in run.init_ucbs]
    for i in range(k):
        if cur[i] < m1:
            below_since[i] = k  # fell below during initialization
    for idx in range(len(trace)):
        a = int(trace.arms[idx])
        rnd = k + 1 + idx
        if below_since[a] is not None:
            resample_violations.append((a, below_since[a], rnd))
        cur[a] = float(trace.new_ucbs[idx])
        if cur[a] < m1 and below_since[a] is None:
            below_since[a] = rnd

    count_violations = []
    # per-arm realized UCB sequences U_i(1..n_i(B)) straight from the trace
    for i in range(k):
        if i == best:
            continue
        n_i = int(run.final_counts[i])
        if config is not None:
            ct = crossing_time(run.seed, i, config.arms[i], bonus, m1,
                               start_n=1, horizon=n_i)
            t_i = ct.value if not ct.censored else None
        else:
            seq = [float(run.init_ucbs[i])]
            rows = trace.arms == i
            seq.extend(float(u) for u in trace.new_ucbs[rows])
            t_i = next((n for n, u in enumerate(seq, start=1) if u < m1), None)
        if t_i is not None and t_i < n_i:
            count_violations.append((i, n_i, t_i))

    return TraceCheckReport(
        ok=not resample_violations and not count_violations,
        boundary=m1,
        resample_violations=tuple(resample_violations),
        count_violations=tuple(count_violations),
        arms_checked=k,
    )
