"""Fixed-budget best-arm identification with decoupled UCB algorithms.

Simulation engine, heavy-tail distribution streams, exploration-bonus
library, theoretical-bound evaluators, and a replicated experiment
harness with a CLI.  Hot kernels run in a compiled extension when
available, with a bit-identical pure-Python fallback selected at import
(see `pureucb.backend_name()`).
"""

from ._backend import BACKEND as _BACKEND
from .bonus import BonusSpec
from .configs import (
    ProblemConfig,
    make_mixed,
    make_noniz,
    make_shifted,
    table1_presets,
)
from .distributions import ArmStream, DistributionSpec, abs_moment_mc, sample
from .engine import Decoupled, RunResult, SelectionStandard, UCB1, run

__version__ = "0.1.0"

__all__ = [
    "ArmStream",
    "BonusSpec",
    "Decoupled",
    "DistributionSpec",
    "ProblemConfig",
    "RunResult",
    "SelectionStandard",
    "UCB1",
    "abs_moment_mc",
    "backend_name",
    "make_mixed",
    "make_noniz",
    "make_shifted",
    "run",
    "sample",
    "table1_presets",
]


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return _BACKEND
