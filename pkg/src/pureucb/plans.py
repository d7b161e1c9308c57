"""Experiment-plan documents: JSON schema, validation, and recipes.

A plan document mirrors `harness.ExperimentPlan` plus output paths.
Validation is strict: unknown keys are rejected, and every error message
carries the JSON pointer path of the offending field.  `plan_to_doc`
round-trips a parsed plan back to a document with all defaults
materialized.

The recipe catalog encodes the experiment presets used throughout the
package (PCS-vs-scale sweeps, allocation comparison, non-IZ sweeps, and
the selection-standard comparison) with their standard parameters.
"""

import json

from .bonus import BonusSpec
from .engine import SelectionStandard
from .errors import ValidationError
from .harness import AlgorithmSpec, BudgetRule, ConfigTemplate, ExperimentPlan

DESK_K = [32, 64, 128, 256, 512, 1024, 2048]

_BONUS_VARIANTS = ("greedy", "ucbe", "moss", "lil", "heavy_cs", "ucbe_plus")

_PLAN_DEFAULTS = {
    "reps": 500,
    "base_seed": 0,
    "selection_standard": "max_count",
    "capture": "none",
    "output": {},
}


def _fail(path, msg):
    raise ValidationError(f"{path}: {msg}")


def _check_keys(doc, path, required, optional=()):
    if not isinstance(doc, dict):
        _fail(path, f"expected an object, got {type(doc).__name__}")
    for key in doc:
        if key not in required and key not in optional:
            _fail(f"{path}.{key}", "unknown key")
    for key in required:
        if key not in doc:
            _fail(f"{path}.{key}", "missing required key")


def _number(doc, path, key, default=None):
    if key not in doc:
        if default is None:
            _fail(f"{path}.{key}", "missing required key")
        return default
    v = doc[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        _fail(f"{path}.{key}", "expected a number")
    return v


def _dist_doc(doc, path):
    _check_keys(doc, path, ("family", "params"), ("shift",))
    try:
        from .distributions import DistributionSpec

        DistributionSpec.from_json_dict(doc)
    except (KeyError, ValueError) as exc:
        _fail(path, str(exc))
    return {"family": doc["family"], "params": dict(doc["params"]),
            "shift": doc.get("shift", 0.0)}


def parse_config(doc, path="config") -> ConfigTemplate:
    _check_keys(doc, path, ("kind",),
                ("label", "base", "odd", "even", "gamma", "lambda", "beta",
                 "q", "epsilon", "mu1"))
    kind = doc["kind"]
    label = doc.get("label", "")
    if kind == "sc":
        _check_keys(doc, path, ("kind", "base", "gamma"), ("label",))
        return ConfigTemplate.make("sc", label or "sc",
                                   base=_dist_doc(doc["base"], f"{path}.base"),
                                   gamma=_number(doc, path, "gamma"))
    if kind == "mm":
        _check_keys(doc, path, ("kind", "base", "gamma", "lambda", "beta"), ("label",))
        return ConfigTemplate.make(
            "mm", label or "mm",
            base=_dist_doc(doc["base"], f"{path}.base"),
            gamma=_number(doc, path, "gamma"),
            **{"lambda": _number(doc, path, "lambda")},
            beta=_number(doc, path, "beta"))
    if kind == "mixed":
        _check_keys(doc, path, ("kind", "odd", "even", "gamma"),
                    ("label", "lambda", "beta"))
        return ConfigTemplate.make(
            "mixed", label or "mixed",
            odd=_dist_doc(doc["odd"], f"{path}.odd"),
            even=_dist_doc(doc["even"], f"{path}.even"),
            gamma=_number(doc, path, "gamma"),
            **{"lambda": _number(doc, path, "lambda", 0.0)},
            beta=_number(doc, path, "beta", 0.0))
    if kind == "noniz":
        _check_keys(doc, path, ("kind", "q", "beta"),
                    ("label", "epsilon", "lambda", "mu1"))
        return ConfigTemplate.make(
            "noniz", label or "noniz",
            q=_number(doc, path, "q"),
            beta=_number(doc, path, "beta"),
            epsilon=_number(doc, path, "epsilon", 0.1),
            **{"lambda": _number(doc, path, "lambda", 0.25)},
            mu1=_number(doc, path, "mu1", 0.0))
    _fail(f"{path}.kind", f"unknown config kind {kind!r}")


def parse_algorithm(doc, path) -> AlgorithmSpec:
    _check_keys(doc, path, ("variant",), ("params",))
    variant = doc["variant"]
    if variant == "ucb1":
        if doc.get("params"):
            _fail(f"{path}.params", "ucb1 takes no parameters")
        return AlgorithmSpec.ucb1()
    if variant not in _BONUS_VARIANTS:
        _fail(f"{path}.variant", f"unknown algorithm variant {variant!r}")
    try:
        bonus = BonusSpec.from_json_dict(doc)
    except ValueError as exc:
        _fail(path, str(exc))
    return AlgorithmSpec.decoupled(bonus)


def parse_budget(doc, path="budget") -> BudgetRule:
    _check_keys(doc, path, ("rule",), ("c", "table", "alpha", "M", "q_prime"))
    rule = doc["rule"]
    if rule == "multiplier":
        c = _number(doc, path, "c")
        if c <= 0:
            _fail(f"{path}.c", "multiplier must be positive")
        return BudgetRule("multiplier", multiplier=c)
    if rule == "explicit":
        table = doc.get("table")
        if not isinstance(table, dict) or not table:
            _fail(f"{path}.table", "expected a non-empty object of k -> B")
        try:
            pairs = tuple(sorted((int(k), int(v)) for k, v in table.items()))
        except (TypeError, ValueError):
            _fail(f"{path}.table", "keys and values must be integers")
        return BudgetRule("explicit", explicit=pairs)
    if rule == "noniz_simplified":
        return BudgetRule("noniz_simplified")
    if rule == "noniz_general":
        return BudgetRule("noniz_general",
                          alpha=_number(doc, path, "alpha", 0.1),
                          M=_number(doc, path, "M", 1.0),
                          q_prime=_number(doc, path, "q_prime", 2.0))
    _fail(f"{path}.rule", f"unknown budget rule {rule!r}")


def parse_plan(doc) -> tuple:
    """Validate a plan document; returns (ExperimentPlan, output paths)."""
    _check_keys(doc, "$", ("configs", "algorithms", "k_values", "budget"),
                tuple(_PLAN_DEFAULTS))
    if not isinstance(doc["configs"], list) or not doc["configs"]:
        _fail("$.configs", "expected a non-empty array")
    configs = [parse_config(c, f"$.configs[{i}]") for i, c in enumerate(doc["configs"])]
    if not isinstance(doc["algorithms"], list) or not doc["algorithms"]:
        _fail("$.algorithms", "expected a non-empty array")
    algorithms = [parse_algorithm(a, f"$.algorithms[{i}]")
                  for i, a in enumerate(doc["algorithms"])]
    ks = doc["k_values"]
    if (not isinstance(ks, list) or not ks
            or any(not isinstance(k, int) or k < 2 for k in ks)):
        _fail("$.k_values", "expected a non-empty array of integers >= 2")
    budget = parse_budget(doc["budget"], "$.budget")
    reps = doc.get("reps", _PLAN_DEFAULTS["reps"])
    if not isinstance(reps, int) or reps < 1:
        _fail("$.reps", "expected an integer >= 1")
    base_seed = doc.get("base_seed", _PLAN_DEFAULTS["base_seed"])
    if not isinstance(base_seed, int):
        _fail("$.base_seed", "expected an integer")
    std = doc.get("selection_standard", _PLAN_DEFAULTS["selection_standard"])
    try:
        standard = SelectionStandard(std)
    except ValueError:
        _fail("$.selection_standard", f"unknown standard {std!r}")
    capture = doc.get("capture", _PLAN_DEFAULTS["capture"])
    if capture not in ("none", "allocation", "full_trace"):
        _fail("$.capture", f"unknown capture mode {capture!r}")
    output = doc.get("output", {})
    _check_keys(output, "$.output", (),
                ("results_csv", "allocation_json", "histogram_csv", "trace_csv",
                 "report_json"))
    try:
        plan = ExperimentPlan(configs, algorithms, ks, budget, reps, base_seed,
                              standard, capture)
    except ValidationError as exc:
        _fail("$", str(exc))
    return plan, dict(output)


def _config_to_doc(t: ConfigTemplate) -> dict:
    p = t.param_dict()
    doc = {"kind": t.kind, "label": t.label}
    doc.update(p)
    return doc


def _algorithm_to_doc(a: AlgorithmSpec) -> dict:
    if a.kind == "ucb1":
        return {"variant": "ucb1"}
    return a.bonus.to_json_dict()


def _budget_to_doc(b: BudgetRule) -> dict:
    if b.kind == "multiplier":
        return {"rule": "multiplier", "c": b.multiplier}
    if b.kind == "explicit":
        return {"rule": "explicit", "table": {str(k): v for k, v in b.explicit}}
    if b.kind == "noniz_simplified":
        return {"rule": "noniz_simplified"}
    return {"rule": "noniz_general", "alpha": b.alpha, "M": b.M, "q_prime": b.q_prime}


def plan_to_doc(plan: ExperimentPlan, output=None) -> dict:
    """Serialize a plan with every default materialized."""
    return {
        "configs": [_config_to_doc(t) for t in plan.configs],
        "algorithms": [_algorithm_to_doc(a) for a in plan.algorithms],
        "k_values": list(plan.k_values),
        "budget": _budget_to_doc(plan.budget),
        "reps": plan.reps,
        "base_seed": plan.base_seed,
        "selection_standard": plan.selection_standard.value,
        "capture": plan.capture,
        "output": dict(output or {}),
    }


# ---------------------------------------------------------------------------
# recipe catalog
# ---------------------------------------------------------------------------

_LOGNORMAL_BASE = {"family": "lognormal", "params": {"mu": -2.0, "sigma": 1.45},
                   "shift": 0.0}
_STUDENT_T3 = {"family": "student_t", "params": {"df": 3.0, "scale": 0.6},
               "shift": 0.0}
_PARETO3 = {"family": "pareto", "params": {"shape": 3.0, "scale": 1.2},
            "shift": 0.0}
_STUDENT_T4 = {"family": "student_t", "params": {"df": 4.0, "scale": 0.7},
               "shift": 0.0}
_PARETO4 = {"family": "pareto", "params": {"shape": 4.0, "scale": 2.1},
            "shift": 0.0}

_ALGOS_MAIN = [
    {"variant": "ucbe", "params": {"a": 1.0}},
    {"variant": "moss"},
    {"variant": "greedy"},
    {"variant": "ucb1"},
]

_SEED = 20240501


def _sc(label, base):
    return {"kind": "sc", "label": label, "base": base, "gamma": 0.1}


def _mm(label, base):
    return {"kind": "mm", "label": label, "base": base, "gamma": 0.1,
            "lambda": 1.0, "beta": 1.0}


def _mixed(label, odd, even, mm=False):
    doc = {"kind": "mixed", "label": label, "odd": odd, "even": even, "gamma": 0.1}
    if mm:
        doc.update({"lambda": 1.0, "beta": 1.0})
    return doc


def recipes() -> dict:
    """Recipe name -> list of (filename, plan document)."""
    fig2 = {
        "configs": [_sc("sc-lognormal", _LOGNORMAL_BASE)],
        "algorithms": _ALGOS_MAIN,
        "k_values": DESK_K,
        "budget": {"rule": "multiplier", "c": 100},
        "reps": 500,
        "base_seed": _SEED,
        "output": {"results_csv": "fig2-sc-lognormal.csv"},
    }
    fig3_sc = {
        "configs": [
            _mixed("sc-odd-t-even-pareto", _STUDENT_T4, _PARETO4),
            _mixed("sc-odd-pareto-even-t", _PARETO4, _STUDENT_T4),
        ],
        "algorithms": _ALGOS_MAIN,
        "k_values": DESK_K,
        "budget": {"rule": "multiplier", "c": 100},
        "reps": 500,
        "base_seed": _SEED + 1,
        "output": {"results_csv": "fig3-mixed-sc.csv"},
    }
    fig3_mm = {
        "configs": [
            _mixed("mm-odd-t-even-pareto", _STUDENT_T4, _PARETO4, mm=True),
            _mixed("mm-odd-pareto-even-t", _PARETO4, _STUDENT_T4, mm=True),
        ],
        "algorithms": _ALGOS_MAIN,
        "k_values": DESK_K,
        "budget": {"rule": "multiplier", "c": 30},
        "reps": 500,
        "base_seed": _SEED + 2,
        "output": {"results_csv": "fig3-mixed-mm.csv"},
    }
    alloc = {
        "configs": [_sc("sc-lognormal", _LOGNORMAL_BASE)],
        "algorithms": [
            {"variant": "ucbe", "params": {"a": 1.0}},
            {"variant": "moss"},
            {"variant": "ucb1"},
        ],
        "k_values": [128],
        "budget": {"rule": "multiplier", "c": 150},
        "reps": 500,
        "base_seed": _SEED + 3,
        "capture": "allocation",
        "output": {"results_csv": "fig4-5-alloc.csv",
                   "allocation_json": "fig4-5-alloc.json",
                   "histogram_csv": "fig4-5-hist.csv"},
    }
    alloc_trace = {
        "configs": [_sc("sc-lognormal", _LOGNORMAL_BASE)],
        "algorithms": [
            {"variant": "ucbe", "params": {"a": 1.0}},
            {"variant": "moss"},
            {"variant": "ucb1"},
        ],
        "k_values": [128],
        "budget": {"rule": "multiplier", "c": 150},
        "reps": 1,
        "base_seed": _SEED + 3,
        "capture": "full_trace",
        "output": {"trace_csv": "fig4-path.csv", "report_json": "fig4-path-report.json"},
    }
    fig6 = {
        "configs": [
            {"kind": "noniz", "label": "noniz-q6", "q": 6.0, "beta": 0.45,
             "epsilon": 0.1, "lambda": 0.25, "mu1": 0.0},
            {"kind": "noniz", "label": "noniz-q5", "q": 5.0, "beta": 0.35,
             "epsilon": 0.1, "lambda": 0.25, "mu1": 0.0},
            {"kind": "noniz", "label": "noniz-q4", "q": 4.0, "beta": 0.20,
             "epsilon": 0.1, "lambda": 0.25, "mu1": 0.0},
        ],
        "algorithms": [
            {"variant": "ucbe_plus"},  # q bound from each config
            {"variant": "ucbe", "params": {"a": 1.0}},
            {"variant": "moss"},
            {"variant": "greedy"},
        ],
        "k_values": DESK_K,
        "budget": {"rule": "noniz_simplified"},
        "reps": 500,
        "base_seed": _SEED + 4,
        "output": {"results_csv": "fig6-noniz.csv"},
    }

    # The selection standard is not part of the replication seed, so the
    # three standards replay identical sample paths and differ only in the
    # final pick.  One plan per (standard, configuration) since the
    # slippage and monotone-means budgets differ (c = 100 vs 30).
    standards = []
    for std in ("max_count", "max_mean", "max_ucb"):
        for cfg_label, cfg, c in (("sc", _sc("sc-lognormal", _LOGNORMAL_BASE), 100),
                                  ("mm", _mm("mm-lognormal", _LOGNORMAL_BASE), 30)):
            standards.append((f"ecfig-standards-{std}-{cfg_label}.json", {
                "configs": [cfg],
                "algorithms": [{"variant": "ucbe", "params": {"a": 1.0}},
                               {"variant": "moss"}],
                "k_values": DESK_K,
                "budget": {"rule": "multiplier", "c": c},
                "reps": 500,
                "base_seed": _SEED + 5,
                "selection_standard": std,
                "output": {"results_csv": f"ecfig-standards-{std}-{cfg_label}.csv"},
            }))

    return {
        "fig2-sc-lognormal": [("fig2-sc-lognormal.json", fig2)],
        "fig3-mixed": [("fig3-mixed-sc.json", fig3_sc),
                       ("fig3-mixed-mm.json", fig3_mm)],
        "fig4-5-alloc": [("fig4-5-alloc.json", alloc),
                         ("fig4-path.json", alloc_trace)],
        "fig6-noniz": [("fig6-noniz.json", fig6)],
        "ecfig-standards": standards,
    }


def table1_listing() -> list:
    """Human-readable lines for the base-distribution presets."""
    from .configs import table1_presets

    lines = []
    for name, spec in table1_presets().items():
        params = ", ".join(f"{k}={v:g}" for k, v in spec.params.items())
        lines.append(f"{name}: {spec.family}({params})")
    return lines


def dumps_doc(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
