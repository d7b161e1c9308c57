"""Command-line interface.

Subcommands:
  run <plan.json>      replicated experiment -> results CSV (+ allocation files)
  trace <plan.json>    single fully-traced run -> trace CSV + property report
  bounds <params.json> evaluate the theoretical bounds -> JSON report
  plot <csv>           render results/histogram/trace CSV as SVG
  presets              list or emit the built-in experiment recipes

Exit codes: 0 success, 1 input validation error (with a pointer path),
2 runtime or I/O error.  Thread count comes from PUREUCB_THREADS;
--seed overrides a plan's base seed.
"""

import argparse
import csv
import json
import os
import sys
import tempfile

from . import analysis, plans
from .bonus import BonusSpec
from .engine import trace_rows
from .errors import PureUCBError, SchemaMismatch, ValidationError
from .harness import allocation_summary, rep_seed, run_experiment, verify_trace_properties
from .svgplot import emit_svg
from . import engine as _engine


def _write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"$: malformed JSON at line {exc.lineno}, column "
                              f"{exc.colno}: {exc.msg}") from exc


def _out_path(out_dir: str, name: str) -> str:
    return os.path.join(out_dir, name)


def _cmd_run(args) -> int:
    plan, output = plans.parse_plan(_load_json(args.plan))
    if args.seed is not None:
        plan.base_seed = args.seed
    table = run_experiment(plan)
    for label, algo, k, msg in table.errors:
        print(f"warning: cell ({label}, {algo}, k={k}) failed: {msg}",
              file=sys.stderr)
    if not table.cells:
        print("error: every cell failed", file=sys.stderr)
        return 2
    results_csv = _out_path(args.out_dir, output.get("results_csv", "results.csv"))
    _write_atomic(results_csv, table.to_csv_text())
    print(f"wrote {results_csv} ({len(table.cells)} cells)")
    if plan.capture in ("allocation", "full_trace"):
        summaries = {}
        hist_lines = ["config,algorithm,k,bin_lo,bin_hi,count"]
        for cell in table.cells:
            if cell.counts is None:
                continue
            summ = allocation_summary(cell.counts, cell.budget)
            key = f"{cell.config_label}|{cell.algorithm_label}|k={cell.k}"
            summaries[key] = summ.to_json_dict()
            for lo, hi, c in summ.hist_rows():
                hist_lines.append(
                    f"{cell.config_label},{cell.algorithm_label},{cell.k},{lo},{hi},{c}")
        alloc_json = _out_path(args.out_dir,
                               output.get("allocation_json", "allocation.json"))
        _write_atomic(alloc_json, json.dumps(summaries, indent=2) + "\n")
        print(f"wrote {alloc_json}")
        hist_csv = _out_path(args.out_dir,
                             output.get("histogram_csv", "histogram.csv"))
        _write_atomic(hist_csv, "\n".join(hist_lines) + "\n")
        print(f"wrote {hist_csv}")
    return 0


def _cmd_trace(args) -> int:
    plan, output = plans.parse_plan(_load_json(args.plan))
    if args.seed is not None:
        plan.base_seed = args.seed
    template = plan.configs[0]
    algo_spec = plan.algorithms[0]
    k = plan.k_values[0]
    config = template.build(k)
    budget = plan.budget.resolve(template, k)
    algorithm = algo_spec.materialize(template)
    seed = rep_seed(plan.base_seed, template, algo_spec, k, 0)
    res = _engine.run(config, algorithm, budget, plan.selection_standard,
                      seed, capture_trace=True)

    lines = ["round,arm,new_count,observation,new_ucb"]
    for rnd, arm, cnt, obs, ucb in trace_rows(res):
        lines.append(f"{rnd},{arm},{cnt},{obs:.17g},{ucb:.17g}")
    trace_csv = _out_path(args.out_dir, output.get("trace_csv", "trace.csv"))
    _write_atomic(trace_csv, "\n".join(lines) + "\n")
    print(f"wrote {trace_csv} ({budget} rounds)")

    report = {"run": res.to_json_dict(),
              "config": template.label, "algorithm": algo_spec.label(),
              "k": k, "budget": budget, "seed": seed}
    if res.algorithm_kind == "decoupled":
        check = verify_trace_properties(
            res, _engine.resolve_bonus(algorithm, budget, k), config)
        report["properties"] = {
            "ok": check.ok,
            "boundary": check.boundary,
            "resample_violations": list(check.resample_violations),
            "count_violations": list(check.count_violations),
        }
    else:
        report["properties"] = "skipped: coupled algorithm"
    text = json.dumps(report, indent=2) + "\n"
    if output.get("report_json"):
        path = _out_path(args.out_dir, output["report_json"])
        _write_atomic(path, text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return 0


_BOUNDS_KEYS = ("bonus", "gamma", "c", "sigma_lo", "sigma_hi", "sigma1",
                "q", "M", "regime", "beta")


def _cmd_bounds(args) -> int:
    doc = _load_json(args.params)
    if not isinstance(doc, dict):
        raise ValidationError("$: expected an object")
    for key in doc:
        if key not in _BOUNDS_KEYS:
            raise ValidationError(f"$.{key}: unknown key")
    for key in ("bonus", "gamma", "c"):
        if key not in doc:
            raise ValidationError(f"$.{key}: missing required key")
    try:
        bonus = BonusSpec.from_json_dict(doc["bonus"])
    except ValueError as exc:
        raise ValidationError(f"$.bonus: {exc}") from exc
    report = analysis.bound_report(
        bonus=bonus, gamma=doc["gamma"], c=doc["c"],
        sigma_lo=doc.get("sigma_lo", 1.0), sigma_hi=doc.get("sigma_hi", 1.0),
        sigma1=doc.get("sigma1"), q=doc.get("q"), M=doc.get("M"),
        regime=doc.get("regime", "location_scale"), beta=doc.get("beta"),
    )
    text = json.dumps(report.to_json_dict(), indent=2) + "\n"
    if args.output:
        _write_atomic(args.output, text)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_plot(args) -> int:
    try:
        with open(args.csv) as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.kind == "pcs":
        groups = {}
        for r in rows:
            if "config" not in r or "algorithm" not in r:
                raise SchemaMismatch("results CSV needs config and algorithm columns")
            groups.setdefault(r["config"], []).append(r)
        if not groups:
            raise SchemaMismatch("no data rows")
        multi = len(groups) > 1
        for label, grp in sorted(groups.items()):
            svg = emit_svg(grp, "pcs", title=label)
            out = args.output
            if multi:
                base, ext = os.path.splitext(args.output)
                out = f"{base}-{label}{ext or '.svg'}"
            _write_atomic(out, svg)
            print(f"wrote {out}")
        return 0
    svg = emit_svg(rows, args.kind, title=args.title)
    _write_atomic(args.output, svg)
    print(f"wrote {args.output}")
    return 0


def _cmd_presets(args) -> int:
    catalog = plans.recipes()
    if not args.emit:
        print("figure-reproduction recipes:")
        for name, files in catalog.items():
            print(f"  {name}  ({', '.join(f for f, _ in files)})")
        print("base-distribution presets:")
        for line in plans.table1_listing():
            print(f"  {line}")
        print("emit a recipe's plan files with: pureucb presets --emit NAME")
        return 0
    if args.emit not in catalog and args.emit != "all":
        print(f"error: unknown recipe {args.emit!r}", file=sys.stderr)
        return 1
    names = list(catalog) if args.emit == "all" else [args.emit]
    for name in names:
        for fname, doc in catalog[name]:
            path = _out_path(args.dir, fname)
            _write_atomic(path, plans.dumps_doc(doc))
            print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pureucb", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run a replicated experiment plan")
    pr.add_argument("plan")
    pr.add_argument("--seed", type=int, default=None, help="override base_seed")
    pr.add_argument("--out-dir", default=".", help="directory for output files")
    pr.set_defaults(fn=_cmd_run)

    pt = sub.add_parser("trace", help="single fully-traced run + property report")
    pt.add_argument("plan")
    pt.add_argument("--seed", type=int, default=None)
    pt.add_argument("--out-dir", default=".")
    pt.set_defaults(fn=_cmd_trace)

    pb = sub.add_parser("bounds", help="evaluate theoretical bounds")
    pb.add_argument("params")
    pb.add_argument("-o", "--output", default=None)
    pb.set_defaults(fn=_cmd_bounds)

    pp = sub.add_parser("plot", help="render a CSV as SVG")
    pp.add_argument("csv")
    pp.add_argument("--kind", choices=("pcs", "hist", "alloc"), required=True)
    pp.add_argument("-o", "--output", default="plot.svg")
    pp.add_argument("--title", default=None)
    pp.set_defaults(fn=_cmd_plot)

    ps = sub.add_parser("presets", help="list or emit experiment recipes")
    ps.add_argument("--emit", default=None, help="recipe name or 'all'")
    ps.add_argument("--dir", default=".", help="directory for emitted files")
    ps.set_defaults(fn=_cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValidationError, SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PureUCBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
