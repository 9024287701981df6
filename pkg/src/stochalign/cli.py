"""Command-line entry points: align, pareto, validate, bench.

Exit codes: 0 success, 1 usage error, 2 input error, 3 node budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

from .formats import AlignmentReport, SlpnParseError, parse_log, parse_slpn, parse_trace, render
from .nets import NetError
from .oracle import EnumerationBudget, TruncatedEnumerationWarning, pareto_front, strip_silent
from .search import BudgetExceededError, NoDeadlockError, SearchConfig, stochastic_alignment

__all__ = ["cli_main", "main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochalign",
        description="Match an observed trace to a stochastic labeled Petri net.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    align = sub.add_parser("align", help="compute the loss-minimizing alignment for one trace")
    align.add_argument("--model", required=True, help="net description file")
    group = align.add_mutually_exclusive_group(required=True)
    group.add_argument("--trace", help="comma-separated activities")
    group.add_argument("--trace-file", help="file holding one trace")
    align.add_argument("--alpha", type=float, required=True, help="balance factor in [0, 1]")
    align.add_argument("--format", choices=("table", "json"), default="table")
    align.add_argument("--node-budget", type=int, default=None)
    align.add_argument("--cap", type=int, default=None, help="per-transition firing cap for the heuristics")
    align.add_argument("--rational", action="store_true", help="exact rational probability accumulation")
    align.add_argument("--lp-relax", action="store_true", help="LP-relaxed heuristics (faster, still admissible)")

    pareto = sub.add_parser("pareto", help="enumerate the Pareto-optimal model paths for a trace")
    pareto.add_argument("--model", required=True)
    pareto.add_argument("--trace", required=True)
    pareto.add_argument("--max-len", type=int, default=64, help="path length bound for enumeration")
    pareto.add_argument("--max-paths", type=int, default=200_000)
    pareto.add_argument("--plot", default=None, help="write a distance/probability figure to this file")

    validate = sub.add_parser("validate", help="check a net description file")
    validate.add_argument("--model", required=True)

    bench = sub.add_parser("bench", help="per-trace runtime benchmark over a log")
    bench.add_argument("--model", required=True)
    bench.add_argument("--log", required=True, help="one trace per line")
    bench.add_argument("--alphas", default="0.1,0.5,0.9", help="comma-separated balance factors")
    bench.add_argument("--repeat", type=int, default=1)
    bench.add_argument("--csv", required=True, help="output CSV path")
    bench.add_argument("--plot", default=None, help="also render runtime-vs-length panels to this file")
    bench.add_argument("--node-budget", type=int, default=None)
    bench.add_argument("--cap", type=int, default=None)
    bench.add_argument("--rational", action="store_true")
    bench.add_argument("--lp-relax", action="store_true")
    return parser


def _load_model(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SlpnParseError(0, f"cannot read {path}: {exc}") from exc
    return parse_slpn(text)


def _search_config(args) -> SearchConfig:
    config = SearchConfig()
    if getattr(args, "node_budget", None) is not None:
        config.node_budget = args.node_budget
    if getattr(args, "cap", None) is not None:
        config.cap = args.cap
    config.rational = bool(getattr(args, "rational", False))
    config.lp_relaxation = bool(getattr(args, "lp_relax", False))
    return config


def _cmd_align(args) -> int:
    model = _load_model(args.model)
    if args.trace is not None:
        trace = parse_trace(args.trace)
    else:
        lines = [
            line
            for line in Path(args.trace_file).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        ]
        trace = parse_trace(lines[0]) if lines else ()
    if not 0.0 <= args.alpha <= 1.0:
        print(f"error: alpha must lie in [0, 1], got {args.alpha}", file=sys.stderr)
        return EXIT_INPUT
    config = _search_config(args)
    try:
        alignment = stochastic_alignment(model, trace, args.alpha, config)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.best is not None:
            print(f"best incumbent loss: {exc.best.loss:.6f}", file=sys.stderr)
        return EXIT_BUDGET
    except NoDeadlockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = AlignmentReport(
        alignment=alignment,
        trace=tuple(trace),
        model=model,
        cap=config.cap,
        node_budget=config.node_budget,
        rational=config.rational,
        lp_relaxation=config.lp_relaxation,
    )
    print(render(report, args.format), end="")
    return EXIT_OK


def _cmd_pareto(args) -> int:
    model = _load_model(args.model)
    trace = parse_trace(args.trace)
    budget = EnumerationBudget(max_path_len=args.max_len, max_paths=args.max_paths)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncatedEnumerationWarning)
        front = pareto_front(model, trace, budget)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print("distance\tprobability\tprobability_float\tmodel_path\tmodel_trace")
    for path, d, prob in front.entries:
        names = " ".join(model.transition_names[t] for t in path.transitions)
        labels = " ".join(strip_silent(model, path.transitions))
        print(f"{d}\t{prob}\t{float(prob):.6g}\t{names}\t{labels}")
    if args.plot:
        from .plots import save_pareto_plot

        save_pareto_plot([(d, prob) for _, d, prob in front.entries], args.plot)
    return EXIT_OK


def _cmd_validate(args) -> int:
    model = _load_model(args.model)
    silent = sum(1 for t in range(model.num_transitions) if model.is_silent(t))
    print(
        f"ok: {model.num_places} places, {model.num_transitions} transitions "
        f"({silent} silent), {model.initial_marking.total()} initial tokens"
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    model = _load_model(args.model)
    traces = parse_log(Path(args.log).read_text(encoding="utf-8"))
    try:
        alphas = [float(tok) for tok in args.alphas.split(",") if tok.strip()]
    except ValueError:
        print(f"error: cannot parse alpha list {args.alphas!r}", file=sys.stderr)
        return EXIT_INPUT
    if not traces:
        print("error: the log holds no traces", file=sys.stderr)
        return EXIT_INPUT
    config = _search_config(args)

    rows: list[dict] = []
    any_budget = False
    for idx, trace in enumerate(traces):
        for alpha in alphas:
            for rep in range(args.repeat):
                row = {
                    "trace_index": idx,
                    "trace_length": len(trace),
                    "alpha": alpha,
                    "repeat": rep,
                    "status": "ok",
                    "runtime_ms": None,
                    "expanded_nodes": None,
                    "cost": None,
                    "log10_probability": None,
                    "loss": None,
                }
                try:
                    al = stochastic_alignment(model, trace, alpha, config)
                    row.update(
                        runtime_ms=round(al.runtime_ms, 3),
                        expanded_nodes=al.expanded_nodes,
                        cost=al.cost,
                        log10_probability=al.log10_probability,
                        loss=al.loss,
                    )
                except BudgetExceededError:
                    row["status"] = "budget-exceeded"
                    any_budget = True
                except NoDeadlockError:
                    row["status"] = "no-deadlock"
                    any_budget = True
                rows.append(row)

    fields = [
        "trace_index",
        "trace_length",
        "alpha",
        "repeat",
        "status",
        "runtime_ms",
        "expanded_nodes",
        "cost",
        "log10_probability",
        "loss",
    ]
    with open(args.csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    if args.plot:
        from .plots import save_bench_plot

        ok_rows = [r for r in rows if r["status"] == "ok"]
        save_bench_plot(ok_rows, args.plot)
    print(f"wrote {len(rows)} rows to {args.csv}")
    return EXIT_BUDGET if any_budget else EXIT_OK


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "align":
            return _cmd_align(args)
        if args.command == "pareto":
            return _cmd_pareto(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "bench":
            return _cmd_bench(args)
    except SlpnParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    raise AssertionError("unreachable")


def main() -> None:
    sys.exit(cli_main())
