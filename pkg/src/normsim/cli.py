"""Command-line front door: run, batch, plot, replay.

Exit codes: 0 success, 2 configuration problem, 3 file I/O problem,
4 replay mismatch, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from dataclasses import replace
from pathlib import Path

from ._version import __version__
from .config import Condition, ConfigError, MutationOperator, SimConfig
from .engine import run_simulation
from .experiment import (
    BatchResult,
    ConditionBatch,
    ExperimentSpec,
    aggregate_dict_rows,
    filter_successful,
    run_batch,
)
from .io import (
    config_from_metadata,
    parse_config,
    read_metrics_csv,
    run_csv_lines,
    write_batch_bundle,
    write_run_csv,
    write_summary_json,
)
from .metrics import CSV_COLUMNS
from .plots import PlotGroup, emit_plots, render_groups

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_REPLAY_MISMATCH = 4


def _add_common_flags(p: argparse.ArgumentParser, batch: bool) -> None:
    p.add_argument("--config", type=Path, default=None,
                   help="JSON config file (flags override its keys)")
    p.add_argument("--seed", type=int, default=None,
                   help="64-bit seed; drawn from OS entropy (and recorded) if omitted")
    p.add_argument("--condition", choices=[c.value for c in Condition], default=None)
    p.add_argument("--operator", choices=[o.value for o in MutationOperator],
                   default=None, help="mutation operator")
    p.add_argument("--rounds", type=int, default=None, help="rounds per run")
    p.add_argument("--out", type=Path, default=Path("normsim-out"),
                   help="output directory (default: %(default)s)")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    if batch:
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--success-threshold", type=int, default=None,
                       help="final population strictly above this counts as success")
        p.add_argument("--parallelism", type=int, default=None,
                       help="worker processes (never changes results)")
        p.add_argument("--filter-successful", action="store_true",
                       help="drop unsuccessful runs before writing outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normsim",
        description="Simulate norm emergence in an evolving population "
                    "sharing a renewable resource.",
    )
    parser.add_argument("--version", action="version", version=f"normsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation run")
    _add_common_flags(p_run, batch=False)

    p_batch = sub.add_parser("batch", help="replicated experiment")
    _add_common_flags(p_batch, batch=True)

    p_plot = sub.add_parser("plot", help="render figures from run CSV files")
    p_plot.add_argument("files", nargs="+", type=Path, help="run CSV files")
    p_plot.add_argument("--out", type=Path, default=Path("normsim-out"))

    p_replay = sub.add_parser(
        "replay", help="re-run a CSV from its embedded config and verify it matches")
    p_replay.add_argument("file", type=Path, help="run CSV with embedded metadata")
    p_replay.add_argument("--out", type=Path, default=None,
                          help="also write the re-run bundle here")

    return parser


def _spec_from_args(args, batch: bool) -> ExperimentSpec:
    spec = parse_config(args.config) if args.config else ExperimentSpec()
    base = spec.base
    overrides = {}
    if args.condition is not None:
        overrides["condition"] = Condition(args.condition)
    if args.operator is not None:
        overrides["mutation_operator"] = MutationOperator(args.operator)
    if args.rounds is not None:
        overrides["max_rounds"] = args.rounds
    if overrides:
        base = replace(base, **overrides)
        # explicit condition/operator flags collapse any conditions list
        if ("condition" in overrides or "mutation_operator" in overrides):
            spec = replace(spec, conditions=())
    seed = args.seed
    if seed is None:
        seed = spec.master_seed if args.config else secrets.randbits(64)
    spec_overrides = {"base": base, "master_seed": seed}
    if batch:
        if args.replicates is not None:
            spec_overrides["replicates"] = args.replicates
        if args.success_threshold is not None:
            spec_overrides["success_population_threshold"] = args.success_threshold
        if args.parallelism is not None:
            spec_overrides["parallelism"] = args.parallelism
    spec = replace(spec, **spec_overrides)
    spec.validate()
    return spec


def _report_written(paths) -> None:
    for p in paths:
        print(p)


def _cmd_run(args) -> int:
    spec = _spec_from_args(args, batch=False)
    # A single run uses the seed directly — no substream derivation — so the
    # file can be replayed from its own header without the batch context.
    config = replace(spec.base, seed=spec.master_seed)
    result = run_simulation(config)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    batch = BatchResult(
        spec=replace(spec, replicates=1),
        groups=[ConditionBatch(
            condition=config.condition,
            operator=config.mutation_operator,
            runs=[result],
            success=[result.final_population > spec.success_population_threshold],
            aggregate=aggregate_dict_rows([[r.as_row() for r in result.rounds]]),
        )],
    )
    written = [write_run_csv(result, out / f"run_{batch.groups[0].label}_000.csv")]
    written.append(write_summary_json(batch, out / "summary.json"))
    if not args.no_plots:
        written.extend(emit_plots(batch, out))
    _report_written(written)
    print(f"seed={config.seed} rounds={len(result.rounds) - 1} "
          f"final_population={result.final_population} termination={result.termination}")
    return EXIT_OK


def _cmd_batch(args) -> int:
    spec = _spec_from_args(args, batch=True)
    batch = run_batch(spec)
    if args.filter_successful:
        batch = filter_successful(batch)
    written = write_batch_bundle(batch, args.out)
    if not args.no_plots:
        written.extend(emit_plots(batch, args.out))
    _report_written(written)
    for g in batch.groups:
        finals = [r.final_population for r in g.runs]
        print(f"{g.label}: runs={len(g.runs)} successes={sum(g.success)} "
              f"final_populations={finals}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    by_label: dict[str, list[list[dict]]] = {}
    for path in args.files:
        meta, rows = read_metrics_csv(path)
        label = f"{meta.get('condition', '?')}_{meta.get('operator', '?')}"
        by_label.setdefault(label, []).append(rows)
    groups = [
        PlotGroup(label=label, runs=runs, aggregate=aggregate_dict_rows(runs))
        for label, runs in sorted(by_label.items())
    ]
    written = render_groups(groups, args.out)
    _report_written(written)
    return EXIT_OK


def _cmd_replay(args) -> int:
    meta, _ = read_metrics_csv(args.file)
    config = config_from_metadata(meta, source=str(args.file))
    result = run_simulation(config)
    # Compare from the column header down: identical data rows prove the
    # file reproduces from its own embedded config.
    header = ",".join(CSV_COLUMNS)
    new_lines = run_csv_lines(result)
    old_lines = Path(args.file).read_text().splitlines()
    try:
        old_data = old_lines[old_lines.index(header):]
        new_data = new_lines[new_lines.index(header):]
    except ValueError:
        print(f"replay: {args.file}: missing column header", file=sys.stderr)
        return EXIT_CONFIG
    if old_data != new_data:
        for i, (a, b) in enumerate(zip(old_data, new_data)):
            if a != b:
                print(f"replay mismatch at data line {i}:\n  file:  {a}\n  rerun: {b}",
                      file=sys.stderr)
                break
        else:
            print(f"replay mismatch: {len(old_data) - 1} rows in file, "
                  f"{len(new_data) - 1} re-run", file=sys.stderr)
        return EXIT_REPLAY_MISMATCH
    print(f"replay verified: {len(new_data) - 1} rows match ({args.file})")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = write_run_csv(
            result, args.out / f"replay_{result.condition}_{result.operator}.csv")
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "run": _cmd_run,
        "batch": _cmd_batch,
        "plot": _cmd_plot,
        "replay": _cmd_replay,
    }[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
