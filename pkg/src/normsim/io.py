"""File formats: config files in, CSV/JSON bundles out.

Config files are JSON. Metrics CSVs open with `# key=value` metadata lines —
including the full producing config — so any file can be re-run exactly.
Floats are written with 9 significant digits; absent statistics are empty
cells. Nothing time- or path-dependent goes into a file, so re-exporting the
same seed yields byte-identical output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

from ._version import __version__
from .config import Condition, ConfigError, MutationOperator, SimConfig
from .experiment import BatchResult, ConditionBatch, ExperimentSpec, norm_emergence_checks
from .metrics import CSV_COLUMNS, INT_COLUMNS, RunResult, convergence_report
from .rng import GENERATOR_ID

RUN_SCHEMA = "run-metrics-v1"
AGGREGATE_SCHEMA = "aggregate-metrics-v1"
SUMMARY_SCHEMA = "batch-summary-v1"

_SPEC_KEYS = ("replicates", "master_seed", "success_population_threshold",
              "parallelism", "conditions")


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return f"{v:.9g}"


# -- config files -------------------------------------------------------------


def parse_config(path: str | Path) -> ExperimentSpec:
    """Load an experiment spec from a JSON config file.

    Top-level keys are either experiment keys (replicates, master_seed,
    success_population_threshold, parallelism, conditions) or SimConfig
    fields. Unknown keys and out-of-range values raise ConfigError naming
    the key; syntax errors carry the line and column.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config file: {e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return spec_from_dict(data, source=str(path))


def spec_from_dict(data: dict, source: str = "<config>") -> ExperimentSpec:
    data = dict(data)
    spec_kwargs = {}
    for key in _SPEC_KEYS:
        if key in data:
            spec_kwargs[key] = data.pop(key)
    if "conditions" in spec_kwargs:
        raw = spec_kwargs["conditions"]
        if not isinstance(raw, list):
            raise ConfigError(f"{source}: conditions: expected a list of pairs")
        pairs = []
        for item in raw:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise ConfigError(
                    f"{source}: conditions: expected [condition, operator] pairs, "
                    f"got {item!r}")
            try:
                pairs.append((Condition(item[0]), MutationOperator(item[1])))
            except ValueError:
                raise ConfigError(
                    f"{source}: conditions: unknown pair {item!r}") from None
        spec_kwargs["conditions"] = tuple(pairs)
    try:
        base = SimConfig.from_dict(data)
        spec = ExperimentSpec(base=base, **spec_kwargs)
        return spec.validate()
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}") from None
    except TypeError as e:
        raise ConfigError(f"{source}: {e}") from None


# -- metrics CSV --------------------------------------------------------------


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {k}={v}" for k, v in meta.items()]


def _config_json(config: SimConfig) -> str:
    return json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))


def run_csv_lines(run: RunResult) -> list[str]:
    """The exact lines a run file contains (metadata, header, data rows)."""
    meta = {
        "schema": RUN_SCHEMA,
        "tool": f"normsim {__version__}",
        "generator": GENERATOR_ID,
        "seed": run.seed,
        "condition": run.condition,
        "operator": run.operator,
        "termination": run.termination,
    }
    if run.extinction_round is not None:
        meta["extinction_round"] = run.extinction_round
    meta["config"] = _config_json(run.config)
    lines = _meta_lines(meta)
    lines.append(",".join(CSV_COLUMNS))
    for row in run.rounds:
        d = row.as_row()
        lines.append(",".join(format_value(d[c]) for c in CSV_COLUMNS))
    return lines


def write_run_csv(run: RunResult, path: str | Path) -> Path:
    """One run, one file: metadata header, column header, one row per round."""
    path = Path(path)
    path.write_text("\n".join(run_csv_lines(run)) + "\n")
    return path


def write_aggregate_csv(group: ConditionBatch, spec: ExperimentSpec,
                        path: str | Path) -> Path:
    """Cross-run means for one condition group; extra `runs_reporting` column."""
    path = Path(path)
    meta = {
        "schema": AGGREGATE_SCHEMA,
        "tool": f"normsim {__version__}",
        "generator": GENERATOR_ID,
        "master_seed": spec.master_seed,
        "condition": group.condition.value,
        "operator": group.operator.value,
        "runs": len(group.runs),
    }
    if group.filter_threshold is not None:
        meta["filter_threshold"] = group.filter_threshold
    meta["config"] = _config_json(spec.base)
    columns = CSV_COLUMNS + ("runs_reporting",)
    lines = _meta_lines(meta)
    lines.append(",".join(columns))
    for row in group.aggregate:
        lines.append(",".join(format_value(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_metrics_csv(path: str | Path) -> tuple[dict, list[dict]]:
    """Read back a metrics CSV: (metadata dict, rows as column->value dicts).

    Empty cells come back as None; integer columns of run files as ints.
    """
    path = Path(path)
    meta: dict = {}
    data_lines: list[str] = []
    with path.open() as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition("=")
                meta[key] = value
            elif line:
                data_lines.append(line)
    if not data_lines:
        raise ConfigError(f"{path}: no column header found")
    reader = csv.reader(data_lines)
    header = next(reader)
    expected = list(CSV_COLUMNS)
    if header != expected and header != expected + ["runs_reporting"]:
        raise ConfigError(f"{path}: unexpected column header {header!r}")
    is_run = meta.get("schema", RUN_SCHEMA) == RUN_SCHEMA
    rows = []
    for rec in reader:
        row: dict = {}
        for col, cell in zip(header, rec):
            if cell == "":
                row[col] = None
            elif col in ("round", "runs_reporting") or (is_run and col in INT_COLUMNS):
                row[col] = int(cell)
            else:
                row[col] = float(cell)
        rows.append(row)
    return meta, rows


def config_from_metadata(meta: dict, source: str = "<metadata>") -> SimConfig:
    """Reconstruct the producing SimConfig from a file's metadata."""
    raw = meta.get("config")
    if not raw:
        raise ConfigError(f"{source}: no embedded config metadata")
    try:
        return SimConfig.from_dict(json.loads(raw))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: embedded config is not valid JSON: {e.msg}") from None


# -- summary JSON -------------------------------------------------------------


def summary_dict(batch: BatchResult, window: int = 50) -> dict:
    """Batch summary: per-run convergence reports plus group-level checks."""
    spec = batch.spec
    groups = []
    for g in batch.groups:
        runs = []
        for i, run in enumerate(g.runs):
            runs.append({
                "replicate": i,
                "seed": run.seed,
                "termination": run.termination,
                "extinction_round": run.extinction_round,
                "rounds": len(run.rounds) - 1,
                "final_population": run.final_population,
                "success": run.final_population > spec.success_population_threshold,
                "convergence": convergence_report(run, window=window),
            })
        groups.append({
            "condition": g.condition.value,
            "operator": g.operator.value,
            "filter_threshold": g.filter_threshold,
            "runs": runs,
            "checks": norm_emergence_checks(g, window=window),
        })
    return {
        "schema": SUMMARY_SCHEMA,
        "tool": f"normsim {__version__}",
        "generator": GENERATOR_ID,
        "master_seed": spec.master_seed,
        "replicates": spec.replicates,
        "success_population_threshold": spec.success_population_threshold,
        "base_config": spec.base.to_dict(),
        "groups": groups,
    }


def write_summary_json(batch: BatchResult, path: str | Path, window: int = 50) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary_dict(batch, window=window),
                               indent=2, sort_keys=True) + "\n")
    return path


# -- bundle layout -------------------------------------------------------------


def run_csv_name(group: ConditionBatch, index: int) -> str:
    return f"run_{group.label}_{index:03d}.csv"


def write_batch_bundle(batch: BatchResult, out_dir: str | Path,
                       window: int = 50) -> list[Path]:
    """Write per-run CSVs, one aggregate CSV per group, and summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for g in batch.groups:
        for i, run in enumerate(g.runs):
            written.append(write_run_csv(run, out / run_csv_name(g, i)))
        written.append(
            write_aggregate_csv(g, batch.spec, out / f"aggregate_{g.label}.csv"))
    written.append(write_summary_json(batch, out / "summary.json", window=window))
    return written
