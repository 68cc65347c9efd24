"""Replicated experiments: seed fan-out, batch execution, aggregation.

A batch is a pure function of its :class:`ExperimentSpec` — the parallelism
degree changes wall-clock time, never results. Replicate i always runs on
the substream derived from (master_seed, i), so any single run can be
reproduced in isolation; the same replicate seed is shared across condition
groups, which pairs them for comparisons.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .config import Condition, ConfigError, MutationOperator, SimConfig
from .engine import run_simulation
from .metrics import CSV_COLUMNS, RunResult
from .rng import derive_seed

DEFAULT_SUCCESS_THRESHOLD = 1000


@dataclass(frozen=True)
class ExperimentSpec:
    base: SimConfig = field(default_factory=SimConfig)
    replicates: int = 1
    master_seed: int = 0
    # (condition, operator) pairs; empty means "whatever the base config says".
    conditions: tuple[tuple[Condition, MutationOperator], ...] = ()
    # A run counts as successful when its final population strictly exceeds this.
    success_population_threshold: int = DEFAULT_SUCCESS_THRESHOLD
    parallelism: int = 1

    def resolved_conditions(self) -> tuple[tuple[Condition, MutationOperator], ...]:
        if self.conditions:
            return self.conditions
        return ((self.base.condition, self.base.mutation_operator),)

    def validate(self) -> "ExperimentSpec":
        self.base.validate()
        if self.replicates < 1:
            raise ConfigError(f"replicates: must be >= 1, got {self.replicates}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism: must be >= 1, got {self.parallelism}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed: must be a 64-bit unsigned integer, "
                              f"got {self.master_seed}")
        if self.success_population_threshold < 0:
            raise ConfigError("success_population_threshold: must be >= 0")
        seen = set()
        for pair in self.resolved_conditions():
            if len(pair) != 2:
                raise ConfigError(f"conditions: expected [condition, operator] pairs, "
                                  f"got {pair!r}")
            if pair in seen:
                raise ConfigError(f"conditions: duplicate pair {pair!r}")
            seen.add(pair)
        return self

    def run_configs(self, condition: Condition, operator: MutationOperator) -> list[SimConfig]:
        return [
            replace(
                self.base,
                condition=condition,
                mutation_operator=operator,
                seed=derive_seed(self.master_seed, i),
            )
            for i in range(self.replicates)
        ]


@dataclass
class ConditionBatch:
    """All replicates of one (condition, operator) pair, plus cross-run views."""

    condition: Condition
    operator: MutationOperator
    runs: list[RunResult]
    success: list[bool]
    aggregate: list[dict]
    filter_threshold: Optional[int] = None  # set when this group was filtered

    @property
    def label(self) -> str:
        return f"{self.condition.value}_{self.operator.value}"


@dataclass
class BatchResult:
    spec: ExperimentSpec
    groups: list[ConditionBatch]

    def group(self, condition, operator) -> ConditionBatch:
        condition = Condition(condition)
        operator = MutationOperator(operator)
        for g in self.groups:
            if g.condition is condition and g.operator is operator:
                return g
        raise KeyError(f"no group {condition.value}/{operator.value} in batch")


def aggregate_dict_rows(runs_rows: list[list[dict]]) -> list[dict]:
    """Per-round cross-run means over already-extracted row dicts.

    At each round index only runs that still have a row there contribute, and
    within those a column ignores absent values. Every aggregate row carries
    `runs_reporting`, the number of contributing runs. Count columns
    (population, births, ...) become float means here.
    """
    if not runs_rows:
        return []
    out = []
    max_len = max(len(rows) for rows in runs_rows)
    for idx in range(max_len):
        rows = [rr[idx] for rr in runs_rows if len(rr) > idx]
        agg: dict = {"round": idx, "runs_reporting": len(rows)}
        for col in CSV_COLUMNS[1:]:
            vals = [v for row in rows if (v := row[col]) is not None]
            agg[col] = float(np.mean(vals)) if vals else None
        out.append(agg)
    return out


def aggregate_rows(runs: list[RunResult]) -> list[dict]:
    """Per-round cross-run means of every metrics column (see above)."""
    return aggregate_dict_rows([[row.as_row() for row in r.rounds] for r in runs])


def _successes(runs: list[RunResult], threshold: int) -> list[bool]:
    return [r.final_population > threshold for r in runs]


def run_batch(spec: ExperimentSpec) -> BatchResult:
    """Execute every (condition, operator) group of the spec.

    With parallelism > 1 runs execute in a process pool; results are
    collected in submission order and are byte-for-byte the same as a serial
    execution.
    """
    spec.validate()
    pairs = spec.resolved_conditions()
    configs: list[SimConfig] = []
    for condition, operator in pairs:
        configs.extend(spec.run_configs(condition, operator))

    if spec.parallelism > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
            results = list(pool.map(run_simulation, configs))
    else:
        results = [run_simulation(c) for c in configs]

    groups = []
    for gi, (condition, operator) in enumerate(pairs):
        runs = results[gi * spec.replicates:(gi + 1) * spec.replicates]
        groups.append(
            ConditionBatch(
                condition=condition,
                operator=operator,
                runs=runs,
                success=_successes(runs, spec.success_population_threshold),
                aggregate=aggregate_rows(runs),
            )
        )
    return BatchResult(spec=spec, groups=groups)


def filter_successful(batch: BatchResult, threshold: Optional[int] = None) -> BatchResult:
    """Keep only runs whose final population strictly exceeds the threshold.

    Aggregates are recomputed from the survivors. A group can come out empty;
    that is flagged by `filter_threshold` plus an empty run list, not an
    error.
    """
    if threshold is None:
        threshold = batch.spec.success_population_threshold
    groups = []
    for g in batch.groups:
        kept = [r for r in g.runs if r.final_population > threshold]
        groups.append(
            ConditionBatch(
                condition=g.condition,
                operator=g.operator,
                runs=kept,
                success=[True] * len(kept),
                aggregate=aggregate_rows(kept),
                filter_threshold=threshold,
            )
        )
    return BatchResult(spec=batch.spec, groups=groups)


def norm_emergence_checks(group: ConditionBatch, window: int = 50) -> dict:
    """Batch-level emergence diagnostics, also used as acceptance gates.

    variance_halved: per run, is the mean bite-size variance over the final
    `window` rounds strictly below half the variance at round 1? Passes when
    at least 80% of evaluable runs halved. dispersion: population standard
    deviation, across runs, of the final-window mean bite size; passes when
    it strictly exceeds 0.02 (settled norms differ per run). Fields are None
    when too little data exists to evaluate.
    """
    halved = []
    settled_means = []
    for run in group.runs:
        rows = run.rounds
        if len(rows) < 2:
            continue
        v1 = rows[1].var_B
        tail = rows[-window:]
        tail_vars = [v for r in tail if (v := r.var_B) is not None]
        tail_means = [m for r in tail if (m := r.mean_B) is not None]
        if v1 is not None and tail_vars:
            halved.append(float(np.mean(tail_vars)) < 0.5 * v1)
        if tail_means:
            settled_means.append(float(np.mean(tail_means)))
    fraction = float(np.mean(halved)) if halved else None
    dispersion = float(np.std(settled_means)) if len(settled_means) >= 2 else None
    return {
        "window": window,
        "runs_evaluated": len(halved),
        "variance_halved_fraction": fraction,
        "variance_halved_pass": None if fraction is None else fraction >= 0.8,
        "settled_bite_dispersion": dispersion,
        "dispersion_pass": None if dispersion is None else dispersion > 0.02,
    }
