"""normsim: evolutionary simulation of norm emergence on a shared resource.

Agents draw bites from a common renewable resource and sanction observed
over-consumption; reproduction with mutation makes consumption norms evolve.
Runs are deterministic by seed, replicated experiments fan out over derived
substreams, and results export as metrics CSVs plus vector figures.
"""

from ._version import __version__
from .config import Condition, ConfigError, MutationOperator, SimConfig
from .engine import (
    Trait,
    draw_effective_behavior,
    eat_turn,
    init_world,
    run_simulation,
    sanction_turn,
    step_round,
)
from .experiment import (
    BatchResult,
    ConditionBatch,
    ExperimentSpec,
    filter_successful,
    norm_emergence_checks,
    run_batch,
)
from .io import (
    parse_config,
    read_metrics_csv,
    write_batch_bundle,
    write_run_csv,
    write_summary_json,
)
from .metrics import (
    CSV_COLUMNS,
    RoundMetrics,
    RunResult,
    convergence_report,
    hypocrite_fraction,
    sanction_energy,
    trait_variance,
)
from .model import Agent, Genome, RoundAccounting, World, clamp01
from .mutation import MutationParams, heritable_genes, mutate_genome
from .plots import emit_plots
from .rng import GENERATOR_ID, RandomStream, derive_seed, substream

__all__ = [
    "__version__",
    "Agent",
    "BatchResult",
    "Condition",
    "ConditionBatch",
    "ConfigError",
    "CSV_COLUMNS",
    "ExperimentSpec",
    "GENERATOR_ID",
    "Genome",
    "MutationOperator",
    "MutationParams",
    "RandomStream",
    "RoundAccounting",
    "RoundMetrics",
    "RunResult",
    "SimConfig",
    "Trait",
    "World",
    "clamp01",
    "convergence_report",
    "derive_seed",
    "draw_effective_behavior",
    "eat_turn",
    "emit_plots",
    "filter_successful",
    "heritable_genes",
    "hypocrite_fraction",
    "init_world",
    "mutate_genome",
    "norm_emergence_checks",
    "parse_config",
    "read_metrics_csv",
    "run_batch",
    "run_simulation",
    "sanction_energy",
    "sanction_turn",
    "step_round",
    "substream",
    "trait_variance",
    "write_batch_bundle",
    "write_run_csv",
    "write_summary_json",
]
