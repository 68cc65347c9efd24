"""Per-round observables and whole-run results.

`RoundMetrics` fixes the exported column schema. Population statistics use
the population variance (divide by N). With an empty population every
statistic is absent (`None`), which serialises to an empty CSV cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import SimConfig
from .model import Agent, RoundAccounting, World

# Column order of every metrics CSV. Trait shorthands: B bite size,
# T sanction threshold, S sanction strength, *N the matching noise gene.
CSV_COLUMNS = (
    "round", "population", "resource",
    "mean_B", "var_B", "mean_T", "var_T", "mean_S", "var_S",
    "mean_BN", "var_BN", "mean_TN", "var_TN", "mean_SN", "var_SN",
    "hypocrite_fraction", "sanction_damage", "sanction_cost",
    "births", "deaths", "total_consumed",
)

INT_COLUMNS = frozenset({"round", "population", "births", "deaths"})

# (mean column, var column, genome attribute)
TRAIT_COLUMNS = (
    ("mean_B", "var_B", "bite_size"),
    ("mean_T", "var_T", "sanction_threshold"),
    ("mean_S", "var_S", "sanction_strength"),
    ("mean_BN", "var_BN", "bite_noise"),
    ("mean_TN", "var_TN", "threshold_noise"),
    ("mean_SN", "var_SN", "strength_noise"),
)


def trait_mean(values: list[float]) -> Optional[float]:
    if not values:
        return None
    return float(np.mean(values))


def trait_variance(values: list[float]) -> Optional[float]:
    """Population variance (divide by N); None for an empty list."""
    if not values:
        return None
    return float(np.var(values))


def hypocrite_fraction(agents: list[Agent]) -> Optional[float]:
    """Fraction whose genome would eat more than it tolerates in others.

    Strict comparison on genome values (bite_size > sanction_threshold);
    ties are not hypocrisy. None for an empty population.
    """
    if not agents:
        return None
    n = 0
    for a in agents:
        if a.genome.bite_size > a.genome.sanction_threshold:
            n += 1
    return n / len(agents)


def sanction_energy(accounting: RoundAccounting) -> tuple[float, float]:
    """(damage dealt to targets, cost paid by sanctioners) this round."""
    return accounting.sanction_damage, accounting.sanction_cost


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    population: int
    resource: float
    mean_B: Optional[float]
    var_B: Optional[float]
    mean_T: Optional[float]
    var_T: Optional[float]
    mean_S: Optional[float]
    var_S: Optional[float]
    mean_BN: Optional[float]
    var_BN: Optional[float]
    mean_TN: Optional[float]
    var_TN: Optional[float]
    mean_SN: Optional[float]
    var_SN: Optional[float]
    hypocrite_fraction: Optional[float]
    sanction_damage: float
    sanction_cost: float
    births: int
    deaths: int
    total_consumed: float

    def as_row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def snapshot(world: World) -> RoundMetrics:
    """Metrics of the world as it stands, paired with its current accounting.

    Taken after a round completes (or at round 0 with zeroed accounting).
    """
    agents = world.agents
    n = len(agents)
    acct = world.accounting
    stats: dict[str, Optional[float]] = {}
    if n:
        genomes = [a.genome for a in agents]
        for mean_col, var_col, attr in TRAIT_COLUMNS:
            arr = np.fromiter((getattr(g, attr) for g in genomes), dtype=float, count=n)
            stats[mean_col] = float(arr.mean())
            stats[var_col] = float(arr.var())
    else:
        for mean_col, var_col, _ in TRAIT_COLUMNS:
            stats[mean_col] = None
            stats[var_col] = None
    return RoundMetrics(
        round=world.round,
        population=n,
        resource=world.resource,
        hypocrite_fraction=hypocrite_fraction(agents),
        sanction_damage=acct.sanction_damage,
        sanction_cost=acct.sanction_cost,
        births=acct.births,
        deaths=acct.deaths,
        total_consumed=acct.total_consumed,
        **stats,
    )


@dataclass
class RunResult:
    """Everything one run produced: config echo plus one row per round.

    `rounds[0]` is the initial snapshot; a completed run has
    ``config.max_rounds + 1`` rows, an extinct run stops at the round the
    population emptied.
    """

    config: SimConfig
    rounds: list[RoundMetrics] = field(default_factory=list)
    termination: str = "completed"  # "completed" | "extinction"
    extinction_round: Optional[int] = None

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def condition(self) -> str:
        return self.config.condition.value

    @property
    def operator(self) -> str:
        return self.config.mutation_operator.value

    @property
    def final_population(self) -> int:
        return self.rounds[-1].population if self.rounds else 0


def convergence_report(run: RunResult, window: int = 50) -> dict:
    """Summarise whether each trait settled.

    For every trait: variance at round 0, mean variance over the final
    `window` rows, mean value over that window, and the maximum absolute
    round-to-round change of the mean within it. Absent entries (empty
    population) are skipped; a run shorter than the window is reported with
    ``truncated: true``.
    """
    rows = run.rounds
    tail = rows[-window:] if window > 0 else []
    report: dict = {
        "window": window,
        "truncated": len(rows) < window + 1,
        "traits": {},
    }
    first = rows[0] if rows else None
    for mean_col, var_col, attr in TRAIT_COLUMNS:
        means = [getattr(r, mean_col) for r in tail]
        variances = [v for r in tail if (v := getattr(r, var_col)) is not None]
        present = [m for m in means if m is not None]
        slopes = [
            abs(b - a)
            for a, b in zip(means, means[1:])
            if a is not None and b is not None
        ]
        report["traits"][attr] = {
            "initial_variance": getattr(first, var_col) if first else None,
            "final_window_variance": float(np.mean(variances)) if variances else None,
            "final_window_mean": float(np.mean(present)) if present else None,
            "max_abs_slope": max(slopes) if slopes else None,
        }
    return report
