"""Domain state: genomes, agents, the shared world, per-round accounting."""

from __future__ import annotations

from dataclasses import dataclass, field


def clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


# Heritable genes, in the order mutation draws are consumed.
GENE_ORDER = (
    "bite_size",
    "sanction_threshold",
    "sanction_strength",
    "bite_noise",
    "threshold_noise",
    "strength_noise",
)


@dataclass(frozen=True, slots=True)
class Genome:
    """Six genes in [0, 1]: three behaviour traits and their noise widths."""

    bite_size: float
    sanction_threshold: float
    sanction_strength: float
    bite_noise: float = 0.0
    threshold_noise: float = 0.0
    strength_noise: float = 0.0

    def as_tuple(self) -> tuple[float, ...]:
        return (self.bite_size, self.sanction_threshold, self.sanction_strength,
                self.bite_noise, self.threshold_noise, self.strength_noise)


@dataclass(slots=True)
class Agent:
    """One individual. `consumed_this_round` is what observers get to see."""

    id: int
    genome: Genome
    energy: float
    consumed_this_round: float = 0.0


@dataclass(slots=True)
class RoundAccounting:
    """Flow totals for the round in progress; reset at the top of each round."""

    total_consumed: float = 0.0
    sanction_damage: float = 0.0
    sanction_cost: float = 0.0
    births: int = 0
    deaths: int = 0
    starved_eats: int = 0      # eat turns that found the resource already empty
    removed_energy: float = 0.0  # residual (negative) energy carried out by deaths

    def reset(self) -> None:
        self.total_consumed = 0.0
        self.sanction_damage = 0.0
        self.sanction_cost = 0.0
        self.births = 0
        self.deaths = 0
        self.starved_eats = 0
        self.removed_energy = 0.0


@dataclass
class World:
    """Shared resource plus the living population.

    Agent ids are assigned from `next_id`, monotonically, never reused within
    a run. `agents` stays in insertion order; per-round turn order is a
    separate shuffled view.
    """

    resource: float
    agents: list[Agent]
    round: int = 0
    next_id: int = 0
    accounting: RoundAccounting = field(default_factory=RoundAccounting)

    @property
    def population(self) -> int:
        return len(self.agents)
