"""Genome mutation operators.

Two operators are supported: the intended zero-mean Gaussian perturbation,
and the legacy operator that (through a swapped clamp) used to overwrite a
triggered gene with exactly 1.0.  Both are first-class so their population
dynamics can be compared directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import MutationOperator
from .model import GENE_ORDER, Genome, clamp01
from .rng import RandomStream


@dataclass(frozen=True)
class MutationParams:
    probability_per_gene: float = 0.1
    variance: float = 0.1
    operator: MutationOperator = MutationOperator.GAUSSIAN
    variance_is_sd: bool = False

    @property
    def sd(self) -> float:
        return self.variance if self.variance_is_sd else self.variance ** 0.5


def heritable_genes(active_noise: tuple[bool, bool, bool]) -> tuple[str, ...]:
    """Genes subject to mutation: the three traits, plus each active noise gene.

    Inactive noise genes are inert — never mutated, no trigger draw consumed —
    so a run with noise disabled consumes exactly the deterministic-condition
    stream.
    """
    names = list(GENE_ORDER[:3])
    names.extend(g for g, on in zip(GENE_ORDER[3:], active_noise) if on)
    return tuple(names)


def mutate_genome(
    genome: Genome,
    params: MutationParams,
    active_noise: tuple[bool, bool, bool],
    rng: RandomStream,
) -> Genome:
    """Return the child genome for a reproduction event.

    Each heritable gene independently triggers with ``probability_per_gene``
    (one uniform consumed per heritable gene, in GENE_ORDER, so replays are
    stable). A triggered gene is either perturbed by a 0-mean Gaussian and
    clamped to [0, 1], or set to exactly 1.0 under the legacy operator.
    With probability 0 the result is the parent genome, unchanged.
    """
    values = list(genome.as_tuple())
    legacy = params.operator is MutationOperator.LEGACY_SET_TO_ONE
    p = params.probability_per_gene
    sd = params.sd
    for gi in range(6):
        if gi >= 3 and not active_noise[gi - 3]:
            continue
        if not rng.chance(p):
            continue
        if legacy:
            values[gi] = 1.0
        else:
            values[gi] = clamp01(values[gi] + rng.gaussian(0.0, sd))
    return Genome(*values)
