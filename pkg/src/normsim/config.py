"""Run configuration: every knob of a single simulation run.

A populated :class:`SimConfig` plus its seed fully determines a run; configs
round-trip through ``to_dict``/``from_dict`` so output files can embed enough
metadata to re-run themselves exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum


class Condition(str, Enum):
    """Behavioural regime: act on genome values directly, or on noisy draws."""

    DETERMINISTIC = "deterministic"
    PROBABILISTIC = "probabilistic"


class MutationOperator(str, Enum):
    """Gaussian perturbation (intended operator) or the legacy set-to-1.0 bug."""

    GAUSSIAN = "gaussian"
    LEGACY_SET_TO_ONE = "legacy_set_to_one"


class ConfigError(ValueError):
    """A configuration value or file failed validation."""


def _coerce(enum_cls, value, field_name):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise ConfigError(f"{field_name}: unknown value {value!r} (allowed: {allowed})") from None


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation run.

    Defaults reproduce the reference setup: 100 agents on a resource of 1000
    regrowing 100 per round, metabolism 0.01, sanction cost factor 0.1,
    observation window 10, reproduction above energy 10, death below 0,
    per-gene mutation probability 0.1 with variance 0.1.
    """

    initial_agents: int = 100
    initial_resource: float = 1000.0
    initial_energy: float = 10.0
    trait_init_range: tuple[float, float] = (0.0, 1.0)
    noise_init_range: tuple[float, float] = (0.0, 0.5)
    regrowth_per_round: float = 100.0
    metabolism_per_round: float = 0.01
    sanction_cost_factor: float = 0.1
    observation_window: int = 10
    reproduction_threshold: float = 10.0  # strict >
    death_threshold: float = 0.0          # strict <
    mutation_probability: float = 0.1
    mutation_variance: float = 0.1
    # When True, mutation_variance is read as a standard deviation instead
    # (sensitivity knob for the ambiguous "0.1 variance" convention).
    mutation_variance_is_sd: bool = False
    condition: Condition = Condition.DETERMINISTIC
    mutation_operator: MutationOperator = MutationOperator.GAUSSIAN
    # Per-trait switches for behavioural noise (bite, threshold, strength).
    # Only consulted in the probabilistic condition.
    noise_enabled_per_trait: tuple[bool, bool, bool] = (True, True, True)
    max_rounds: int = 500
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "condition", _coerce(Condition, self.condition, "condition"))
        object.__setattr__(
            self, "mutation_operator",
            _coerce(MutationOperator, self.mutation_operator, "mutation_operator"),
        )
        for name in ("trait_init_range", "noise_init_range", "noise_enabled_per_trait"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    # -- validation ----------------------------------------------------------

    def validate(self) -> "SimConfig":
        """Raise ConfigError naming the offending field; return self if fine."""
        if self.initial_agents < 1:
            raise ConfigError(f"initial_agents: must be >= 1, got {self.initial_agents}")
        if self.initial_resource < 0:
            raise ConfigError(f"initial_resource: must be >= 0, got {self.initial_resource}")
        for name in ("trait_init_range", "noise_init_range"):
            rng_ = getattr(self, name)
            if len(rng_) != 2:
                raise ConfigError(f"{name}: expected [lo, hi], got {rng_!r}")
            lo, hi = rng_
            if lo > hi:
                raise ConfigError(f"{name}: inverted range [{lo}, {hi}]")
            if lo < 0.0 or hi > 1.0:
                raise ConfigError(f"{name}: must lie within [0, 1], got [{lo}, {hi}]")
        for name in ("regrowth_per_round", "metabolism_per_round", "sanction_cost_factor",
                     "mutation_variance"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be >= 0, got {getattr(self, name)}")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ConfigError(
                f"mutation_probability: must be in [0, 1], got {self.mutation_probability}")
        if self.observation_window < 0:
            raise ConfigError(f"observation_window: must be >= 0, got {self.observation_window}")
        if self.max_rounds < 0:
            raise ConfigError(f"max_rounds: must be >= 0, got {self.max_rounds}")
        if len(self.noise_enabled_per_trait) != 3:
            raise ConfigError("noise_enabled_per_trait: expected three booleans")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {self.seed}")
        return self

    # -- derived views -------------------------------------------------------

    def active_noise(self) -> tuple[bool, bool, bool]:
        """Which of (bite, threshold, strength) actually carry noise.

        The deterministic condition is exactly the probabilistic one with all
        three switched off: noise genes init to 0, draws return the trait
        value, and noise genes are not heritable.
        """
        if self.condition is Condition.DETERMINISTIC:
            return (False, False, False)
        return self.noise_enabled_per_trait

    def mutation_sd(self) -> float:
        if self.mutation_variance_is_sd:
            return self.mutation_variance
        return self.mutation_variance ** 0.5

    # -- (de)serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["condition"] = self.condition.value
        d["mutation_operator"] = self.mutation_operator.value
        d["trait_init_range"] = list(self.trait_init_range)
        d["noise_init_range"] = list(self.noise_init_range)
        d["noise_enabled_per_trait"] = list(self.noise_enabled_per_trait)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        try:
            cfg = cls(**data)
        except TypeError as e:
            raise ConfigError(str(e)) from None
        return cfg.validate()
