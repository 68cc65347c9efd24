"""The simulation engine: world setup, the round loop, whole runs.

Round phases, in order:

1. draw a fresh uniform turn order;
2. each agent, in that order, eats and then sanctions: it observes the
   amounts actually consumed this round by up to `observation_window`
   agents immediately before it in the order (most recent first, no
   wrap-around) and hits every target that consumed strictly more than its
   own (effective) threshold, paying a fraction of the strength as cost;
3. every agent pays metabolism;
4. agents strictly below the death threshold are removed;
5. every survivor strictly above the reproduction threshold reproduces
   once: the child gets a mutated genome and both end up with half the
   parent's pre-split energy (children are inert until next round);
6. the resource regrows;
7. the round counter advances and a metrics row is taken.

Agents keep acting for the whole turn phase even if sanctions push their
energy negative mid-round; removal only happens in phase 4. The eat rule is
partial consumption: an agent takes min(effective bite, what is left).
"""

from __future__ import annotations

from enum import Enum

from .config import SimConfig
from .metrics import RoundMetrics, RunResult, snapshot
from .model import Agent, Genome, World, clamp01
from .mutation import MutationParams, mutate_genome
from .rng import RandomStream


class Trait(Enum):
    """Selector for the three behaviour traits and their noise genes."""

    BITE = ("bite_size", "bite_noise")
    THRESHOLD = ("sanction_threshold", "threshold_noise")
    STRENGTH = ("sanction_strength", "strength_noise")


def draw_effective_behavior(
    genome: Genome, trait: Trait, rng: RandomStream, enabled: bool = True
) -> float:
    """Value an agent acts on: Normal(trait, noise) clamped to [0, 1].

    With the noise gene at 0 (or the trait's noise disabled) this is the
    trait value exactly, and nothing is consumed from the stream.
    """
    value_attr, noise_attr = trait.value
    value = getattr(genome, value_attr)
    noise = getattr(genome, noise_attr) if enabled else 0.0
    if noise == 0.0:
        return value
    return clamp01(rng.gaussian(value, noise))


def eat_turn(agent: Agent, world: World, effective_bite: float) -> float:
    """Consume min(effective_bite, resource); returns the amount consumed.

    An empty resource yields nothing (recorded as a starved eat). The
    consumed amount is what later agents in the round get to observe.
    """
    resource = world.resource
    acct = world.accounting
    if resource <= 0.0:
        agent.consumed_this_round = 0.0
        acct.starved_eats += 1
        return 0.0
    consumed = effective_bite if effective_bite < resource else resource
    world.resource = resource - consumed
    agent.energy += consumed
    agent.consumed_this_round = consumed
    acct.total_consumed += consumed
    return consumed


def sanction_turn(
    agent: Agent,
    window: list[tuple[Agent, float]],
    rng: RandomStream,
    world: World,
    *,
    cost_factor: float = 0.1,
    threshold_noise: bool = True,
    strength_noise: bool = True,
) -> int:
    """Judge every (target, consumed) pair in the window; return sanctions dealt.

    The effective threshold is drawn once per window entry, the effective
    strength once per executed sanction. A target is hit when it consumed
    strictly more than the effective threshold: it loses the effective
    strength, the sanctioner pays cost_factor times that. Self-judgement
    never happens because an agent is not in its own window.
    """
    genome = agent.genome
    thr = genome.sanction_threshold
    tn = genome.threshold_noise if threshold_noise else 0.0
    executed = 0
    acct = world.accounting
    for target, consumed in window:
        t_eff = thr if tn == 0.0 else clamp01(rng.gaussian(thr, tn))
        if consumed > t_eff:
            s_eff = draw_effective_behavior(genome, Trait.STRENGTH, rng, strength_noise)
            target.energy -= s_eff
            cost = cost_factor * s_eff
            agent.energy -= cost
            acct.sanction_damage += s_eff
            acct.sanction_cost += cost
            executed += 1
    return executed


def init_world(config: SimConfig, rng: RandomStream) -> World:
    """Fresh world: full resource, agents with uniform genomes at initial energy.

    Per agent the draws are B, T, S over trait_init_range, then one draw per
    *active* noise gene over noise_init_range; inactive noise genes are 0 and
    consume nothing.
    """
    config.validate()
    lo, hi = config.trait_init_range
    nlo, nhi = config.noise_init_range
    noise_on = config.active_noise()
    energy = float(config.initial_energy)
    agents = []
    for i in range(config.initial_agents):
        b = rng.uniform(lo, hi)
        t = rng.uniform(lo, hi)
        s = rng.uniform(lo, hi)
        bn = rng.uniform(nlo, nhi) if noise_on[0] else 0.0
        tn = rng.uniform(nlo, nhi) if noise_on[1] else 0.0
        sn = rng.uniform(nlo, nhi) if noise_on[2] else 0.0
        agents.append(Agent(id=i, genome=Genome(b, t, s, bn, tn, sn), energy=energy))
    return World(
        resource=float(config.initial_resource),
        agents=agents,
        next_id=config.initial_agents,
    )


def step_round(world: World, config: SimConfig, rng: RandomStream) -> RoundMetrics:
    """Advance the world by one full round and return its metrics row."""
    agents = world.agents
    acct = world.accounting
    acct.reset()

    noise_b, noise_t, noise_s = config.active_noise()
    wnd = config.observation_window
    cost_factor = config.sanction_cost_factor

    # Phase 1-2: turn order, then eat + sanction per agent.
    order = rng.shuffle(agents)
    for a in order:
        a.consumed_this_round = 0.0
    for k, actor in enumerate(order):
        genome = actor.genome
        if noise_b and genome.bite_noise != 0.0:
            bite = draw_effective_behavior(genome, Trait.BITE, rng)
        else:
            bite = genome.bite_size
        eat_turn(actor, world, bite)
        if k == 0 or wnd == 0:
            continue
        lo = k - wnd if k > wnd else 0
        window = [
            (t, t.consumed_this_round)
            for t in (order[j] for j in range(k - 1, lo - 1, -1))
        ]
        sanction_turn(
            actor, window, rng, world,
            cost_factor=cost_factor,
            threshold_noise=noise_t,
            strength_noise=noise_s,
        )

    # Phase 3: metabolism for everyone who was in the round.
    m = config.metabolism_per_round
    for a in agents:
        a.energy -= m

    # Phase 4: deaths (strictly below the threshold); residual energy leaves
    # the system and is tracked for the conservation ledger.
    dt = config.death_threshold
    survivors = []
    for a in agents:
        if a.energy < dt:
            acct.deaths += 1
            acct.removed_energy += a.energy
        else:
            survivors.append(a)

    # Phase 5: reproduction, one pass over survivors in stable list order.
    # Children do not act, die, or reproduce this round.
    rt = config.reproduction_threshold
    params = MutationParams(
        probability_per_gene=config.mutation_probability,
        variance=config.mutation_variance,
        operator=config.mutation_operator,
        variance_is_sd=config.mutation_variance_is_sd,
    )
    active = (noise_b, noise_t, noise_s)
    children = []
    next_id = world.next_id
    for a in survivors:
        if a.energy > rt:
            child_genome = mutate_genome(a.genome, params, active, rng)
            half = a.energy / 2.0
            a.energy = half
            children.append(Agent(id=next_id, genome=child_genome, energy=half))
            next_id += 1
            acct.births += 1
    world.next_id = next_id
    world.agents = survivors + children if children else survivors

    # Phase 6-7: regrowth, advance the clock, snapshot.
    world.resource += config.regrowth_per_round
    world.round += 1
    return snapshot(world)


def run_simulation(config: SimConfig) -> RunResult:
    """Run to max_rounds (or extinction) from the config's seed.

    The result carries one row per executed round plus the initial snapshot,
    so a completed run has max_rounds + 1 rows.
    """
    config.validate()
    rng = RandomStream(config.seed)
    world = init_world(config, rng)
    rows = [snapshot(world)]
    termination = "completed"
    extinction_round = None
    while world.round < config.max_rounds:
        rows.append(step_round(world, config, rng))
        if not world.agents:
            termination = "extinction"
            extinction_round = world.round
            break
    return RunResult(
        config=config,
        rounds=rows,
        termination=termination,
        extinction_round=extinction_round,
    )
