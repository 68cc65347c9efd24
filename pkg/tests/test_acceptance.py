"""Acceptance gates: exact traces, determinism, and batch-level dynamics.

Each test pins one user-facing guarantee of the simulator, from hand-derived
single-agent arithmetic up to 20-replicate ensemble behaviour. Batch fixtures
are module-scoped because the deterministic 500-round runs dominate the
suite's wall-clock budget. Every threshold is a named constant; statistical
gates run on frozen master seeds, so they are deterministic pass/fail, with
the margins noted next to each constant.
"""

import math
import statistics
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate, stats

from normsim.config import Condition, MutationOperator, SimConfig
from normsim.engine import Trait, draw_effective_behavior, init_world, run_simulation, step_round
from normsim.experiment import ExperimentSpec, norm_emergence_checks, run_batch
from normsim.io import run_csv_name, write_batch_bundle
from normsim.model import Agent, Genome, World
from normsim.mutation import MutationParams, mutate_genome
from normsim.rng import RandomStream, derive_seed

DET, PROB = Condition.DETERMINISTIC, Condition.PROBABILISTIC
GAUSS, LEGACY = MutationOperator.GAUSSIAN, MutationOperator.LEGACY_SET_TO_ONE

# Frozen batch parameters. The masters were chosen once, ahead of writing the
# gates below, and all statistics were measured there; they are not tuned per
# assertion.
MASTER_GAUSS = 101
MASTER_LEGACY = 102
MASTER_NOISE = 103
REPLICATES = 20
ROUNDS = 500
NOISE_ROUNDS = 1000

EXACT_TOL = 1e-12           # hand-traced arithmetic
LEDGER_REL_TOL = 1e-9       # per-round conservation ledgers
FINAL_WINDOW = 50           # "settled" statistics use the last 50 rounds

VARIANCE_HALVED_MIN = 0.8   # measured 1.00
DISPERSION_MIN = 0.02       # measured 0.098
POP_RATIO_MIN = 10.0        # measured ~1350x
SUCCESS_POP = 1000          # "successful run" population bar
HYP_DET_MAX = 0.02          # measured 0.007
HYP_PROB_BAND = (0.01, 0.2)  # measured 0.063
DECAY_EARLY_WINDOW = 100    # early-peak search range (rounds 1..100)
DECAY_LATE_WINDOW = 100
DECAY_MAX_RATIO = 0.25
DECAY_MIN_FRACTION = 0.8    # measured 0.85
PERCAP_DET_MAX = 0.05       # measured 0.0040
PERCAP_PROB_MIN = 0.05      # measured 0.167
NOISE_FLOOR = 0.1           # measured ensemble means 0.236 / 0.289 / 0.280
MIN_SURVIVORS = 15          # measured 20/20

TRIGGER_RATE_TOL = 0.003    # ~3 standard errors at n = 1e5
SHUFFLE_TOL = 0.01


# -- shared batches ------------------------------------------------------------


def _batch(master, conditions, rounds):
    spec = ExperimentSpec(
        base=SimConfig(max_rounds=rounds),
        replicates=REPLICATES,
        master_seed=master,
        conditions=conditions,
        success_population_threshold=SUCCESS_POP,
    )
    return run_batch(spec)


@pytest.fixture(scope="module")
def gauss_batch():
    return _batch(MASTER_GAUSS, ((DET, GAUSS), (PROB, GAUSS)), ROUNDS)


@pytest.fixture(scope="module")
def legacy_batch():
    return _batch(MASTER_LEGACY, ((DET, LEGACY), (PROB, LEGACY)), ROUNDS)


@pytest.fixture(scope="module")
def noise_batch():
    return _batch(MASTER_NOISE, ((PROB, GAUSS),), NOISE_ROUNDS)


def final_window(run, n=FINAL_WINDOW):
    return run.rounds[-n:]


def survivors(group):
    return [r for r in group.runs if r.final_population > 0]


# -- 1. exact single-agent trace -------------------------------------------------


def test_single_agent_trace_exact():
    """One noiseless agent, mutation off: the first round is pure arithmetic.

    eat 0.5 -> 10.5; metabolise 0.01 -> 10.49; above 10 so it splits into
    5.245 + 5.245; resource 1000 - 0.5 + 100 = 1099.5. Round two: both eat
    and metabolise to 5.735, resource 1198.5.
    """
    cfg = SimConfig(condition=DET, mutation_probability=0.0, seed=1)
    world = World(
        resource=1000.0,
        agents=[Agent(id=0, genome=Genome(0.5, 0.6, 0.7), energy=10.0)],
        next_id=1,
    )
    rng = RandomStream(cfg.seed)

    r1 = step_round(world, cfg, rng)
    assert r1.population == 2 and r1.births == 1
    assert [a.energy for a in world.agents] == pytest.approx([5.245, 5.245], abs=EXACT_TOL)
    assert r1.resource == pytest.approx(1099.5, abs=EXACT_TOL)
    assert r1.total_consumed == pytest.approx(0.5, abs=EXACT_TOL)

    r2 = step_round(world, cfg, rng)
    assert [a.energy for a in world.agents] == pytest.approx([5.735, 5.735], abs=EXACT_TOL)
    assert r2.resource == pytest.approx(1198.5, abs=EXACT_TOL)


# -- 2. conservation ledgers -----------------------------------------------------


@pytest.mark.parametrize("condition", [DET, PROB])
def test_energy_and_resource_ledgers_balance_full_run(condition):
    """Every round of a 500-round run balances energy, resource and headcount."""
    cfg = SimConfig(condition=condition, seed=derive_seed(MASTER_GAUSS, 0), max_rounds=ROUNDS)
    rng = RandomStream(cfg.seed)
    world = init_world(cfg, rng)
    for _ in range(ROUNDS):
        energy_before = math.fsum(a.energy for a in world.agents)
        resource_before = world.resource
        pop_before = world.population
        step_round(world, cfg, rng)
        acct = world.accounting

        expected_energy = (
            energy_before
            + acct.total_consumed
            - acct.sanction_damage
            - acct.sanction_cost
            - cfg.metabolism_per_round * pop_before
            - acct.removed_energy
        )
        energy_after = math.fsum(a.energy for a in world.agents)
        scale = max(1.0, abs(energy_before), acct.total_consumed, acct.sanction_damage)
        assert energy_after == pytest.approx(expected_energy, abs=LEDGER_REL_TOL * scale), \
            f"energy ledger broke at round {world.round}"

        expected_resource = resource_before - acct.total_consumed + cfg.regrowth_per_round
        assert world.resource == pytest.approx(
            expected_resource, abs=LEDGER_REL_TOL * max(1.0, resource_before))
        assert world.resource >= 0.0
        assert world.population == pop_before + acct.births - acct.deaths
        if not world.agents:
            break


def test_row_ledgers_hold_across_batch(gauss_batch):
    """Resource and headcount identities re-derived from exported rows alone."""
    for group in gauss_batch.groups:
        for run in group.runs:
            rows = run.rounds
            for prev, cur in zip(rows, rows[1:]):
                assert cur.resource == pytest.approx(
                    prev.resource - cur.total_consumed + 100.0,
                    abs=LEDGER_REL_TOL * max(1.0, prev.resource))
                assert cur.population == prev.population + cur.births - cur.deaths


# -- 3. byte-identical determinism ------------------------------------------------


def _bundle_bytes(spec, out_dir):
    files = write_batch_bundle(run_batch(spec), out_dir)
    return {p.name: p.read_bytes() for p in files}


def test_reruns_and_parallelism_are_byte_identical(tmp_path):
    spec = ExperimentSpec(
        base=SimConfig(max_rounds=120),
        replicates=4,
        master_seed=55,
        conditions=((DET, GAUSS), (PROB, GAUSS)),
    )
    first = _bundle_bytes(spec, tmp_path / "a")
    second = _bundle_bytes(spec, tmp_path / "b")
    pooled = _bundle_bytes(replace(spec, parallelism=8), tmp_path / "c")
    assert first == second
    assert first == pooled


# -- 4. deterministic condition is the noise-free special case --------------------


def test_noise_off_probabilistic_equals_deterministic(gauss_batch):
    det_run = gauss_batch.group(DET, GAUSS).runs[0]
    twin_cfg = replace(
        det_run.config,
        condition=PROB,
        noise_enabled_per_trait=(False, False, False),
    )
    twin = run_simulation(twin_cfg)
    assert twin.termination == det_run.termination
    assert len(twin.rounds) == len(det_run.rounds)
    for a, b in zip(det_run.rounds, twin.rounds):
        assert a.as_row() == b.as_row()


# -- 5/6. norm emergence ----------------------------------------------------------


def test_bite_variance_collapses(gauss_batch):
    """Most runs end with bite-size variance far below where round 1 started."""
    checks = norm_emergence_checks(gauss_batch.group(DET, GAUSS), window=FINAL_WINDOW)
    assert checks["runs_evaluated"] >= REPLICATES - 2
    assert checks["variance_halved_fraction"] >= VARIANCE_HALVED_MIN
    assert checks["variance_halved_pass"] is True


def test_settled_norms_differ_across_runs(gauss_batch):
    """The settled bite level is run-specific, not environmentally forced."""
    checks = norm_emergence_checks(gauss_batch.group(DET, GAUSS), window=FINAL_WINDOW)
    assert checks["settled_bite_dispersion"] > DISPERSION_MIN
    assert checks["dispersion_pass"] is True


# -- 7. population gap -------------------------------------------------------------


def test_population_gap_under_legacy_operator(legacy_batch):
    med_det = statistics.median(
        r.final_population for r in legacy_batch.group(DET, LEGACY).runs)
    med_prob = statistics.median(
        r.final_population for r in legacy_batch.group(PROB, LEGACY).runs)
    print(f"final population medians: deterministic={med_det} probabilistic={med_prob}")
    assert med_prob > 0  # behavioural noise shrinks populations but keeps them alive
    assert med_det >= POP_RATIO_MIN * med_prob


# -- 8. hypocrisy gap ---------------------------------------------------------------


def _pooled_hypocrisy(runs, window=FINAL_WINDOW):
    """Population-weighted hypocrite fraction over the final window.

    Pooling by headcount (total hypocrites / total agents) instead of taking
    a per-run median: tiny populations quantise the per-run fraction so hard
    (a 3-agent run can only report 0, 1/3, 2/3, 1) that the median collapses
    to 0 on both sides and separates nothing.
    """
    num = den = 0.0
    for r in runs:
        for x in r.rounds[-window:]:
            if x.hypocrite_fraction is not None and x.population > 0:
                num += x.hypocrite_fraction * x.population
                den += x.population
    return num / den if den else None


def test_hypocrisy_gap_under_legacy_operator(legacy_batch):
    det_group = legacy_batch.group(DET, LEGACY)
    prob_group = legacy_batch.group(PROB, LEGACY)
    # deterministic side: the large settled populations are the ones that
    # carry the claim, so pool over successful runs only
    det_successful = [r for r in det_group.runs if r.final_population > SUCCESS_POP]
    assert len(det_successful) >= 5
    det_h = _pooled_hypocrisy(det_successful)
    prob_h = _pooled_hypocrisy(prob_group.runs)
    print(f"pooled final-window hypocrisy: deterministic={det_h:.4f} "
          f"probabilistic={prob_h:.4f}")
    assert det_h < HYP_DET_MAX
    assert HYP_PROB_BAND[0] <= prob_h <= HYP_PROB_BAND[1]
    assert det_h < prob_h


# -- 9. sanction dynamics ------------------------------------------------------------


def test_sanctions_spike_then_decay(gauss_batch):
    """The onset bloodbath dwarfs the settled phase in most deterministic runs."""
    decayed = []
    for run in gauss_batch.group(DET, GAUSS).runs:
        series = [r.sanction_damage + r.sanction_cost for r in run.rounds]
        early_peak = max(series[1:DECAY_EARLY_WINDOW + 1])
        late = float(np.mean(series[-DECAY_LATE_WINDOW:]))
        if early_peak > 0:
            decayed.append(late < DECAY_MAX_RATIO * early_peak)
    fraction = float(np.mean(decayed))
    print(f"sanction decay fraction: {fraction:.2f} ({sum(decayed)}/{len(decayed)})")
    assert fraction >= DECAY_MIN_FRACTION


def _median_percap_sanction(group, window=FINAL_WINDOW):
    """Median (over surviving runs) settled sanction energy per agent.

    Per-capita, not raw total: the two conditions' populations differ by
    three orders of magnitude, so the round totals mostly measure headcount.
    """
    vals = []
    for r in survivors(group):
        per_round = [
            (x.sanction_damage + x.sanction_cost) / x.population
            for x in r.rounds[-window:]
            if x.population > 0
        ]
        if per_round:
            vals.append(float(np.mean(per_round)))
    return statistics.median(vals)


def test_probabilistic_punishment_is_perpetual(gauss_batch):
    det = _median_percap_sanction(gauss_batch.group(DET, GAUSS))
    prob = _median_percap_sanction(gauss_batch.group(PROB, GAUSS))
    print(f"settled per-capita sanction energy: deterministic={det:.5f} "
          f"probabilistic={prob:.5f}")
    assert det < PERCAP_DET_MAX
    assert prob > PERCAP_PROB_MIN
    assert det < prob


# -- 10. noise does not get selected away ----------------------------------------------


def test_noise_genes_persist(noise_batch):
    """After 1000 rounds the ensemble means of all three noise genes stay
    well above 0.1 (they start near 0.25): behavioural noise is not bred out.

    Per-replicate fates differ — the largest settled populations drift their
    bite noise low — so the claim is asserted at the ensemble level; the
    per-replicate counts are printed alongside for the record.
    """
    group = noise_batch.group(PROB, GAUSS)
    alive = survivors(group)
    assert len(alive) >= MIN_SURVIVORS
    cols = ("mean_BN", "mean_TN", "mean_SN")
    finals = {c: [getattr(r.rounds[-1], c) for r in alive] for c in cols}
    for c in cols:
        ensemble = float(np.mean(finals[c]))
        above = float(np.mean([v > NOISE_FLOOR for v in finals[c]]))
        print(f"{c}: ensemble final mean={ensemble:.3f}, "
              f"replicates above {NOISE_FLOOR}: {above:.2f}")
        assert ensemble > NOISE_FLOOR


# -- 11. the two mutation operators coexist --------------------------------------------


def test_operators_complete_and_label_outputs_distinctly(gauss_batch, legacy_batch):
    for batch in (gauss_batch, legacy_batch):
        for group in batch.groups:
            for run in group.runs:
                assert run.termination in ("completed", "extinction")
                assert len(run.rounds) >= 1
    gauss_labels = {g.label for g in gauss_batch.groups}
    legacy_labels = {g.label for g in legacy_batch.groups}
    assert gauss_labels.isdisjoint(legacy_labels)
    g0, l0 = gauss_batch.groups[0], legacy_batch.groups[0]
    assert run_csv_name(g0, 0) != run_csv_name(l0, 0)

    # informative, non-gating: under the legacy operator the probabilistic
    # condition has historically settled at a higher bite size
    def med_bite(group):
        vals = []
        for r in survivors(group):
            ms = [x.mean_B for x in final_window(r) if x.mean_B is not None]
            if ms:
                vals.append(float(np.mean(ms)))
        return statistics.median(vals)

    det_bite = med_bite(legacy_batch.group(DET, LEGACY))
    prob_bite = med_bite(legacy_batch.group(PROB, LEGACY))
    direction = "holds" if prob_bite >= det_bite else "does not hold"
    print(f"legacy settled bite medians: deterministic={det_bite:.4f} "
          f"probabilistic={prob_bite:.4f} -> directional check {direction}")


# -- 12. statistical micro-oracles ------------------------------------------------------


def test_mutation_trigger_rate_oracle():
    # the legacy operator flips 0.5 -> 1.0, making triggers unambiguous
    g = Genome(0.5, 0.5, 0.5)
    params = MutationParams(0.1, 0.1, LEGACY)
    rng = RandomStream(9001)
    n = 100_000
    hits = 0
    genes_per_call = 3
    for _ in range(n // genes_per_call + 1):
        out = mutate_genome(g, params, (False, False, False), rng)
        hits += sum(v == 1.0 for v in out.as_tuple()[:3])
    trials = genes_per_call * (n // genes_per_call + 1)
    assert abs(hits / trials - 0.1) < TRIGGER_RATE_TOL


def test_clamped_gaussian_mean_oracle():
    # behavioural draw: clip(N(0.8, 0.3), 0, 1); oracle by numeric integration
    mu, sd, n = 0.8, 0.3, 100_000
    dist = stats.norm(loc=mu, scale=sd)
    m1 = integrate.quad(lambda y: y * dist.pdf(y), 0.0, 1.0)[0] + dist.sf(1.0)
    m2 = integrate.quad(lambda y: y * y * dist.pdf(y), 0.0, 1.0)[0] + dist.sf(1.0)
    oracle_sd = math.sqrt(m2 - m1 * m1)

    genome = Genome(mu, 0.0, 0.0, sd, 0.0, 0.0)
    rng = RandomStream(9002)
    draws = np.array([draw_effective_behavior(genome, Trait.BITE, rng) for _ in range(n)])
    assert abs(draws.mean() - m1) < 3 * oracle_sd / math.sqrt(n)


def test_shuffle_uniformity_oracle():
    rng = RandomStream(9003)
    n = 100_000
    counts = {}
    for _ in range(n):
        key = tuple(rng.shuffle((0, 1, 2)))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 6
    for key, c in counts.items():
        assert abs(c / n - 1 / 6) < SHUFFLE_TOL, key
