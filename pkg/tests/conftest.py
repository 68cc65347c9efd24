import pytest

from normsim.config import Condition, MutationOperator, SimConfig
from normsim.experiment import ExperimentSpec, run_batch


@pytest.fixture(scope="session")
def tiny_batch():
    """Two small condition groups, shared by io/plot/cli tests."""
    spec = ExperimentSpec(
        base=SimConfig(max_rounds=40),
        replicates=3,
        master_seed=7,
        conditions=(
            (Condition.DETERMINISTIC, MutationOperator.GAUSSIAN),
            (Condition.PROBABILISTIC, MutationOperator.GAUSSIAN),
        ),
    )
    return run_batch(spec)
