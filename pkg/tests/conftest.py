import pytest

from descent_lab import SweepConfig, run_sweep

# The headline synthetic configuration: D = 32, noise 0.25, every n_train in
# [2, 96], 30 seeds.  Several tests interrogate the same run, so build it once.
HEADLINE = dict(d=32, noise_sd=0.25, grid=list(range(2, 97)), seeds=list(range(30)))


@pytest.fixture(scope="session")
def threshold_sweep():
    outcome = run_sweep(SweepConfig(**HEADLINE))
    assert not outcome.failures, f"{len(outcome.failures)} cells failed"
    return outcome
