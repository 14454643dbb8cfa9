import pytest

from kinex.kinetic import Agent, Population
from kinex.models import ExperimentConfig
from kinex.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def small_config(tmp_path):
    """Desk-sized buyer config: 40 agents holding 100 money and 1 good each."""
    return ExperimentConfig(
        n_agents=40,
        total_goods=40,
        total_money=4000.0,
        n_sweeps=30,
        burn_in_sweeps=10,
        ratios=[0.5, 1.0, 2.0],
        hist_bins=10,
        output_dir=str(tmp_path / "out"),
    )


def make_population(*agents):
    """Population from (b, d, h) triples."""
    return Population.from_agents([Agent(b=b, d=float(d), h=float(h)) for b, d, h in agents])


@pytest.fixture
def population_of():
    return make_population
