import pytest

from app.models import ChannelRealization, ExperimentConfig, ScenarioConfig
from app.services.channel_service import SeededRng, cascade


@pytest.fixture
def scenario():
    return ScenarioConfig()


@pytest.fixture
def rng():
    return SeededRng(1234)


@pytest.fixture
def make_channel(rng):
    """Fábrica de canales CN(0, 1) sin geometría, para pruebas algebraicas."""

    def _make(n, h_d=None):
        f = rng.complex_normal(n)
        h_r = rng.complex_normal(n)
        direct = rng.complex_normal() if h_d is None else h_d
        return ChannelRealization(h_d=direct, f=f, h_r=h_r, h_c=cascade(h_r, f))

    return _make


@pytest.fixture
def small_experiment(tmp_path):
    return ExperimentConfig(
        trials=3,
        seed=7,
        noise_ratios_db=[-120.0, -160.0],
        n_values=[2, 4],
        validation_trials=2,
        output_dir=str(tmp_path / "results"),
    )
