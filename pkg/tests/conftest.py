import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qszilard import SpectrumCache

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def cache(tmp_path_factory):
    """One persistent spectrum cache shared by the whole session."""
    return SpectrumCache(tmp_path_factory.mktemp("spectra"))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
