import numpy as np
import pytest

from ionring.config import RingConfig


@pytest.fixture
def bh_config():
    """Small black-hole ring used across unit tests."""
    return RingConfig(n_ions=40, coupling=1.2591, v_min_frac=5.0 / 6.0,
                      sigma_frac=0.25, interaction="full-coulomb")


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
