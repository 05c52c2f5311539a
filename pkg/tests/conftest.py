from pathlib import Path

import pytest

from kerrsqueeze import ResonatorParams

SAMPLES = Path(__file__).resolve().parent.parent / "sample_data"


@pytest.fixture
def device_params():
    # overcoupled device: kappa about 2.7x the intrinsic rate
    return ResonatorParams(kappa=515e6, gamma=192e6, g_opt=1.4, lambda_r=1550e-9)


@pytest.fixture
def strong_params():
    # stronger extraction ratio, with a thermal shift component
    return ResonatorParams(
        kappa=500e6, gamma=50e6, g_opt=1.5, g_th=100.0, lambda_r=1550e-9
    )


@pytest.fixture
def sample_dir():
    return SAMPLES
