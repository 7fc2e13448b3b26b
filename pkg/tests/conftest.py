import pytest
from hypothesis import HealthCheck, settings

from billiardlab.geometry import EllipseTable

settings.register_profile(
    "billiardlab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("billiardlab")


@pytest.fixture(scope="session")
def table():
    return EllipseTable(2.0, 1.0)
