"""Hypothesis profile and fixtures."""

import pytest
from hypothesis import HealthCheck, settings

from hamsec.jets import Chart

settings.register_profile(
    "hamsec", max_examples=40, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("hamsec")


@pytest.fixture
def full1():
    return Chart.full(1)


@pytest.fixture
def full2():
    return Chart.full(2)
