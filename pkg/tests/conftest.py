"""
Pytest configuration file for varstring tests.

Provides the shared density models and the expensive tables as
session fixtures so they are built once per run.
"""
import os
import sys

import pytest

# Add the source directory to the sys.path
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from varstring.density import horgan, quartic, uniform
from varstring.spectral import horgan_exact
from varstring.wkb_basis import WkbBasis, build_table


def pytest_configure(config):
    """Configure pytest markers."""
    config.addinivalue_line("markers", "slow: long-running reproduction or high-resolution test")


@pytest.fixture(scope="session")
def uniform_model():
    """Uniform string rho = 1 on [-1/2, 1/2]."""
    return uniform(1.0, 0.5)


@pytest.fixture(scope="session")
def quartic_model():
    """rho = (x + 3 pi/2)^4 on [-pi/2, pi/2]."""
    return quartic()


@pytest.fixture(scope="session")
def horgan_model():
    return horgan(1.0)


@pytest.fixture(scope="session")
def quartic_basis(quartic_model):
    return WkbBasis(quartic_model, size=40)


@pytest.fixture(scope="session")
def quartic_table(quartic_basis):
    """Matrix elements of the quartic potential over the first 40 WKB states."""
    return build_table(quartic_basis, 40)


@pytest.fixture(scope="session")
def horgan_spectrum():
    """Exact Horgan-Chan a = 1 spectrum, first 200 modes."""
    return horgan_exact(1.0, 200)
