import numpy as np
import pytest

from reebfol import fixtures
from reebfol.profile import lambda0, open_book_profile


@pytest.fixture(scope="session")
def lam0():
    return lambda0()


@pytest.fixture(scope="session")
def lam0_wide():
    return lambda0(rho_max=2.0)


@pytest.fixture(scope="session")
def half_lutz():
    return fixtures.half_lutz_profile()


@pytest.fixture(scope="session")
def full_lutz():
    return fixtures.full_lutz_profile()


@pytest.fixture(scope="session")
def cond4():
    profile, plan, report = fixtures.condition4_profile()
    return profile, plan, report


@pytest.fixture(scope="session")
def open_book():
    return open_book_profile(h2=0.01)


@pytest.fixture(scope="session")
def seeded_profiles():
    rng = np.random.default_rng(20240817)
    return [fixtures.random_contact_profile(rng) for _ in range(20)]
