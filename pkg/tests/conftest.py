import numpy as np
import pytest

from emverify.family import FamilyParams, build_chart


@pytest.fixture(scope="session")
def chart12():
    """The a=1, b=2 family member; shared because construction is pure."""
    return build_chart(FamilyParams(1, 2))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
