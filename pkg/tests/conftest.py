import pytest

from fpg.fixtures import M_EUC, M_MINK, M_RAND, M_SPH, P0
from fpg.metrics import canonical_spray
from fpg.sampling import WorkingDomain, sample_points


@pytest.fixture(scope="session")
def p0():
    return P0


@pytest.fixture(scope="session")
def points20():
    return sample_points(WorkingDomain.cube(3), 20, 42)


@pytest.fixture(scope="session")
def sprays():
    return {
        "euclidean": canonical_spray(M_EUC),
        "sphere": canonical_spray(M_SPH),
        "randers": canonical_spray(M_RAND),
        "minkowski": canonical_spray(M_MINK),
    }
