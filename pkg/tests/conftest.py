import numpy as np
import pytest

from dfqsim.geometry import couplings_for, standard_scene, two_qubit_scene
from dfqsim.grape import synthesize_cnot, synthesize_swap


@pytest.fixture(scope="session")
def case1_scene():
    return standard_scene(1)


@pytest.fixture(scope="session")
def case2_scene():
    return standard_scene(2)


@pytest.fixture(scope="session")
def case1_couplings(case1_scene):
    return couplings_for(case1_scene)


@pytest.fixture(scope="session")
def case2_couplings(case2_scene):
    return couplings_for(case2_scene)


@pytest.fixture(scope="session")
def cnot_couplings():
    scene = two_qubit_scene(0.85)
    return couplings_for(scene, 0), couplings_for(scene, 1)


@pytest.fixture(scope="session")
def swap_result(case1_couplings):
    """The default robust SWAP synthesis for the reference couplings."""
    return synthesize_swap(case1_couplings, seed=0)


@pytest.fixture(scope="session")
def swap_result_case2(case2_couplings):
    return synthesize_swap(case2_couplings, seed=0)


@pytest.fixture(scope="session")
def cnot_result(cnot_couplings):
    c1, c2 = cnot_couplings
    return synthesize_cnot(c1, c2, seed=0)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
