import numpy as np
import pytest

from qeclab.states import PureState


def random_pure_state(n_qubits: int, rng: np.random.Generator) -> PureState:
    raw = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return PureState(n_qubits, raw / np.linalg.norm(raw))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
