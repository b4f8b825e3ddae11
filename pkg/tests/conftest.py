import numpy as np
import pytest

from qutritbus import statevector as sv

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_MATS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def label_matrix(label: str) -> np.ndarray:
    """Dense matrix of an unsigned Pauli label, first character = most significant qubit."""
    return kron_all(PAULI_MATS[c] for c in label)


def random_qubit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def ket(label: str) -> np.ndarray:
    single = {"0": [1, 0], "1": [0, 1], "+": [1 / np.sqrt(2), 1 / np.sqrt(2)], "-": [1 / np.sqrt(2), -1 / np.sqrt(2)]}
    v = np.array([1.0 + 0j])
    for c in label:
        v = np.kron(v, np.array(single[c], dtype=complex))
    return v


def register(s: sv.HybridState) -> np.ndarray:
    """Qubit vector of a state whose bus is entirely at A."""
    assert sv.bus_at_A_probability(s) > 1 - 1e-10
    return s.qubit_state(sv.BusSite.A)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
