"""Random Clifford circuits run on both engines with shared outcomes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import statevector as sv
from .errors import CapacityError, ConfigError
from .pauli import PauliString
from .stabilizer import apply_clifford, measure_pauli, stabilizes, tableau_from_zero_state

MAX_CROSSCHECK_QUBITS = 8
ONE_QUBIT = ("H", "S", "SDG", "X", "Y", "Z")
TWO_QUBIT = ("CNOT", "CZ")

_S = np.diag([1, 1j])
GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": _S,
    "SDG": _S.conj(),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}


@dataclass
class CircuitReport:
    n: int
    n_gates: int
    n_measurements: int
    max_deviation: float


def random_circuit(rng: np.random.Generator, max_qubits: int = 8, max_gates: int = 40, max_measurements: int = 10):
    """A list of ``("gate", name, targets)`` / ``("measure", PauliString)`` operations."""
    n = int(rng.integers(1, max_qubits + 1))
    n_gates = int(rng.integers(1, max_gates + 1))
    n_meas = int(rng.integers(0, max_measurements + 1))
    ops = []
    for _ in range(n_gates):
        if n >= 2 and rng.random() < 0.4:
            a, b = rng.choice(n, size=2, replace=False)
            ops.append(("gate", str(rng.choice(TWO_QUBIT)), (int(a), int(b))))
        else:
            ops.append(("gate", str(rng.choice(ONE_QUBIT)), (int(rng.integers(n)),)))
    for _ in range(n_meas):
        while True:
            chars = rng.choice(list("IXYZ"), size=n)
            if (chars != "I").any():
                break
        sign = "+" if rng.random() < 0.5 else "-"
        pos = int(rng.integers(len(ops) + 1))
        ops.insert(pos, ("measure", PauliString.from_label(sign + "".join(chars))))
    return n, ops


def run_circuit(n: int, ops, rng: np.random.Generator) -> float:
    """Run ``ops`` on both engines; return max |<g> - 1| over the final generators."""
    if n > MAX_CROSSCHECK_QUBITS:
        raise CapacityError(f"crosscheck is limited to {MAX_CROSSCHECK_QUBITS} qubits")
    t = tableau_from_zero_state(n)
    s = sv.init_state(3, n, sv.BusSite.A, "0" * n)
    for op in ops:
        if op[0] == "gate":
            _, name, targets = op
            t = apply_clifford(t, name, targets)
            if len(targets) == 1:
                s = sv.apply_qubit_gate(s, targets[0], GATE_MATRICES[name])
            else:
                s = sv.apply_two_qubit_gate(s, targets[0], targets[1], GATE_MATRICES[name])
        else:
            p = op[1]
            # deterministic measurements keep their value; random ones get a coin-flip outcome
            known = stabilizes(t, p)
            forced = known if known is not None else (1 if rng.random() < 0.5 else -1)
            outcome, _, t = measure_pauli(t, p, forced=forced)
            _, s = sv.project_pauli_oracle(s, p, outcome)
    return max(abs(sv.expectation_pauli(s, g) - 1.0) for g in t.generators)


def crosscheck(n_circuits: int, seed: int, max_qubits: int = 8) -> list[CircuitReport]:
    if n_circuits < 1:
        raise ConfigError("need at least one circuit")
    if max_qubits > MAX_CROSSCHECK_QUBITS:
        raise CapacityError(f"crosscheck is limited to {MAX_CROSSCHECK_QUBITS} qubits")
    if max_qubits < 1:
        raise ConfigError("max_qubits must be positive")
    reports = []
    for k in range(n_circuits):
        rng = np.random.default_rng([seed, k])
        n, ops = random_circuit(rng, max_qubits)
        dev = run_circuit(n, ops, rng)
        n_meas = sum(op[0] == "measure" for op in ops)
        reports.append(CircuitReport(n, len(ops) - n_meas, n_meas, dev))
    return reports
