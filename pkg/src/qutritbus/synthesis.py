"""Stabilizer-state synthesis from XX/ZZ measurements and local gates.

Linear cluster states are grown outward from the centre of the chain.
Each non-centre qubit enters the chain "fresh": prepared in |+> (if it
received a prologue Hadamard) or |0>, and linked to its already-entangled
neighbour by a ZZ measurement (fresh |+>) or an XX measurement (fresh |0>).
Links on opposite flanks touch disjoint qubits, so each time step measures
at most two links in parallel.

A -1 result is not corrected on the spot.  The flip on the fresh qubit
(X for a ZZ link, Z for an XX link) stabilizes the pre-measurement state and
anticommutes with the measured operator, so it maps the -1 branch onto the
+1 branch; it is accumulated in a Pauli frame that is pushed through later
measurements and Hadamards and applied once at the end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import statevector as sv
from .errors import InvalidSizeError, ProtocolError, QubitIndexError
from .pauli import PauliString
from .qtp import OperatorKind, as_kind, measure_operator
from .stabilizer import (
    StabilizerTableau,
    apply_clifford,
    apply_pauli,
    groups_equal,
    measure_pauli,
)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
EXPECTATION_TOL = 1e-10

Engine = Union[StabilizerTableau, sv.HybridState]


@dataclass(frozen=True)
class Link:
    """One operator measurement; ``q1`` is the qubit that receives byproducts."""

    kind: OperatorKind
    q1: int
    q2: int

    def pauli(self, n: int) -> PauliString:
        return self.kind.pauli(n, self.q1, self.q2)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "q1": self.q1, "q2": self.q2}

    @classmethod
    def from_dict(cls, d: dict) -> Link:
        return cls(as_kind(d["kind"]), int(d["q1"]), int(d["q2"]))


@dataclass
class Schedule:
    n: int
    prologue: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    epilogue: list = field(default_factory=list)

    @property
    def step_count(self) -> int:
        return len(self.steps)

    def links(self) -> list[Link]:
        return [link for step in self.steps for link in step]

    def check_disjoint(self) -> None:
        for k, step in enumerate(self.steps):
            used: set[int] = set()
            for link in step:
                if {link.q1, link.q2} & used:
                    raise ValueError(f"step {k + 1} reuses a qubit")
                used |= {link.q1, link.q2}

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "prologue": list(self.prologue),
            "steps": [[link.to_dict() for link in step] for step in self.steps],
            "epilogue": list(self.epilogue),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> Schedule:
        steps = [[Link.from_dict(x) for x in step] for step in d["steps"]]
        n = d.get("n")
        if n is None:
            n = 1 + max(max(link.q1, link.q2) for step in steps for link in step)
        return cls(int(n), list(d.get("prologue", [])), steps, list(d.get("epilogue", [])))

    @classmethod
    def from_json(cls, text: str) -> Schedule:
        return cls.from_dict(json.loads(text))


# -- schedules -------------------------------------------------------------------


def _fan(n: int, kind_of) -> list[list[Link]]:
    # centre pair (m-1, m) in 0-based indices, then one new qubit per flank per step
    m = n // 2
    steps = [[Link(OperatorKind.XX, m - 1, m)]]
    i = 0
    while True:
        step = []
        left = m - 2 - i
        right = m + 1 + i
        if left >= 0:
            step.append(Link(kind_of(left), left, left + 1))
        if right < n:
            step.append(Link(kind_of(right), right, right - 1))
        if not step:
            return steps
        steps.append(step)
        i += 1


def linear_cluster_schedule(n: int) -> Schedule:
    """Measurement schedule for an n-qubit linear cluster state.

    Hadamards go on the odd-numbered qubits (0-based even indices) except the
    centre two, then links fan out from the centre, then every odd-numbered
    qubit gets a Hadamard again.
    """
    if n < 2:
        raise InvalidSizeError("a linear cluster needs at least two qubits")
    m = n // 2
    centre = {m - 1, m}
    prologue = [q for q in range(0, n, 2) if q not in centre]
    plus = set(prologue)
    steps = _fan(n, lambda q: OperatorKind.ZZ if q in plus else OperatorKind.XX)
    return Schedule(n, prologue, steps, list(range(0, n, 2)))


def ghz_chain_schedule(n: int) -> Schedule:
    """XX links on every neighbouring pair of ``|0...0>``, fanned out from the centre.

    The resulting group is generated by ``X_j X_{j+1}`` and ``Z_1 ... Z_n``.
    """
    if n < 2:
        raise InvalidSizeError("a GHZ chain needs at least two qubits")
    return Schedule(n, [], _fan(n, lambda q: OperatorKind.XX), [])


def cluster_generators(n: int) -> list[PauliString]:
    if n < 2:
        raise InvalidSizeError("a linear cluster needs at least two qubits")
    gens = []
    for a in range(n):
        ops = {a: "X"}
        if a > 0:
            ops[a - 1] = "Z"
        if a < n - 1:
            ops[a + 1] = "Z"
        gens.append(PauliString.from_sparse(n, ops))
    return gens


def cluster_tableau(n: int) -> StabilizerTableau:
    return StabilizerTableau.from_generators(cluster_generators(n))


# -- execution -------------------------------------------------------------------


def _hadamard_frame(frame: PauliString, q: int) -> PauliString:
    x = frame.x_bits.copy()
    z = frame.z_bits.copy()
    x[q], z[q] = z[q], x[q]
    return PauliString(x, z)


def execute_schedule(
    engine: Engine,
    sched: Schedule,
    rng: Optional[np.random.Generator] = None,
    force_plus: bool = False,
    *,
    outcomes: Optional[Sequence[int]] = None,
    log: Optional[list] = None,
) -> tuple[Engine, PauliString]:
    """Run ``sched`` on a tableau or on a dense hybrid state.

    Returns the final state (with the accumulated Pauli frame applied) and
    the frame itself.  The dense engine performs every measurement through
    the full bus protocol.  ``outcomes`` replays raw measurement results in
    link order (overrides ``force_plus``); ``log`` collects them.
    """
    dense = isinstance(engine, sv.HybridState)
    n = engine.n_qubits if dense else engine.n
    if n != sched.n:
        raise InvalidSizeError(f"engine has {n} qubits, schedule needs {sched.n}")
    frame = PauliString.identity(n)
    state = engine

    def hadamard(state, q):
        return sv.apply_qubit_gate(state, q, HADAMARD) if dense else apply_clifford(state, "H", q)

    for q in sched.prologue:
        state = hadamard(state, q)
    replay = iter(outcomes) if outcomes is not None else None
    for step in sched.steps:
        for link in step:
            op = link.pauli(n)
            want = next(replay) if replay is not None else (1 if force_plus else None)
            if dense:
                outcome, state = measure_operator(
                    state, link.kind, link.q1, link.q2, rng, forced=None if want is None else want == 1
                )
                result = outcome.eigenvalue
            else:
                result, _, state = measure_pauli(state, op, rng, forced=want)
            if log is not None:
                log.append(result)
            if not frame.commutes(op):
                result = -result
            if result == -1:
                frame = frame * PauliString.from_sparse(n, {link.q1: link.kind.flip_letter})
    for q in sched.epilogue:
        state = hadamard(state, q)
        frame = _hadamard_frame(frame, q)
    frame = frame.unsigned()
    state = sv.apply_pauli(state, frame) if dense else apply_pauli(state, frame)
    return state, frame


def verify_cluster(state: Engine, n: int) -> bool:
    """True when ``state`` is the n-qubit linear cluster state."""
    if isinstance(state, StabilizerTableau):
        if state.n != n:
            raise InvalidSizeError(f"tableau has {state.n} qubits, expected {n}")
        return groups_equal(state, cluster_tableau(n))
    if state.n_qubits != n:
        raise InvalidSizeError(f"state has {state.n_qubits} qubits, expected {n}")
    if sv.bus_at_A_probability(state) < 1.0 - EXPECTATION_TOL:
        return False
    return all(sv.expectation_pauli(state, k) >= 1.0 - EXPECTATION_TOL for k in cluster_generators(n))


# -- CZ from measurements ---------------------------------------------------------


def cz_via_measurements(
    s: sv.HybridState,
    control: int,
    target: int,
    ancilla: int,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[tuple] = None,
) -> tuple[sv.HybridState, dict]:
    """Apply CZ(control, target) using a fresh ancilla, two bus measurements and local gates.

    Sequence: ancilla to |+>; measure Z_c Z_a; H on target; measure
    X_t X_a; H on target; measure the ancilla in the computational basis.
    The bus measurements are used raw (their kickback is left in place),
    and the ancilla result picks the final correction: bit 0 -> Z on
    control and target, bit 1 -> Z on control.  A -1 on the ZZ measurement
    is undone with X on the ancilla, a -1 on the XX measurement with Z on
    control and ancilla.  The ancilla is reset to |0> afterwards.

    ``forced`` = ``(zz_at_alice, xx_at_alice, ancilla_bit)``, any entry may
    be None to sample.
    """
    qs = (control, target, ancilla)
    for q in qs:
        if not 0 <= q < s.n_qubits:
            raise QubitIndexError(f"qubit {q} out of range")
    if len(set(qs)) != 3:
        raise QubitIndexError("control, target and ancilla must be distinct")
    n = s.n_qubits
    v = s.bus_matrix().reshape(s.bus_dim, 2**ancilla, 2, 2 ** (n - ancilla - 1))
    if float(np.vdot(v[:, :, 1, :], v[:, :, 1, :]).real) > 1e-12:
        raise ProtocolError(f"ancilla qubit {ancilla} is not in |0>")
    f_zz, f_xx, f_bit = forced if forced is not None else (None, None, None)

    s = sv.apply_qubit_gate(s, ancilla, HADAMARD)
    zz, s = measure_operator(s, OperatorKind.ZZ, control, ancilla, rng, forced=f_zz, correct_kickback=False)
    if zz.eigenvalue == -1:
        s = sv.apply_qubit_gate(s, ancilla, PAULI_X)
    s = sv.apply_qubit_gate(s, target, HADAMARD)
    xx, s = measure_operator(s, OperatorKind.XX, target, ancilla, rng, forced=f_xx, correct_kickback=False)
    if xx.eigenvalue == -1:
        s = sv.apply_qubit_gate(s, control, PAULI_Z)
        s = sv.apply_qubit_gate(s, ancilla, PAULI_Z)
    s = sv.apply_qubit_gate(s, target, HADAMARD)
    bit, s, _ = sv.measure_qubit(s, ancilla, rng, forced=f_bit)
    fixes = [control, target] if bit == 0 else [control]
    for q in fixes:
        s = sv.apply_qubit_gate(s, q, PAULI_Z)
    if bit == 1:
        s = sv.apply_qubit_gate(s, ancilla, PAULI_X)
    record = {
        "zz_eigenvalue": zz.eigenvalue,
        "xx_eigenvalue": xx.eigenvalue,
        "ancilla_bit": bit,
        "phase_corrections": fixes,
    }
    return s, record
