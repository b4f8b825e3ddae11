"""Bus-mediated two-qubit XX / ZZ operator measurements.

One measurement runs four stages on a ``HybridState`` whose bus starts at
Alice:

I.   bus at A, register in ``|psi>``;
II.  bus transform: A -> (B1 + B2)/sqrt2;
III. X (for XX) or Z (for ZZ) on ``q1`` controlled by B1 and on ``q2``
     controlled by B2;
IV.  inverse transport, then a yes/no measurement of the bus at A.

Finding the bus at A projects the register onto the +1 eigenspace of the
measured operator, otherwise onto the -1 eigenspace; in the latter case the
bus is left in (B1 - B2)/sqrt2 and is returned to A by a phase flip on B2
followed by another transport.

The raw register after stage IV is ``U_{q1} (1 +- P)/2 |psi>`` (``U`` being
the controlled gate), i.e. the projection times a known local Pauli
kickback.  ``measure_operator`` undoes that kickback by default so its
post-state is exactly the projected state; pass ``correct_kickback=False``
to keep the raw register (the kickback is then reported in
``corrections``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import mrap
from .errors import ConfigError, InvalidSizeError, ProtocolError, QubitIndexError
from .pauli import PauliString
from .statevector import (
    BusSite,
    HybridState,
    apply_bus_unitary,
    apply_controlled_from_site,
    apply_qubit_gate,
    bus_at_A_probability,
    expectation_pauli,
    measure_bus_at_A,
    project_pauli_oracle,
)

SQRT_HALF = 1.0 / np.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
BUS_TOL = 1e-9


class OperatorKind(enum.Enum):
    XX = "XX"
    ZZ = "ZZ"

    @property
    def gate(self) -> np.ndarray:
        return PAULI_X if self is OperatorKind.XX else PAULI_Z

    @property
    def letter(self) -> str:
        return self.value[0]

    @property
    def flip_letter(self) -> str:
        """Single-qubit Pauli that anticommutes with this operator."""
        return "Z" if self is OperatorKind.XX else "X"

    def pauli(self, n: int, q1: int, q2: int) -> PauliString:
        return PauliString.from_sparse(n, {q1: self.letter, q2: self.letter})


def as_kind(kind) -> OperatorKind:
    return kind if isinstance(kind, OperatorKind) else OperatorKind(str(kind).upper())


@dataclass
class MeasurementOutcome:
    """Result of one bus measurement (or of a repeat-until-success run).

    ``eigenvalue`` is +1, -1 or None (unknown because the bus was lost).
    ``corrections`` lists ``(qubit, pauli)`` byproducts owed: the kickback
    when it was not undone, and for a -1 result the flip that anticommutes
    with the measured operator.  ``hidden_eigenvalue`` is the branch a lost
    bus projected onto; it is never part of the public record.
    """

    kind: OperatorKind
    q1: int
    q2: int
    eigenvalue: Optional[int]
    bus_at_alice: bool
    lost: bool = False
    corrections: list = field(default_factory=list)
    trials: int = 1
    probability: Optional[float] = None
    hidden_eigenvalue: Optional[int] = field(default=None, repr=False)

    def to_record(self, seed: Optional[int] = None) -> dict:
        return {
            "kind": self.kind.value,
            "q1": self.q1,
            "q2": self.q2,
            "eigenvalue": "unknown" if self.eigenvalue is None else self.eigenvalue,
            "bus_at_alice": self.bus_at_alice,
            "lost": self.lost,
            "trials": self.trials,
            "seed": seed,
        }


def u_qtp() -> np.ndarray:
    """The ideal bus transform in (A, B1, B2) ordering; real, symmetric and an involution."""
    h = SQRT_HALF
    return np.array([[0.0, h, h], [h, 0.5, -0.5], [h, -0.5, 0.5]])


def _phase_flip_b2(bus_dim: int) -> np.ndarray:
    d = np.ones(bus_dim)
    d[BusSite.B2] = -1.0
    return np.diag(d).astype(complex)


def _check_pair(s: HybridState, q1: int, q2: int) -> None:
    for q in (q1, q2):
        if not 0 <= q < s.n_qubits:
            raise QubitIndexError(f"qubit {q} out of range for {s.n_qubits} qubits")
    if q1 == q2:
        raise QubitIndexError("operator measurement needs two distinct qubits")


def _check_bus_at_alice(s: HybridState) -> None:
    if bus_at_A_probability(s) < 1.0 - BUS_TOL:
        raise ProtocolError("bus must start at Alice")


def _check_loss(loss_probability: float) -> None:
    if not 0.0 <= loss_probability <= 1.0:
        raise ConfigError(f"loss_probability must lie in [0, 1], got {loss_probability}")


def antisymmetric_mode(bus_dim: int = 3) -> np.ndarray:
    v = np.zeros(bus_dim, dtype=complex)
    v[BusSite.B1], v[BusSite.B2] = SQRT_HALF, -SQRT_HALF
    return v


def stage_three(s: HybridState, kind, q1: int, q2: int) -> HybridState:
    """State after stages II and III of the ideal protocol (bus entangled with the register)."""
    kind = as_kind(kind)
    _check_pair(s, q1, q2)
    _check_bus_at_alice(s)
    if s.bus_dim != 3:
        raise InvalidSizeError("the ideal protocol runs on a three-site bus")
    s = apply_bus_unitary(s, u_qtp())
    s = apply_controlled_from_site(s, BusSite.B1, q1, kind.gate)
    return apply_controlled_from_site(s, BusSite.B2, q2, kind.gate)


def recover_bus(s: HybridState) -> HybridState:
    """Return a bus in (B1 - B2)/sqrt2 to Alice: phase flip on B2, then transport."""
    if s.bus_dim != 3:
        raise InvalidSizeError("recover_bus works on the three-site bus")
    mode = antisymmetric_mode(3)
    m = s.bus_matrix()
    in_mode = float(np.linalg.norm(mode.conj() @ m) ** 2)
    if in_mode < 1.0 - BUS_TOL:
        raise ProtocolError("bus is not in the (B1 - B2)/sqrt2 mode")
    s = apply_bus_unitary(s, _phase_flip_b2(3))
    return apply_bus_unitary(s, u_qtp())


def _lost_projection(
    s: HybridState, kind: OperatorKind, q1: int, q2: int, rng: np.random.Generator
) -> tuple[int, HybridState]:
    # the bus is gone: the register lands in a Born-sampled, unrevealed eigenspace
    op = kind.pauli(s.n_qubits, q1, q2)
    p_plus = 0.5 * (1.0 + expectation_pauli(s, op))
    branch = 1 if rng.random() < p_plus else -1
    _, projected = project_pauli_oracle(s, op, branch)
    return branch, projected


def _finish(
    s: HybridState,
    kind: OperatorKind,
    q1: int,
    at_a: bool,
    prob: float,
    q2: int,
    correct_kickback: bool,
) -> tuple[MeasurementOutcome, HybridState]:
    corrections = []
    if correct_kickback:
        s = apply_qubit_gate(s, q1, kind.gate)
    else:
        corrections.append((q1, kind.letter))
    eigenvalue = 1 if at_a else -1
    if eigenvalue == -1:
        corrections.append((q1, kind.flip_letter))
    outcome = MeasurementOutcome(kind, q1, q2, eigenvalue, at_a, False, corrections, 1, prob)
    return outcome, s


def measure_operator(
    s: HybridState,
    kind,
    q1: int,
    q2: int,
    rng: Optional[np.random.Generator] = None,
    loss_probability: float = 0.0,
    *,
    forced: Optional[bool] = None,
    correct_kickback: bool = True,
) -> tuple[MeasurementOutcome, HybridState]:
    """Measure ``X_q1 X_q2`` or ``Z_q1 Z_q2`` through the ideal bus protocol.

    ``forced`` selects the bus-at-Alice branch (True) or its complement
    (False) instead of sampling.  A loss event is drawn after stage III with
    probability ``loss_probability``; it discards the bus, projects the
    register onto an unrevealed eigenspace and puts a fresh bus at A.
    """
    kind = as_kind(kind)
    _check_loss(loss_probability)
    if s.bus_dim != 3:
        raise InvalidSizeError("the ideal protocol runs on a three-site bus; use measure_operator_dynamical")
    mid = stage_three(s, kind, q1, q2)

    if loss_probability > 0.0 and rng.random() < loss_probability:
        branch, projected = _lost_projection(s, kind, q1, q2, rng)
        outcome = MeasurementOutcome(kind, q1, q2, None, False, True, [], 1, None, branch)
        return outcome, projected

    out = apply_bus_unitary(mid, u_qtp())
    at_a, out, prob = measure_bus_at_A(out, rng, forced)
    if not at_a:
        out = recover_bus(out)
    return _finish(out, kind, q1, at_a, prob, q2, correct_kickback)


def measure_until_known(
    s: HybridState,
    kind,
    q1: int,
    q2: int,
    rng: np.random.Generator,
    loss_probability: float = 0.0,
    max_trials: int = 10,
    **kwargs,
) -> tuple[MeasurementOutcome, HybridState]:
    """Repeat ``measure_operator`` until a trial keeps its bus (or trials run out).

    The first lost trial already projects the register, so any later
    successful trial reports that same eigenvalue.
    """
    if max_trials < 1:
        raise ConfigError("max_trials must be at least 1")
    hidden = None
    for trial in range(1, max_trials + 1):
        outcome, s = measure_operator(s, kind, q1, q2, rng, loss_probability, **kwargs)
        if outcome.lost:
            if hidden is None:
                hidden = outcome.hidden_eigenvalue
            continue
        outcome.trials = trial
        outcome.hidden_eigenvalue = hidden
        return outcome, s
    kind = as_kind(kind)
    return MeasurementOutcome(kind, q1, q2, None, False, True, [], max_trials, None, hidden), s


# -- dynamical variant ---------------------------------------------------------


def _embed(u3: np.ndarray) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    u[:3, :3] = u3
    return u


def measure_operator_dynamical(
    s: HybridState,
    kind,
    q1: int,
    q2: int,
    rng: Optional[np.random.Generator] = None,
    schedule: Optional[mrap.PulseSchedule] = None,
    *,
    forced: Optional[bool] = None,
    correct_kickback: bool = True,
) -> tuple[MeasurementOutcome, HybridState]:
    """The same measurement with stages II/IV realized by adiabatic transport.

    The forward sweep replaces the first bus transform and the reversed
    sweep replaces the second.  After a not-at-Alice result the bus is
    phase-flipped on B2 and swept back; the small residual off Alice left by
    imperfect adiabaticity is removed by post-selecting the bus at A.
    """
    kind = as_kind(kind)
    if s.bus_dim != 4:
        raise InvalidSizeError("the dynamical protocol needs bus_dim = 4")
    _check_pair(s, q1, q2)
    _check_bus_at_alice(s)
    schedule = schedule or mrap.PulseSchedule()
    if schedule.direction != "forward":
        schedule = schedule.reversed()
    forward = mrap.propagator(schedule)
    backward = mrap.propagator(schedule.reversed())

    out = apply_bus_unitary(s, forward)
    out = apply_controlled_from_site(out, BusSite.B1, q1, kind.gate)
    out = apply_controlled_from_site(out, BusSite.B2, q2, kind.gate)
    out = apply_bus_unitary(out, backward)
    at_a, out, prob = measure_bus_at_A(out, rng, forced)
    if not at_a:
        out = apply_bus_unitary(out, _phase_flip_b2(4))
        out = apply_bus_unitary(out, backward)
        m = out.bus_matrix().copy()
        m[1:] = 0
        out = out._with(m, renormalize=True)
    return _finish(out, kind, q1, at_a, prob, q2, correct_kickback)
