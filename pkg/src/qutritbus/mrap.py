"""Adiabatic transport of the bus particle over the four-site tripod.

Sites are ordered (A, B1, B2, C); the central site C couples to each of
the outer sites through real, time-dependent tunnel matrix elements.  The
sender coupling rises while the recipient couplings fall (counter-intuitive
ordering), so the zero-energy state that starts on A ends on an equal
superposition of the two recipients and C stays empty.

Units: hbar = 1; times and rates are dimensionless (the defaults use
``omega_max = 1`` so time is measured in units of ``1/omega_max``).
"""

from __future__ import annotations

import csv
import functools
import io
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, TextIO, Union

import numpy as np
from scipy.special import erf

from .errors import ConfigError, DegenerateBasisError, InvalidSizeError
from .statevector import HybridState

SITES = ("A", "B1", "B2", "C")
A, B1, B2, C = range(4)


@dataclass(frozen=True)
class PulseSchedule:
    """Error-function pulse parameters for one transport sweep.

    ``t_start``/``t_end`` default to ``-5*sigma``/``+5*sigma``.  Setting
    ``omega_b2_max`` different from ``omega_b_max`` weights the two
    recipients unequally; by default both share ``omega_b_max``.
    """

    sigma: float = 50.0
    omega_a_max: float = 1.0
    omega_b_max: float = 1.0
    t_start: Optional[float] = None
    t_end: Optional[float] = None
    n_steps: int = 4000
    direction: str = "forward"
    omega_b2_max: Optional[float] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if not (self.omega_a_max > 0 and self.omega_b_max > 0):
            raise ConfigError("pulse maxima must be positive")
        if self.omega_b2_max is not None and not self.omega_b2_max > 0:
            raise ConfigError("omega_b2_max must be positive")
        if self.direction not in ("forward", "reverse"):
            raise ConfigError(f"direction must be 'forward' or 'reverse', not {self.direction!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 100:
            raise ConfigError("n_steps must be an integer >= 100")
        if self.t_start is None:
            object.__setattr__(self, "t_start", -5.0 * self.sigma)
        if self.t_end is None:
            object.__setattr__(self, "t_end", 5.0 * self.sigma)
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(self.t_end))
        # zero-duration windows are allowed and evolve as the identity
        if self.t_start > self.t_end:
            raise ConfigError("t_start must not exceed t_end")

    @property
    def omega_b1_peak(self) -> float:
        return self.omega_b_max

    @property
    def omega_b2_peak(self) -> float:
        return self.omega_b_max if self.omega_b2_max is None else self.omega_b2_max

    def reversed(self) -> PulseSchedule:
        return replace(self, direction="reverse" if self.direction == "forward" else "forward")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> PulseSchedule:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown schedule fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> PulseSchedule:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DarkStateBasis:
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    valid_at: float


@dataclass
class Trajectory:
    t: np.ndarray
    populations: np.ndarray  # (len(t), 4) in site order A, B1, B2, C
    d3_overlap: np.ndarray
    columns: tuple = field(default=("t", "pop_A", "pop_B1", "pop_B2", "pop_C", "d3_overlap"), repr=False)

    def __len__(self) -> int:
        return len(self.t)

    def write_csv(self, out: Union[str, TextIO]) -> None:
        if isinstance(out, str):
            with open(out, "w", newline="") as fh:
                self.write_csv(fh)
            return
        writer = csv.writer(out)
        writer.writerow(self.columns)
        for k in range(len(self.t)):
            writer.writerow([repr(float(self.t[k]))] + [repr(float(v)) for v in self.populations[k]] + [repr(float(self.d3_overlap[k]))])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


# -- pulses and Hamiltonian ----------------------------------------------------


def pulse_triplet(p: PulseSchedule, t):
    """``(omega_a, omega_b1, omega_b2)`` at time(s) ``t``."""
    s = np.asarray(t, dtype=float) / p.sigma
    if p.direction == "reverse":
        s = -s
    rise = 0.5 * (1.0 + erf(s))
    fall = 0.5 * (1.0 - erf(s))
    return p.omega_a_max * rise, p.omega_b1_peak * fall, p.omega_b2_peak * fall


def pulse_values(p: PulseSchedule, t):
    """``(omega_a, omega_b)``; ``omega_b`` is the Bob-1 coupling (shared by default)."""
    oa, ob1, _ = pulse_triplet(p, t)
    return oa, ob1


def _hamiltonians(p: PulseSchedule, times: np.ndarray) -> np.ndarray:
    oa, ob1, ob2 = pulse_triplet(p, times)
    h = np.zeros(np.shape(times) + (4, 4))
    h[..., C, A] = h[..., A, C] = oa
    h[..., C, B1] = h[..., B1, C] = ob1
    h[..., C, B2] = h[..., B2, C] = ob2
    return h


def hamiltonian_at(p: PulseSchedule, t: float) -> np.ndarray:
    return _hamiltonians(p, np.asarray(float(t)))


def dark_states_at(p: PulseSchedule, t: float) -> DarkStateBasis:
    oa, ob1, ob2 = (float(v) for v in pulse_triplet(p, t))
    if oa == 0.0 and ob1 == 0.0 and ob2 == 0.0:
        raise DegenerateBasisError(f"all couplings vanish at t={t}")

    def pair(ob: float, site: int) -> np.ndarray:
        v = np.zeros(4, dtype=complex)
        v[A], v[site] = ob, -oa
        return v / np.hypot(oa, ob)

    w = np.array([p.omega_b1_peak, p.omega_b2_peak])
    w = w / np.linalg.norm(w)
    ob_norm = np.hypot(ob1, ob2)
    d3 = np.zeros(4, dtype=complex)
    d3[A] = ob_norm
    d3[B1] = -oa * w[0]
    d3[B2] = -oa * w[1]
    d3 /= np.linalg.norm(d3)
    return DarkStateBasis(pair(ob1, B1), pair(ob2, B2), d3, float(t))


def _d3_stack(p: PulseSchedule, times: np.ndarray) -> np.ndarray:
    oa, ob1, ob2 = pulse_triplet(p, times)
    w = np.array([p.omega_b1_peak, p.omega_b2_peak])
    w = w / np.linalg.norm(w)
    d3 = np.zeros((len(times), 4))
    d3[:, A] = np.hypot(ob1, ob2)
    d3[:, B1] = -oa * w[0]
    d3[:, B2] = -oa * w[1]
    return d3 / np.linalg.norm(d3, axis=1, keepdims=True)


def target_superposition(p: PulseSchedule) -> np.ndarray:
    """The recipient superposition reached from A, ``(w1|B1> + w2|B2>)`` (4-vector)."""
    v = np.zeros(4, dtype=complex)
    v[B1], v[B2] = p.omega_b1_peak, p.omega_b2_peak
    return v / np.linalg.norm(v)


# -- propagation ---------------------------------------------------------------


def _step_propagators(p: PulseSchedule) -> tuple[np.ndarray, np.ndarray]:
    times = np.linspace(p.t_start, p.t_end, p.n_steps + 1)
    if p.t_end == p.t_start:
        return times[:1], np.zeros((0, 4, 4), dtype=complex)
    dt = times[1] - times[0]
    mids = 0.5 * (times[:-1] + times[1:])
    evals, evecs = np.linalg.eigh(_hamiltonians(p, mids))
    phases = np.exp(-1j * evals * dt)
    steps = np.einsum("kij,kj,klj->kil", evecs, phases, evecs)
    return times, steps


@functools.lru_cache(maxsize=32)
def _propagator_cached(p: PulseSchedule) -> np.ndarray:
    _, steps = _step_propagators(p)
    u = np.eye(4, dtype=complex)
    for step in steps:
        u = step @ u
    u.setflags(write=False)
    return u


def propagator(p: PulseSchedule) -> np.ndarray:
    """Time-ordered 4x4 bus propagator of the whole sweep (cached per schedule)."""
    return _propagator_cached(p).copy()


def evolve(p: PulseSchedule, s: HybridState) -> tuple[HybridState, Trajectory]:
    """Propagate ``s`` through the sweep, recording populations at every grid time.

    Each step applies the exact exponential of the Hamiltonian evaluated at
    the step midpoint, so the propagation is unitary by construction.
    """
    if s.bus_dim != 4:
        raise InvalidSizeError("adiabatic transport needs bus_dim = 4 (sites A, B1, B2, C)")
    times, steps = _step_propagators(p)
    m = s.bus_matrix().copy()
    pops = np.empty((len(times), 4))
    d3 = _d3_stack(p, times)
    overlap = np.empty(len(times))

    def record(k: int, m: np.ndarray) -> None:
        pops[k] = np.einsum("ij,ij->i", m.conj(), m).real
        amp = d3[k] @ m
        overlap[k] = float(np.vdot(amp, amp).real)

    record(0, m)
    for k, step in enumerate(steps, start=1):
        m = step @ m
        record(k, m)
    out = HybridState(4, s.n_qubits, m.reshape(-1) / np.linalg.norm(m), s.tol)
    return out, Trajectory(times, pops, overlap)


def adiabaticity_report(trajectory: Trajectory) -> tuple[float, float]:
    """``(max population on C, min overlap with the transport dark state)``."""
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    return float(trajectory.populations[:, C].max()), float(trajectory.d3_overlap.min())


def transfer_fidelity(p: PulseSchedule) -> float:
    """Fidelity of ``|A>`` after the sweep with the target recipient superposition."""
    start = np.zeros(4, dtype=complex)
    start[A] = 1.0
    if p.direction == "reverse":
        start = target_superposition(p)
        target = np.zeros(4, dtype=complex)
        target[A] = 1.0
    else:
        target = target_superposition(p)
    final = propagator(p) @ start
    return float(abs(np.vdot(target, final)) ** 2)
