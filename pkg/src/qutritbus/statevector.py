"""Exact dense simulation of (bus particle) x (N data qubits).

Basis ordering is bus-major: ``index = bus_site * 2**n + bits`` where
``bits`` is the qubit bitstring read with qubit 0 as the most significant
bit.  The bus has ``bus_dim`` = 3 sites (A, B1, B2) for ideal protocol
runs, or 4 (adding the central site C) for adiabatic-passage dynamics.

Every operation returns a new ``HybridState``; inputs are never mutated.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import (
    CapacityError,
    InvalidSizeError,
    NonUnitaryError,
    ProtocolError,
    QubitIndexError,
)
from .pauli import PauliString

MAX_QUBITS = 20
UNITARY_TOL = 1e-12
PROJECTION_FLOOR = 1e-12


class BusSite(enum.IntEnum):
    A = 0
    B1 = 1
    B2 = 2
    C = 3


SiteLike = Union[BusSite, str, int]


def as_site(site: SiteLike) -> BusSite:
    if isinstance(site, str):
        return BusSite[site.upper()]
    return BusSite(site)


@dataclass(frozen=True)
class HybridState:
    bus_dim: int
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)
    tol: float = 1e-9

    def __post_init__(self):
        if self.bus_dim not in (3, 4):
            raise InvalidSizeError("bus_dim must be 3 or 4")
        if self.n_qubits < 0:
            raise InvalidSizeError("n_qubits must be non-negative")
        if self.n_qubits > MAX_QUBITS:
            raise CapacityError(f"dense engine is capped at {MAX_QUBITS} qubits, got {self.n_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.bus_dim * 2**self.n_qubits,):
            raise InvalidSizeError(f"expected {self.bus_dim * 2**self.n_qubits} amplitudes, got {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > self.tol:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def bus_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to ``(bus_dim, 2**n)``."""
        return self.amplitudes.reshape(self.bus_dim, self.dim)

    def _with(self, amps: np.ndarray, renormalize: bool = False) -> HybridState:
        amps = amps.reshape(-1)
        if renormalize:
            amps = amps / np.linalg.norm(amps)
        return HybridState(self.bus_dim, self.n_qubits, amps, self.tol)

    def site_populations(self) -> np.ndarray:
        m = self.bus_matrix()
        return np.einsum("ij,ij->i", m.conj(), m).real

    def qubit_state(self, site: SiteLike = BusSite.A) -> np.ndarray:
        """Normalized qubit register conditioned on the bus at ``site``."""
        v = self.bus_matrix()[as_site(site)]
        return v / np.linalg.norm(v)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "bus_dim": self.bus_dim,
            "n_qubits": self.n_qubits,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> HybridState:
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(int(data["bus_dim"]), int(data["n_qubits"]), amps)

    @classmethod
    def from_json(cls, text: str) -> HybridState:
        return cls.from_dict(json.loads(text))


# -- helpers -------------------------------------------------------------------


def _check_qubit(s: HybridState, q: int) -> int:
    if not 0 <= int(q) < s.n_qubits:
        raise QubitIndexError(f"qubit {q} out of range for {s.n_qubits} qubits")
    return int(q)


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise InvalidSizeError(f"expected a {dim}x{dim} matrix, got {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(dim), rtol=0, atol=UNITARY_TOL):
        raise NonUnitaryError("matrix is not unitary")
    return u


def _apply_1q(block: np.ndarray, n: int, q: int, g: np.ndarray) -> np.ndarray:
    # block has shape (..., 2**n); act on qubit q (MSB = qubit 0)
    lead = block.shape[:-1]
    v = block.reshape(lead + (2**q, 2, 2 ** (n - q - 1)))
    v = np.einsum("ab,...ibj->...iaj", g, v)
    return v.reshape(lead + (2**n,))


def _pauli_action(p: PauliString, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (target_index, factor) so that ``P|b> = factor[b] |target[b]>``."""
    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    xmask = int(np.dot(p.x_bits.astype(np.int64), weights))
    zmask = int(np.dot(p.z_bits.astype(np.int64), weights))
    b = np.arange(2**n, dtype=np.int64)
    parity = np.bitwise_count(b & zmask) % 2
    n_y = int(np.count_nonzero(p.x_bits & p.z_bits))
    factor = (1j ** ((p.phase + n_y) % 4)) * np.where(parity == 1, -1.0, 1.0)
    return b ^ xmask, factor


def apply_pauli_vector(p: PauliString, v: np.ndarray) -> np.ndarray:
    """``P v`` for a qubit-register vector (or a ``(k, 2**n)`` stack)."""
    n = p.n
    target, factor = _pauli_action(p, n)
    out = np.empty_like(v, dtype=complex)
    out[..., target] = v * factor
    return out


# -- operations ----------------------------------------------------------------


def init_state(bus_dim: int, n_qubits: int, bus_site: SiteLike = BusSite.A, qubit_bits: str = "") -> HybridState:
    site = as_site(bus_site)
    if site >= bus_dim:
        raise InvalidSizeError(f"site {site.name} does not exist with bus_dim={bus_dim}")
    if len(qubit_bits) != n_qubits or any(c not in "01" for c in qubit_bits):
        raise InvalidSizeError(f"bitstring {qubit_bits!r} does not describe {n_qubits} qubits")
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"dense engine is capped at {MAX_QUBITS} qubits")
    amps = np.zeros(bus_dim * 2**n_qubits, dtype=complex)
    amps[site * 2**n_qubits + (int(qubit_bits, 2) if qubit_bits else 0)] = 1.0
    return HybridState(bus_dim, n_qubits, amps)


def from_qubit_vector(psi: np.ndarray, bus_dim: int = 3, bus_site: SiteLike = BusSite.A) -> HybridState:
    """Product state ``|site> (x) |psi>`` from a qubit register vector."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = int(round(np.log2(psi.size)))
    if 2**n != psi.size:
        raise InvalidSizeError("register length must be a power of two")
    psi = psi / np.linalg.norm(psi)
    amps = np.zeros((bus_dim, psi.size), dtype=complex)
    amps[as_site(bus_site)] = psi
    return HybridState(bus_dim, n, amps.reshape(-1))


def apply_bus_unitary(s: HybridState, u: np.ndarray) -> HybridState:
    u = _check_unitary(u, s.bus_dim)
    return s._with(u @ s.bus_matrix())


def apply_qubit_gate(s: HybridState, q: int, g: np.ndarray) -> HybridState:
    q = _check_qubit(s, q)
    g = _check_unitary(g, 2)
    return s._with(_apply_1q(s.bus_matrix(), s.n_qubits, q, g))


def apply_two_qubit_gate(s: HybridState, q1: int, q2: int, g: np.ndarray) -> HybridState:
    """Apply a 4x4 unitary on ``(q1, q2)`` (``q1`` is the high bit of ``g``)."""
    q1, q2 = _check_qubit(s, q1), _check_qubit(s, q2)
    if q1 == q2:
        raise QubitIndexError("two-qubit gate needs distinct qubits")
    g = _check_unitary(g, 4).reshape(2, 2, 2, 2)
    n = s.n_qubits
    v = s.bus_matrix().reshape((s.bus_dim,) + (2,) * n)
    axes = (1 + q1, 1 + q2)
    v = np.tensordot(g, v, axes=([2, 3], axes))
    v = np.moveaxis(v, (0, 1), axes)
    return s._with(v)


def apply_pauli(s: HybridState, p: PauliString) -> HybridState:
    if p.n != s.n_qubits:
        raise InvalidSizeError("size mismatch")
    return s._with(apply_pauli_vector(p, s.bus_matrix()))


def apply_controlled_from_site(s: HybridState, site: SiteLike, q: int, g: np.ndarray) -> HybridState:
    """Apply ``g`` to qubit ``q`` only on the bus-``site`` slice."""
    site = as_site(site)
    if site == BusSite.C:
        raise ProtocolError("site C cannot act as a control")
    if site >= s.bus_dim:
        raise InvalidSizeError(f"site {site.name} does not exist")
    q = _check_qubit(s, q)
    g = _check_unitary(g, 2)
    m = s.bus_matrix().copy()
    m[site] = _apply_1q(m[site], s.n_qubits, q, g)
    return s._with(m)


def bus_at_A_probability(s: HybridState) -> float:
    return float(s.site_populations()[BusSite.A])


def measure_bus_at_A(
    s: HybridState, rng: Optional[np.random.Generator] = None, forced: Optional[bool] = None
) -> tuple[bool, HybridState, float]:
    """Binary projective measurement {|A><A|, 1 - |A><A|} on the bus.

    Returns ``(at_A, post_state, probability_of_that_result)``.  ``forced``
    selects a branch instead of sampling; a zero-probability branch is an
    error.
    """
    p_a = min(max(bus_at_A_probability(s), 0.0), 1.0)
    if forced is None:
        if p_a >= 1.0 - PROJECTION_FLOOR:
            at_a = True
        elif p_a <= PROJECTION_FLOOR:
            at_a = False
        else:
            at_a = bool(rng.random() < p_a)
    else:
        at_a = bool(forced)
    prob = p_a if at_a else 1.0 - p_a
    if prob <= PROJECTION_FLOOR:
        raise ProtocolError("requested bus branch has zero probability")
    m = s.bus_matrix().copy()
    if at_a:
        m[1:] = 0
    else:
        m[BusSite.A] = 0
    return at_a, s._with(m, renormalize=True), prob


def measure_qubit(
    s: HybridState, q: int, rng: Optional[np.random.Generator] = None, forced: Optional[int] = None
) -> tuple[int, HybridState, float]:
    """Computational-basis measurement of qubit ``q``: ``(bit, post_state, probability)``."""
    q = _check_qubit(s, q)
    n = s.n_qubits
    v = s.bus_matrix().reshape(s.bus_dim, 2**q, 2, 2 ** (n - q - 1))
    p1 = float(np.vdot(v[:, :, 1, :], v[:, :, 1, :]).real)
    p1 = min(max(p1, 0.0), 1.0)
    if forced is None:
        if p1 <= PROJECTION_FLOOR:
            bit = 0
        elif p1 >= 1.0 - PROJECTION_FLOOR:
            bit = 1
        else:
            bit = int(rng.random() < p1)
    else:
        bit = int(forced)
    prob = p1 if bit else 1.0 - p1
    if prob <= PROJECTION_FLOOR:
        raise ProtocolError(f"qubit {q} outcome {bit} has zero probability")
    out = v.copy()
    out[:, :, 1 - bit, :] = 0
    return bit, s._with(out, renormalize=True), prob


def expectation_pauli(s: HybridState, p: PauliString) -> float:
    if p.n != s.n_qubits:
        raise InvalidSizeError(f"operator on {p.n} qubits, state has {s.n_qubits}")
    m = s.bus_matrix()
    return float(np.vdot(m, apply_pauli_vector(p, m)).real)


def project_pauli_oracle(s: HybridState, p: PauliString, eigenvalue: int) -> tuple[float, HybridState]:
    """Apply ``(1 + eigenvalue * P)/2`` directly: ``(probability, renormalized state)``."""
    if p.n != s.n_qubits:
        raise InvalidSizeError("size mismatch")
    if eigenvalue not in (1, -1):
        raise ValueError("eigenvalue must be +1 or -1")
    m = s.bus_matrix()
    proj = 0.5 * (m + eigenvalue * apply_pauli_vector(p, m))
    prob = float(np.vdot(proj, proj).real)
    if prob <= PROJECTION_FLOOR:
        raise ProtocolError(f"branch {eigenvalue:+d} of {p} has zero probability")
    return prob, s._with(proj, renormalize=True)


def reduced_bus_density(s: HybridState) -> np.ndarray:
    m = s.bus_matrix()
    return m @ m.conj().T


def bus_purity(s: HybridState) -> float:
    rho = reduced_bus_density(s)
    return float(np.trace(rho @ rho).real)


def fidelity(a: HybridState, b: HybridState) -> float:
    if (a.bus_dim, a.n_qubits) != (b.bus_dim, b.n_qubits):
        raise InvalidSizeError("states have different dimensions")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def vector_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2`` for normalized plain vectors."""
    return float(abs(np.vdot(a, b)) ** 2)
