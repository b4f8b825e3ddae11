"""N-qubit Pauli operators stored as X/Z bit masks with an exact phase.

A ``PauliString`` represents ``i**phase * s_0 (x) s_1 (x) ... (x) s_{n-1}``
where ``s_j`` is I, X, Y or Z according to the bit pair ``(x_j, z_j)``:
``(0,0)=I``, ``(1,0)=X``, ``(1,1)=Y``, ``(0,1)=Z``.  Y is the Hermitian
Pauli matrix, so every Hermitian Pauli operator has phase 0 or 2.

Qubit 0 is the leftmost character of the text label and the most
significant bit of a computational-basis index.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidOperatorError, InvalidSizeError

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}
_MINUS_SIGNS = ("-", "−")

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def product_phase(x1, z1, x2, z2) -> int:
    """Power of i picked up when multiplying single-qubit Paulis columnwise.

    Returns ``sum_j g_j mod 4`` where ``s1_j s2_j = i**g_j s3_j``.
    Arguments are equal-length integer/bool arrays.
    """
    x1 = np.asarray(x1, dtype=np.int8)
    z1 = np.asarray(z1, dtype=np.int8)
    x2 = np.asarray(x2, dtype=np.int8)
    z2 = np.asarray(z2, dtype=np.int8)
    g = np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where(
            x1 == 1,
            z2 * (2 * x2 - 1),
            np.where(z1 == 1, x2 * (1 - 2 * z2), 0),
        ),
    )
    return int(g.sum()) % 4


class PauliString:
    """An n-qubit Pauli operator with exact phase tracking.

    Instances are treated as immutable values; the bit arrays are
    read-only.
    """

    __slots__ = ("_x", "_z", "_phase")

    def __init__(self, x_bits: Iterable[int], z_bits: Iterable[int], phase: int = 0):
        x = np.array(list(x_bits) if not isinstance(x_bits, np.ndarray) else x_bits, dtype=bool)
        z = np.array(list(z_bits) if not isinstance(z_bits, np.ndarray) else z_bits, dtype=bool)
        if x.ndim != 1 or z.ndim != 1 or x.shape != z.shape:
            raise InvalidSizeError("x_bits and z_bits must be 1-D and of equal length")
        x.setflags(write=False)
        z.setflags(write=False)
        self._x = x
        self._z = z
        self._phase = int(phase) % 4

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(np.zeros(n, bool), np.zeros(n, bool))

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"+XZI"``, ``"-YY"`` or an unsigned ``"ZZ"``."""
        text = label.strip()
        phase = 0
        if text and text[0] == "+":
            text = text[1:]
        elif text and text[0] in _MINUS_SIGNS:
            phase = 2
            text = text[1:]
        try:
            bits = [_CHAR_TO_BITS[c] for c in text.upper()]
        except KeyError as exc:
            raise InvalidOperatorError(f"bad Pauli label {label!r}") from exc
        x = [b[0] for b in bits]
        z = [b[1] for b in bits]
        return cls(x, z, phase)

    @classmethod
    def from_sparse(cls, n: int, ops: Mapping[int, str], sign: int = 1) -> PauliString:
        """Build from ``{qubit: 'X'|'Y'|'Z'}``, e.g. ``from_sparse(4, {1: 'X', 2: 'X'})``."""
        x = np.zeros(n, bool)
        z = np.zeros(n, bool)
        for q, c in ops.items():
            if not 0 <= q < n:
                raise InvalidSizeError(f"qubit {q} out of range for n={n}")
            x[q], z[q] = _CHAR_TO_BITS[c.upper()]
        if sign not in (1, -1):
            raise InvalidOperatorError("sign must be +1 or -1")
        return cls(x, z, 0 if sign == 1 else 2)

    # -- accessors ---------------------------------------------------------

    @property
    def n(self) -> int:
        return self._x.shape[0]

    @property
    def x_bits(self) -> np.ndarray:
        return self._x

    @property
    def z_bits(self) -> np.ndarray:
        return self._z

    @property
    def phase(self) -> int:
        return self._phase

    @property
    def sign(self) -> int:
        if self._phase == 0:
            return 1
        if self._phase == 2:
            return -1
        raise InvalidOperatorError(f"{self!r} has imaginary phase")

    @property
    def is_hermitian(self) -> bool:
        return self._phase % 2 == 0

    def is_identity(self) -> bool:
        """True when every qubit carries I (phase ignored)."""
        return not (self._x.any() or self._z.any())

    def char(self, q: int) -> str:
        return _BITS_TO_CHAR[(int(self._x[q]), int(self._z[q]))]

    def support(self) -> list[int]:
        return [int(q) for q in np.flatnonzero(self._x | self._z)]

    def unsigned(self) -> PauliString:
        return PauliString(self._x, self._z, 0)

    # -- algebra -----------------------------------------------------------

    def commutes(self, other: PauliString) -> bool:
        self._check_size(other)
        return not (np.count_nonzero(self._x & other._z) + np.count_nonzero(self._z & other._x)) % 2

    def __mul__(self, other: PauliString) -> PauliString:
        self._check_size(other)
        phase = self._phase + other._phase + product_phase(self._x, self._z, other._x, other._z)
        return PauliString(self._x ^ other._x, self._z ^ other._z, phase)

    def __neg__(self) -> PauliString:
        return PauliString(self._x, self._z, self._phase + 2)

    def _check_size(self, other: PauliString) -> None:
        if other.n != self.n:
            raise InvalidSizeError(f"size mismatch: {self.n} vs {other.n}")

    def to_matrix(self) -> np.ndarray:
        """Dense 2**n x 2**n matrix, qubit 0 most significant.  For oracles only."""
        mat = np.array([[1.0 + 0j]])
        for q in range(self.n):
            mat = np.kron(mat, _PAULI_MATRICES[self.char(q)])
        return (1j ** self._phase) * mat

    # -- comparison / text -------------------------------------------------

    def _key(self):
        return (self._phase, self._x.tobytes(), self._z.tobytes())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return self.n == other.n and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def label(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self._phase]
        return prefix + "".join(self.char(q) for q in range(self.n))

    def __str__(self) -> str:
        return self.label()

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"
