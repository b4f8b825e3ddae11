"""Symbolic stabilizer-state engine.

The tableau keeps ``2n`` Pauli rows: rows ``0..n-1`` are destabilizers
(anticommuting partners, one per generator) and rows ``n..2n-1`` are the
stabilizer generators.  Only the generators are part of the public value;
the destabilizers let ``measure_pauli`` decide determinism and the
deterministic sign in O(n^2) without searching the group.

All public functions return new tableaux and never mutate their inputs.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    ContradictionError,
    InvalidOperatorError,
    InvalidSizeError,
    QubitIndexError,
)
from .pauli import PauliString, product_phase

ONE_QUBIT_GATES = frozenset({"H", "X", "Y", "Z", "S", "SDG"})
TWO_QUBIT_GATES = frozenset({"CNOT", "CZ"})
_ALIASES = {"CX": "CNOT", "S_DAG": "SDG", "SDAG": "SDG"}


# -- GF(2) helpers -----------------------------------------------------------


def gf2_rank(mat: np.ndarray) -> int:
    m = np.array(mat, dtype=bool)
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        hits = m[:, c].copy()
        hits[rank] = False
        m[hits] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _right_inverse(a: np.ndarray) -> np.ndarray:
    """Y with ``a @ Y = I`` over GF(2) for a full-row-rank ``a`` (r x c)."""
    rows, cols = a.shape
    aug = np.concatenate([np.array(a, dtype=bool), np.eye(rows, dtype=bool)], axis=1)
    pivots = []
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if aug[r, c]), None)
        if pivot is None:
            continue
        aug[[rank, pivot]] = aug[[pivot, rank]]
        hits = aug[:, c].copy()
        hits[rank] = False
        aug[hits] ^= aug[rank]
        pivots.append(c)
        rank += 1
    if rank != rows:
        raise InvalidOperatorError("generators are not independent")
    y = np.zeros((cols, rows), dtype=bool)
    for k, c in enumerate(pivots):
        y[c] = aug[k, cols:]
    return y


# -- tableau -----------------------------------------------------------------


class StabilizerTableau:
    """Stabilizer generators plus destabilizer bookkeeping rows.

    Attributes
    ----------
    n : int
        Number of qubits.
    x, z : ndarray of bool, shape (2n, n)
        X and Z components; rows ``n..2n-1`` are the generators.
    phase : ndarray of int, shape (2n,)
        Power of i for each row (generators always carry 0 or 2).
    """

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, phase: np.ndarray):
        self.n = n
        self.x = x
        self.z = z
        self.phase = phase

    def copy(self) -> StabilizerTableau:
        return StabilizerTableau(self.n, self.x.copy(), self.z.copy(), self.phase.copy())

    # -- construction ------------------------------------------------------

    @classmethod
    def zero_state(cls, n: int) -> StabilizerTableau:
        if n < 1:
            raise InvalidSizeError("a tableau needs at least one qubit")
        x = np.zeros((2 * n, n), dtype=bool)
        z = np.zeros((2 * n, n), dtype=bool)
        x[np.arange(n), np.arange(n)] = True
        z[n + np.arange(n), np.arange(n)] = True
        return cls(n, x, z, np.zeros(2 * n, dtype=np.int64))

    @classmethod
    def from_generators(cls, generators: Sequence[Union[PauliString, str]]) -> StabilizerTableau:
        """Tableau for the state stabilized by ``generators``.

        The generators must be n independent, pairwise-commuting Hermitian
        Pauli strings on n qubits.  Destabilizers are solved for over GF(2).
        """
        gens = [g if isinstance(g, PauliString) else PauliString.from_label(g) for g in generators]
        n = len(gens)
        if n < 1:
            raise InvalidSizeError("need at least one generator")
        if any(g.n != n for g in gens):
            raise InvalidSizeError(f"expected {n} generators on {n} qubits")
        for g in gens:
            if not g.is_hermitian:
                raise InvalidOperatorError(f"generator {g} is not Hermitian")
        for i in range(n):
            for j in range(i + 1, n):
                if not gens[i].commutes(gens[j]):
                    raise InvalidOperatorError(f"{gens[i]} and {gens[j]} anticommute")
        sx = np.array([g.x_bits for g in gens], dtype=bool)
        sz = np.array([g.z_bits for g in gens], dtype=bool)
        # <d, s> = d_x.s_z + d_z.s_x, so solve [sz | sx] d^T = e_i
        d = _right_inverse(np.concatenate([sz, sx], axis=1)).T
        dx = d[:, :n].copy()
        dz = d[:, n:].copy()
        for i in range(n):
            for j in range(i):
                if (np.count_nonzero(dx[i] & dz[j]) + np.count_nonzero(dz[i] & dx[j])) % 2:
                    dx[i] ^= sx[j]
                    dz[i] ^= sz[j]
        x = np.concatenate([dx, sx])
        z = np.concatenate([dz, sz])
        phase = np.zeros(2 * n, dtype=np.int64)
        phase[n:] = [g.phase for g in gens]
        return cls(n, x, z, phase)

    # -- views -------------------------------------------------------------

    def row(self, i: int) -> PauliString:
        return PauliString(self.x[i].copy(), self.z[i].copy(), int(self.phase[i]))

    @property
    def generators(self) -> list[PauliString]:
        return [self.row(self.n + k) for k in range(self.n)]

    @property
    def destabilizers(self) -> list[PauliString]:
        return [self.row(k) for k in range(self.n)]

    def labels(self) -> list[str]:
        return [g.label() for g in self.generators]

    def to_json(self) -> str:
        return json.dumps(self.labels())

    @classmethod
    def from_json(cls, text: str) -> StabilizerTableau:
        return cls.from_generators(json.loads(text))

    def __repr__(self) -> str:
        return f"StabilizerTableau({self.labels()})"

    def validate(self) -> None:
        """Assert the group invariants; raises AssertionError on violation."""
        n = self.n
        sx, sz = self.x[n:], self.z[n:]
        sym = (sx.astype(np.int64) @ sz.T.astype(np.int64) + sz.astype(np.int64) @ sx.T.astype(np.int64)) % 2
        assert not sym.any(), "generators do not commute"
        assert gf2_rank(np.concatenate([sx, sz], axis=1)) == n, "generators are dependent"
        assert np.all(self.phase[n:] % 2 == 0), "generator with imaginary phase"
        dx, dz = self.x[:n], self.z[:n]
        cross = (dx.astype(np.int64) @ sz.T.astype(np.int64) + dz.astype(np.int64) @ sx.T.astype(np.int64)) % 2
        assert np.array_equal(cross, np.eye(n, dtype=np.int64)), "destabilizer pairing broken"

    # -- in-place primitives -------------------------------------------------

    def _rowmul(self, h: int, i: int) -> None:
        # row_h <- row_i * row_h
        g = product_phase(self.x[i], self.z[i], self.x[h], self.z[h])
        self.phase[h] = (self.phase[h] + self.phase[i] + g) % 4
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _anticommuting_rows(self, p: PauliString) -> np.ndarray:
        s = np.count_nonzero(self.x & p.z_bits, axis=1) + np.count_nonzero(self.z & p.x_bits, axis=1)
        return (s % 2).astype(bool)

    def _gate(self, gate: str, a: int, b: Optional[int] = None) -> None:
        x, z, ph = self.x, self.z, self.phase
        if gate == "H":
            ph += 2 * (x[:, a] & z[:, a])
            x[:, a], z[:, a] = z[:, a].copy(), x[:, a].copy()
        elif gate == "S":
            ph += 2 * (x[:, a] & z[:, a])
            z[:, a] ^= x[:, a]
        elif gate == "SDG":
            ph += 2 * (x[:, a] & ~z[:, a])
            z[:, a] ^= x[:, a]
        elif gate == "X":
            ph += 2 * z[:, a]
        elif gate == "Z":
            ph += 2 * x[:, a]
        elif gate == "Y":
            ph += 2 * (x[:, a] ^ z[:, a])
        elif gate == "CNOT":
            ph += 2 * (x[:, a] & z[:, b] & ~(x[:, b] ^ z[:, a]))
            x[:, b] ^= x[:, a]
            z[:, a] ^= z[:, b]
        elif gate == "CZ":
            self._gate("H", b)
            self._gate("CNOT", a, b)
            self._gate("H", b)
            return
        else:
            raise InvalidOperatorError(f"unknown gate {gate!r}")
        ph %= 4


def _normalize_gate(gate: str) -> str:
    g = gate.upper()
    return _ALIASES.get(g, g)


def _check_targets(n: int, gate: str, targets) -> tuple[int, ...]:
    if isinstance(targets, (int, np.integer)):
        targets = (int(targets),)
    targets = tuple(int(t) for t in targets)
    arity = 1 if gate in ONE_QUBIT_GATES else 2
    if len(targets) != arity:
        raise QubitIndexError(f"{gate} takes {arity} target(s), got {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise QubitIndexError(f"qubit {t} out of range for n={n}")
    if arity == 2 and targets[0] == targets[1]:
        raise QubitIndexError(f"{gate} needs two distinct qubits")
    return targets


# -- public operations ---------------------------------------------------------


def tableau_from_zero_state(n: int) -> StabilizerTableau:
    """Tableau of ``|0...0>``: generators ``Z_j`` with sign +1."""
    return StabilizerTableau.zero_state(n)


def apply_clifford(t: StabilizerTableau, gate: str, targets) -> StabilizerTableau:
    """Conjugate every row by ``gate`` (one of H, X, Y, Z, S, SDG, CNOT, CZ).

    For CNOT the first target is the control.
    """
    g = _normalize_gate(gate)
    if g not in ONE_QUBIT_GATES | TWO_QUBIT_GATES:
        raise InvalidOperatorError(f"unknown gate {gate!r}")
    qs = _check_targets(t.n, g, targets)
    out = t.copy()
    out._gate(g, *qs)
    return out


def apply_pauli(t: StabilizerTableau, p: PauliString) -> StabilizerTableau:
    """Apply the Pauli operator ``p`` as a gate (conjugation, signs only)."""
    if p.n != t.n:
        raise InvalidSizeError("size mismatch")
    out = t.copy()
    flips = out._anticommuting_rows(p)
    out.phase = (out.phase + 2 * flips) % 4
    return out


def measure_pauli(
    t: StabilizerTableau,
    p: PauliString,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[int] = None,
) -> tuple[int, bool, StabilizerTableau]:
    """Projectively measure the Hermitian Pauli ``p``.

    Returns ``(outcome, deterministic, new_tableau)``.  When ``p`` (up to
    sign) is already in the group the outcome is the sign it carries there
    and the tableau is returned unchanged.  Otherwise the outcome is drawn
    uniformly from ``rng`` (or taken from ``forced``) and the first
    anticommuting generator is replaced by ``outcome * p``.
    """
    if p.n != t.n:
        raise InvalidSizeError(f"operator on {p.n} qubits, tableau has {t.n}")
    if p.is_identity():
        raise InvalidOperatorError("cannot measure the identity")
    if not p.is_hermitian:
        raise InvalidOperatorError(f"{p} is not Hermitian")
    if forced is not None and forced not in (1, -1):
        raise InvalidOperatorError("forced outcome must be +1 or -1")
    n = t.n
    anti = t._anticommuting_rows(p)
    stab_anti = np.flatnonzero(anti[n:])
    if stab_anti.size == 0:
        acc = StabilizerTableau(n, np.zeros((1, n), bool), np.zeros((1, n), bool), np.zeros(1, np.int64))
        for i in np.flatnonzero(anti[:n]):
            g = product_phase(t.x[n + i], t.z[n + i], acc.x[0], acc.z[0])
            acc.phase[0] = (acc.phase[0] + t.phase[n + i] + g) % 4
            acc.x[0] ^= t.x[n + i]
            acc.z[0] ^= t.z[n + i]
        assert np.array_equal(acc.x[0], p.x_bits) and np.array_equal(acc.z[0], p.z_bits)
        outcome = 1 if (p.phase - acc.phase[0]) % 4 == 0 else -1
        if forced is not None and forced != outcome:
            raise ContradictionError(f"{p} is deterministic with outcome {outcome:+d}, forced {forced:+d}")
        return outcome, True, t.copy()

    if forced is not None:
        outcome = forced
    else:
        if rng is None:
            raise ValueError("random outcome requires an rng")
        outcome = 1 if rng.random() < 0.5 else -1
    out = t.copy()
    k = n + int(stab_anti[0])
    for i in np.flatnonzero(anti):
        if i != k:
            out._rowmul(int(i), k)
    out.x[k - n] = out.x[k]
    out.z[k - n] = out.z[k]
    out.phase[k - n] = out.phase[k]
    out.x[k] = p.x_bits
    out.z[k] = p.z_bits
    out.phase[k] = (p.phase + (0 if outcome == 1 else 2)) % 4
    return outcome, False, out


def canonical_form(t: StabilizerTableau) -> StabilizerTableau:
    """Reduced row-echelon generators of the same group.

    Columns are ordered X-block (qubit 0..n-1) then Z-block; pivots are
    taken column by column and every other row is cleared in the pivot
    column.  Signs follow from exact row products, so two tableaux
    generate the same group iff their canonical generators coincide.
    """
    n = t.n
    work = StabilizerTableau(n, t.x[n:].copy(), t.z[n:].copy(), t.phase[n:].copy())
    r = 0
    for c in range(2 * n):
        col = work.x[:, c] if c < n else work.z[:, c - n]
        pivot = next((i for i in range(r, n) if col[i]), None)
        if pivot is None:
            continue
        if pivot != r:
            for arr in (work.x, work.z, work.phase):
                arr[[r, pivot]] = arr[[pivot, r]]
        for i in range(n):
            col = work.x[:, c] if c < n else work.z[:, c - n]
            if i != r and col[i]:
                work._rowmul(i, r)
        r += 1
        if r == n:
            break
    return StabilizerTableau.from_generators([work.row(i) for i in range(n)])


def groups_equal(a: StabilizerTableau, b: StabilizerTableau) -> bool:
    if a.n != b.n:
        raise InvalidSizeError(f"size mismatch: {a.n} vs {b.n}")
    return canonical_form(a).labels() == canonical_form(b).labels()


def stabilizes(t: StabilizerTableau, p: PauliString) -> Optional[int]:
    """Sign with which ``p`` lies in the group, or None if it does not."""
    if t._anticommuting_rows(p)[t.n :].any():
        return None
    try:
        outcome, det, _ = measure_pauli(t, p)
    except InvalidOperatorError:
        return 1 if p.is_identity() and p.phase == 0 else None
    return outcome if det else None
