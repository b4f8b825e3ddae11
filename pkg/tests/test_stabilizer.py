import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutritbus.errors import ContradictionError, InvalidOperatorError, InvalidSizeError, QubitIndexError
from qutritbus.pauli import PauliString
from qutritbus.stabilizer import (
    StabilizerTableau,
    apply_clifford,
    canonical_form,
    gf2_rank,
    groups_equal,
    measure_pauli,
    stabilizes,
    tableau_from_zero_state,
)
from qutritbus.synthesis import cluster_tableau

from conftest import H, X, Z

S = np.diag([1, 1j])
GATES_1Q = {"H": H, "X": X, "Z": Z, "S": S, "SDG": S.conj(), "Y": np.array([[0, -1j], [1j, 0]])}
GATES_2Q = {
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
ALL_TWO_QUBIT_PAULIS = ["".join(p) for p in itertools.product("IXYZ", repeat=2) if "".join(p) != "II"]


def gen_set(t):
    return {g.label() for g in t.generators}


def tableau_containing(label: str) -> StabilizerTableau:
    """A tableau whose first generator is ``label`` (found by search for a commuting partner)."""
    p = PauliString.from_label(label)
    if p.n == 1:
        return StabilizerTableau.from_generators([p])
    for other in ALL_TWO_QUBIT_PAULIS:
        q = PauliString.from_label(other)
        if q.commutes(p) and q.unsigned() != p.unsigned():
            return StabilizerTableau.from_generators([p, q])
    raise AssertionError(label)


@pytest.mark.parametrize(
    "n, expected",
    [(4, {"+ZIII", "+IZII", "+IIZI", "+IIIZ"}), (1, {"+Z"}), (2, {"+ZI", "+IZ"})],
)
def test_zero_state_generators(n, expected):
    t = tableau_from_zero_state(n)
    assert gen_set(t) == expected
    t.validate()


def test_zero_state_rejects_empty():
    with pytest.raises(InvalidSizeError):
        tableau_from_zero_state(0)


def test_hadamard_swaps_x_and_z():
    t = StabilizerTableau.from_generators(["XIII", "IZII", "IIZI", "IIIZ"])
    out = apply_clifford(t, "H", 0)
    assert gen_set(out) == {"+ZIII", "+IZII", "+IIZI", "+IIIZ"}


def test_x_gate_flips_signs_of_z_and_y_rows():
    t = StabilizerTableau.from_generators(["ZI", "IX"])
    t = apply_clifford(t, "H", 1)
    t = apply_clifford(t, "CNOT", (1, 0))  # generators now mix Z and Y-type content on qubit 0
    before = {g.unsigned().label(): g.sign for g in t.generators}
    after = apply_clifford(t, "X", 0)
    for g in after.generators:
        flips = g.char(0) in "ZY"
        assert g.sign == before[g.unsigned().label()] * (-1 if flips else 1)


def test_cz_on_x_plus_state():
    t = StabilizerTableau.from_generators(["XI", "IZ"])
    assert gen_set(apply_clifford(t, "CZ", (0, 1))) == {"+XZ", "+IZ"}


@pytest.mark.parametrize("gate", sorted(GATES_1Q))
@pytest.mark.parametrize("label", ["X", "Y", "Z", "-X", "-Y", "-Z"])
def test_single_qubit_conjugation_matches_matrix(gate, label):
    t = tableau_containing(label)
    g = GATES_1Q[gate]
    want = g @ PauliString.from_label(label).to_matrix() @ g.conj().T
    got = apply_clifford(t, gate, 0).generators[0]
    assert np.allclose(got.to_matrix(), want)


@pytest.mark.parametrize("gate", sorted(GATES_2Q))
@pytest.mark.parametrize("label", ALL_TWO_QUBIT_PAULIS)
@pytest.mark.parametrize("targets", [(0, 1), (1, 0)])
def test_two_qubit_conjugation_matches_matrix(gate, label, targets):
    t = tableau_containing(label)
    g = GATES_2Q[gate]
    if targets == (1, 0):
        swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
        g = swap @ g @ swap
    want = g @ PauliString.from_label(label).to_matrix() @ g.conj().T
    out = apply_clifford(t, gate, targets)
    out.validate()
    assert np.allclose(out.generators[0].to_matrix(), want)


def test_destabilizers_follow_gates():
    t = apply_clifford(tableau_from_zero_state(2), "H", 0)
    assert [d.label() for d in t.destabilizers] == ["+ZI", "+IX"]


@pytest.mark.parametrize("bad", [("H", 3), ("CNOT", (0, 0)), ("CNOT", (0,)), ("H", (0, 1))])
def test_bad_targets(bad):
    with pytest.raises(QubitIndexError):
        apply_clifford(tableau_from_zero_state(2), *bad)


def test_unknown_gate():
    with pytest.raises(InvalidOperatorError):
        apply_clifford(tableau_from_zero_state(2), "T", 0)


def test_measure_ixxi_on_zero_state():
    t = tableau_from_zero_state(4)
    outcome, det, out = measure_pauli(t, PauliString.from_label("IXXI"), forced=1)
    assert (outcome, det) == (1, False)
    out.validate()
    assert groups_equal(out, StabilizerTableau.from_generators(["IXXI", "IZZI", "IIIZ", "ZIII"]))


def test_measure_eigenstate_is_deterministic():
    t = tableau_from_zero_state(1)
    outcome, det, out = measure_pauli(t, PauliString.from_label("Z"), np.random.default_rng(0))
    assert (outcome, det) == (1, True)
    assert out.labels() == t.labels()


def test_repeated_measurement_is_deterministic(rng):
    t = tableau_from_zero_state(2)
    xx = PauliString.from_label("XX")
    first, det1, t = measure_pauli(t, xx, rng)
    second, det2, _ = measure_pauli(t, xx, rng)
    assert not det1 and det2
    assert first == second


def test_group_element_reports_its_sign_and_keeps_canonical_form():
    t = StabilizerTableau.from_generators(["XX", "-ZZ"])
    for label, sign in [("XX", 1), ("ZZ", -1), ("YY", 1)]:
        outcome, det, out = measure_pauli(t, PauliString.from_label(label))
        assert det and outcome == sign
        assert canonical_form(out).labels() == canonical_form(t).labels()
    assert stabilizes(t, PauliString.from_label("YY")) == 1
    assert stabilizes(t, PauliString.from_label("XI")) is None


def test_forced_contradiction_raises():
    with pytest.raises(ContradictionError):
        measure_pauli(tableau_from_zero_state(1), PauliString.from_label("Z"), forced=-1)


@pytest.mark.parametrize("label", ["II", "XY"])
def test_measure_rejects_identity_and_nonhermitian(label):
    p = PauliString.from_label(label)
    if label == "XY":
        p = p * PauliString.from_label("ZI")  # X*Z = -iY: imaginary phase
    with pytest.raises(InvalidOperatorError):
        measure_pauli(tableau_from_zero_state(2), p, forced=1)


def test_measure_random_outcome_needs_rng():
    with pytest.raises(ValueError):
        measure_pauli(tableau_from_zero_state(1), PauliString.from_label("X"))


def test_random_outcome_frequencies():
    rng = np.random.default_rng(5)
    t = apply_clifford(apply_clifford(tableau_from_zero_state(3), "H", 0), "CNOT", (0, 1))
    p = PauliString.from_label("XIZ")
    plus = sum(measure_pauli(t, p, rng)[0] == 1 for _ in range(10_000))
    assert abs(plus / 10_000 - 0.5) <= 0.02


def test_canonical_form_ignores_generator_order():
    a = StabilizerTableau.from_generators(["ZI", "IZ"])
    b = StabilizerTableau.from_generators(["ZZ", "ZI"])
    c = StabilizerTableau.from_generators(["IZ", "ZZ"])
    assert canonical_form(a).labels() == canonical_form(b).labels() == canonical_form(c).labels()


def test_products_of_generators_stabilize_too():
    a = StabilizerTableau.from_generators(["IXXI", "XIII", "IZZI", "IIIZ"])
    b = StabilizerTableau.from_generators(["XXXI", "XIII", "IZZI", "IIIZ"])
    assert canonical_form(a).labels() == canonical_form(b).labels()


def test_canonical_form_invariant_under_row_mixing():
    rng = np.random.default_rng(11)
    base = cluster_tableau(5)
    reference = canonical_form(base).labels()
    for _ in range(100):
        gens = list(base.generators)
        for _ in range(10):
            i, j = rng.choice(5, size=2, replace=False)
            gens[i] = gens[i] * gens[j]
        rng.shuffle(gens)
        assert canonical_form(StabilizerTableau.from_generators(gens)).labels() == reference


def test_groups_equal():
    t = cluster_tableau(4)
    assert groups_equal(t, t)
    assert groups_equal(t, StabilizerTableau.from_generators(["XZII", "ZXZI", "IZXZ", "IIZX"]))
    assert not groups_equal(tableau_from_zero_state(4), t)
    assert not groups_equal(StabilizerTableau.from_generators(["ZZ", "XX"]), StabilizerTableau.from_generators(["-ZZ", "XX"]))


@pytest.mark.parametrize(
    "gens",
    [["XI", "ZI"], ["XX", "XX"], ["ZZ", "-ZZ"], ["XX"], ["X", "Z"]],
)
def test_from_generators_rejects_invalid_sets(gens):
    with pytest.raises((InvalidOperatorError, InvalidSizeError)):
        StabilizerTableau.from_generators(gens)


def test_json_round_trip():
    t = cluster_tableau(3)
    back = StabilizerTableau.from_json(t.to_json())
    assert back.labels() == t.labels()


def test_gf2_rank():
    assert gf2_rank(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 2
    assert gf2_rank(np.eye(4, dtype=int)) == 4


ops = st.lists(
    st.one_of(
        st.tuples(st.sampled_from(sorted(GATES_1Q)), st.integers(0, 3)),
        st.tuples(st.sampled_from(sorted(GATES_2Q)), st.permutations(range(4)).map(lambda p: tuple(p[:2]))),
        st.tuples(st.just("M"), st.text("IXYZ", min_size=4, max_size=4).filter(lambda s: s != "IIII"), st.sampled_from([1, -1])),
    ),
    max_size=30,
)


@settings(max_examples=150, deadline=None)
@given(ops)
def test_invariants_hold_after_every_operation(seq):
    t = tableau_from_zero_state(4)
    for op in seq:
        if op[0] == "M":
            p = PauliString.from_label(op[1])
            known = stabilizes(t, p)
            _, _, t = measure_pauli(t, p, forced=known if known is not None else op[2])
        else:
            t = apply_clifford(t, op[0], op[1])
        t.validate()
        # -I never appears: the canonical generators are a basis with real signs
        assert all(g.sign in (1, -1) for g in canonical_form(t).generators)
