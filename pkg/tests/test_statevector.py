import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutritbus import statevector as sv
from qutritbus.errors import CapacityError, InvalidSizeError, NonUnitaryError, ProtocolError, QubitIndexError
from qutritbus.pauli import PauliString
from qutritbus.qtp import stage_three, u_qtp
from qutritbus.statevector import BusSite

from conftest import H, X, Z, ket, label_matrix, random_qubit_vector

R2 = 1 / np.sqrt(2)


def bus_state(bus_amps, psi):
    """``sum_k bus_amps[k] |k> (x) psi`` as a HybridState."""
    bus = np.asarray(bus_amps, dtype=complex)
    return sv.HybridState(len(bus), int(np.log2(len(psi))), np.kron(bus, psi))


def test_init_state_at_alice():
    s = sv.init_state(3, 2, BusSite.A, "00")
    assert s.amplitudes[0] == 1
    assert np.count_nonzero(s.amplitudes) == 1


def test_init_state_bus_only():
    s = sv.init_state(4, 0, BusSite.A, "")
    assert s.amplitudes.tolist() == [1, 0, 0, 0]


def test_init_state_b1_one():
    s = sv.init_state(3, 1, BusSite.B1, "1")
    assert s.amplitudes.tolist() == [0, 0, 0, 1, 0, 0]


@pytest.mark.parametrize("args", [(3, 2, "C", "00"), (3, 2, "A", "0"), (3, 1, "A", "2"), (5, 1, "A", "0")])
def test_init_state_rejects_bad_input(args):
    with pytest.raises(InvalidSizeError):
        sv.init_state(*args)


def test_capacity_limit():
    with pytest.raises(CapacityError):
        sv.init_state(4, 21, BusSite.A, "0" * 21)


def test_unnormalized_state_rejected():
    with pytest.raises(ValueError):
        sv.HybridState(3, 0, np.array([1.0, 1.0, 0.0]))


def test_layout_is_bus_major_with_qubit_zero_most_significant():
    s = sv.init_state(3, 2, BusSite.B2, "10")
    assert np.flatnonzero(s.amplitudes).tolist() == [2 * 4 + 2]


def test_u_qtp_sends_alice_to_equal_superposition(rng):
    psi = random_qubit_vector(rng, 2)
    out = sv.apply_bus_unitary(sv.from_qubit_vector(psi), u_qtp())
    assert np.allclose(out.amplitudes, bus_state([0, R2, R2], psi).amplitudes)


def test_identity_bus_unitary(rng):
    s = sv.from_qubit_vector(random_qubit_vector(rng, 2))
    assert np.array_equal(sv.apply_bus_unitary(s, np.eye(3)).amplitudes, s.amplitudes)


def test_u_qtp_twice_restores_random_state(rng):
    m = rng.normal(size=12) + 1j * rng.normal(size=12)
    s = sv.HybridState(3, 2, m / np.linalg.norm(m))
    twice = sv.apply_bus_unitary(sv.apply_bus_unitary(s, u_qtp()), u_qtp())
    assert np.allclose(twice.amplitudes, s.amplitudes, atol=1e-12)
    assert sv.fidelity(twice, s) == pytest.approx(1.0, abs=1e-12)


def test_non_unitary_rejected():
    s = sv.init_state(3, 1, "A", "0")
    with pytest.raises(NonUnitaryError):
        sv.apply_bus_unitary(s, np.ones((3, 3)))
    with pytest.raises(NonUnitaryError):
        sv.apply_qubit_gate(s, 0, np.diag([1, 2]))
    with pytest.raises(InvalidSizeError):
        sv.apply_bus_unitary(s, np.eye(4))


@pytest.mark.parametrize("start, gate, want", [("0", H, "+"), ("+", Z, "-")])
def test_single_qubit_gates(start, gate, want):
    s = sv.apply_qubit_gate(sv.from_qubit_vector(ket(start)), 0, gate)
    assert np.allclose(s.qubit_state(), ket(want))


def test_x_on_first_qubit():
    s = sv.apply_qubit_gate(sv.init_state(3, 2, "A", "00"), 0, X)
    assert np.allclose(s.qubit_state(), ket("10"))


def test_qubit_index_checked():
    with pytest.raises(QubitIndexError):
        sv.apply_qubit_gate(sv.init_state(3, 2, "A", "00"), 2, X)


@pytest.mark.parametrize("q", [0, 1, 2])
def test_single_qubit_gate_matches_kronecker_oracle(rng, q):
    psi = random_qubit_vector(rng, 3)
    g = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    mats = [np.eye(2)] * 3
    mats[q] = g
    oracle = np.kron(np.kron(mats[0], mats[1]), mats[2]) @ psi
    out = sv.apply_qubit_gate(sv.from_qubit_vector(psi), q, g)
    assert np.allclose(out.qubit_state(), oracle)


def test_two_qubit_gate_matches_oracle(rng):
    psi = random_qubit_vector(rng, 3)
    g = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    # gate on (q2, q0): permute to (q2, q0, q1), apply g (x) I, permute back
    perm = np.transpose(psi.reshape(2, 2, 2), (2, 0, 1)).reshape(-1)
    applied = (np.kron(g, np.eye(2)) @ perm).reshape(2, 2, 2)
    oracle = np.transpose(applied, (1, 2, 0)).reshape(-1)
    out = sv.apply_two_qubit_gate(sv.from_qubit_vector(psi), 2, 0, g)
    assert np.allclose(out.qubit_state(), oracle)


def test_controlled_from_b1():
    s = sv.apply_controlled_from_site(bus_state([0, R2, R2], ket("00")), BusSite.B1, 0, X)
    want = (np.kron([0, 1, 0], ket("10")) + np.kron([0, 0, 1], ket("00"))) * R2
    assert np.allclose(s.amplitudes, want)


def test_controlled_does_nothing_when_bus_at_alice(rng):
    s = sv.from_qubit_vector(random_qubit_vector(rng, 2))
    assert np.array_equal(sv.apply_controlled_from_site(s, "B1", 0, X).amplitudes, s.amplitudes)


def test_controlled_z_from_b2():
    s = sv.apply_controlled_from_site(bus_state([0, R2, R2], ket("11")), BusSite.B2, 1, Z)
    assert np.allclose(s.amplitudes, bus_state([0, R2, -R2], ket("11")).amplitudes)


def test_site_c_is_not_a_control():
    with pytest.raises(ProtocolError):
        sv.apply_controlled_from_site(sv.init_state(4, 1, "A", "0"), BusSite.C, 0, X)


def test_controlled_commutes_with_bus_diagonal_on_other_sites(rng):
    m = rng.normal(size=12) + 1j * rng.normal(size=12)
    s = sv.HybridState(3, 2, m / np.linalg.norm(m))
    phases = np.diag(np.exp(1j * np.array([0.3, 0.0, -1.1])))
    ab = sv.apply_bus_unitary(sv.apply_controlled_from_site(s, "B1", 1, H), phases)
    ba = sv.apply_controlled_from_site(sv.apply_bus_unitary(s, phases), "B1", 1, H)
    assert np.allclose(ab.amplitudes, ba.amplitudes)


def test_measure_bus_at_alice_when_already_there(rng):
    s = sv.init_state(3, 2, "A", "00")
    at_a, out, prob = sv.measure_bus_at_A(s, rng)
    assert at_a and prob == 1.0
    assert np.array_equal(out.amplitudes, s.amplitudes)


def test_measure_bus_half_probability_for_xx_on_zero_state():
    mid = stage_three(sv.init_state(3, 2, "A", "00"), "XX", 0, 1)
    out = sv.apply_bus_unitary(mid, u_qtp())
    # projector-norm oracle: the A row of the bus matrix
    oracle = float(np.linalg.norm(out.bus_matrix()[0]) ** 2)
    assert oracle == pytest.approx(0.5, abs=1e-12)
    assert sv.bus_at_A_probability(out) == pytest.approx(oracle, abs=1e-15)


def test_measure_bus_in_antisymmetric_mode(rng):
    s = bus_state([0, R2, -R2], ket("01"))
    at_a, out, prob = sv.measure_bus_at_A(s, rng)
    assert not at_a and prob == 1.0
    assert np.allclose(out.amplitudes, s.amplitudes)


def test_forced_zero_probability_branch_raises():
    with pytest.raises(ProtocolError):
        sv.measure_bus_at_A(sv.init_state(3, 1, "A", "0"), forced=False)


def test_measure_qubit_eigenstate(rng):
    bit, out, prob = sv.measure_qubit(sv.init_state(3, 1, "A", "0"), 0, rng)
    assert (bit, prob) == (0, 1.0)
    assert np.allclose(out.qubit_state(), ket("0"))


def test_measure_qubit_born_frequencies():
    rng = np.random.default_rng(3)
    s = sv.from_qubit_vector(ket("+"))
    ones = sum(sv.measure_qubit(s, 0, rng)[0] for _ in range(10_000))
    assert abs(ones / 10_000 - 0.5) <= 0.02


@pytest.mark.parametrize("forced", [0, 1])
def test_measure_qubit_collapses_partner(forced):
    bell = sv.from_qubit_vector((ket("00") + ket("11")) * R2)
    bit, out, _ = sv.measure_qubit(bell, 0, forced=forced)
    assert bit == forced
    assert np.allclose(out.qubit_state(), ket(str(forced) * 2))


@pytest.mark.parametrize("state, label, want", [("00", "ZZ", 1.0), ("++", "XX", 1.0), ("01", "ZZ", -1.0), ("0+", "ZX", 1.0)])
def test_expectation_pauli_simple(state, label, want):
    assert sv.expectation_pauli(sv.from_qubit_vector(ket(state)), PauliString.from_label(label)) == pytest.approx(want)


@settings(max_examples=60, deadline=None)
@given(st.text("IXYZ", min_size=3, max_size=3), st.integers(0, 2**31), st.sampled_from(["+", "-"]))
def test_expectation_and_action_match_dense_matrix(label, seed, sign):
    psi = random_qubit_vector(np.random.default_rng(seed), 3)
    p = PauliString.from_label(sign + label)
    m = (1 if sign == "+" else -1) * label_matrix(label)
    s = sv.from_qubit_vector(psi)
    assert sv.expectation_pauli(s, p) == pytest.approx(float(np.vdot(psi, m @ psi).real), abs=1e-12)
    assert np.allclose(sv.apply_pauli(s, p).qubit_state(), m @ psi)


@pytest.mark.parametrize(
    "state, label, ev, prob, post",
    [
        ("00", "XX", 1, 0.5, (ket("00") + ket("11")) * R2),
        ("++", "ZZ", 1, 0.5, (ket("00") + ket("11")) * R2),
        ("++", "XX", 1, 1.0, ket("++")),
        ("++", "ZZ", -1, 0.5, (ket("01") + ket("10")) * R2),
    ],
)
def test_project_pauli_oracle(state, label, ev, prob, post):
    p, out = sv.project_pauli_oracle(sv.from_qubit_vector(ket(state)), PauliString.from_label(label), ev)
    assert p == pytest.approx(prob)
    assert sv.vector_fidelity(out.qubit_state(), post) == pytest.approx(1.0)
    assert sv.expectation_pauli(out, PauliString.from_label(label)) == pytest.approx(ev)


def test_project_pauli_oracle_zero_branch():
    with pytest.raises(ProtocolError):
        sv.project_pauli_oracle(sv.from_qubit_vector(ket("++")), PauliString.from_label("XX"), -1)


def test_bus_purity_product_state(rng):
    assert sv.bus_purity(sv.from_qubit_vector(random_qubit_vector(rng, 2))) == pytest.approx(1.0)


def test_bus_purity_mid_protocol_matches_reduced_density_oracle():
    mid = stage_three(sv.init_state(3, 2, "A", "00"), "XX", 0, 1)
    # explicit state: (|B1>|10> + |B2>|01>)/sqrt2, so rho_bus = diag(0, 1/2, 1/2)
    explicit = (np.kron([0, 1, 0], ket("10")) + np.kron([0, 0, 1], ket("01"))) * R2
    assert np.allclose(mid.amplitudes, explicit)
    m = explicit.reshape(3, 4)
    oracle = m @ m.conj().T
    assert np.allclose(sv.reduced_bus_density(mid), oracle)
    assert sv.bus_purity(mid) == pytest.approx(0.5)


def test_fidelity_examples(rng):
    s = sv.from_qubit_vector(random_qubit_vector(rng, 2))
    assert sv.fidelity(s, s) == pytest.approx(1.0)
    assert sv.fidelity(sv.init_state(3, 1, "A", "0"), sv.init_state(3, 1, "A", "1")) == 0.0
    assert sv.fidelity(s, s._with(-1j * s.amplitudes)) == pytest.approx(1.0)


def test_norm_drift_after_many_operations():
    rng = np.random.default_rng(17)
    s = sv.init_state(4, 3, "A", "000")
    gates = [H, X, Z, np.diag([1, np.exp(0.7j)])]
    bus_u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    for k in range(10_000):
        r = k % 3
        if r == 0:
            s = sv.apply_qubit_gate(s, int(rng.integers(3)), gates[int(rng.integers(4))])
        elif r == 1:
            s = sv.apply_controlled_from_site(s, int(rng.integers(3)), int(rng.integers(3)), H)
        else:
            s = sv.apply_bus_unitary(s, bus_u)
    assert abs(np.linalg.norm(s.amplitudes) - 1.0) <= 1e-9


def test_json_round_trip(rng):
    m = rng.normal(size=12) + 1j * rng.normal(size=12)
    s = sv.HybridState(3, 2, m / np.linalg.norm(m))
    back = sv.HybridState.from_json(s.to_json())
    assert np.array_equal(back.amplitudes, s.amplitudes)
