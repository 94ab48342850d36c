import math

import numpy as np
import pytest
from hypothesis import given, settings

from lfboson.circuit import (
    Circuit,
    Gate,
    GateKind,
    compose,
    controlled,
    decrement,
    gate_counts,
    global_phase_flip,
    increment,
    inverse,
    parse_gate,
    reflection_about_zero,
    value_controls,
)
from lfboson.simulator import StateVector, circuit_unitary, run
from oracles import controlled_gate_unitary, single_qubit_matrix
from strategies import circuits


def basis_map(circuit: Circuit, value: int) -> int:
    amps = np.zeros(1 << circuit.n_qubits, dtype=complex)
    amps[value] = 1.0
    out = run(StateVector(amps), circuit, in_place=True).amplitudes
    (hit,) = np.flatnonzero(np.abs(out) > 0.5)
    assert abs(out[hit]) == pytest.approx(1.0)
    return int(hit)


def reference_unitary(circuit: Circuit) -> np.ndarray:
    U = np.eye(1 << circuit.n_qubits, dtype=complex)
    for g in circuit.gates:
        mat = single_qubit_matrix(g.kind.value, g.angle)
        U = controlled_gate_unitary(circuit.n_qubits, g.target, g.controls, mat) @ U
    return U


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.X, 1, ((1, 1),))
    with pytest.raises(ValueError):
        Gate(GateKind.X, 0, ((1, 1), (1, 0)))
    with pytest.raises(ValueError):
        Gate(GateKind.X, 0, ((1, 2),))
    with pytest.raises(ValueError):
        Circuit(2, (Gate(GateKind.H, 2),))


def test_increment_examples():
    inc = increment([0, 1, 2])
    assert basis_map(inc, 3) == 4
    assert basis_map(inc, 7) == 0
    assert [g.controls for g in inc.gates] == [((0, 1), (1, 1)), ((0, 1),), ()]


def test_decrement_examples():
    dec = decrement([0, 1, 2])
    assert basis_map(dec, 4) == 3
    assert basis_map(dec, 0) == 7


@pytest.mark.parametrize("n", range(1, 9))
def test_increment_gate_count(n):
    assert len(increment(list(range(n)))) == n


@pytest.mark.parametrize("n", range(1, 5))
def test_adder_and_subtractor_exhaustive(n):
    inc, dec = increment(list(range(n))), decrement(list(range(n)))
    for r in range(1 << n):
        assert basis_map(inc, r) == (r + 1) % (1 << n)
        assert basis_map(dec, r) == (r - 1) % (1 << n)
        assert basis_map(compose(inc, dec), r) == r


def test_increment_on_scattered_register_leaves_other_qubits():
    inc = increment([3, 1], n_qubits=4)
    # register value = bit3 + 2*bit1; bit0 and bit2 are spectators
    assert basis_map(inc, 0b0101) == 0b1101
    assert basis_map(inc, 0b1111) == 0b0101


def test_empty_register_rejected():
    with pytest.raises(ValueError):
        increment([])
    with pytest.raises(ValueError):
        decrement([])


def test_controlled_adds_binary_pattern():
    inc = increment([0, 1], n_qubits=5)
    c = controlled(inc, value_controls([2, 3, 4], 5))
    for g, orig in zip(c.gates, inc.gates):
        assert g.controls == orig.controls + ((2, 1), (3, 0), (4, 1))
    assert controlled(inc, []) == inc
    twice = controlled(controlled(inc, [(2, 1)]), [(3, 0)])
    assert twice == controlled(inc, [(2, 1), (3, 0)])


def test_controlled_overlap_rejected():
    with pytest.raises(ValueError):
        controlled(increment([0, 1]), [(1, 1)])


def test_value_controls_range():
    assert value_controls([4, 7], 2) == ((4, 0), (7, 1))
    with pytest.raises(ValueError):
        value_controls([0, 1], 4)


def test_inverse_examples():
    c = Circuit(2, (Gate(GateKind.RY, 0, (), 0.3), Gate(GateKind.PHASE, 1, ((0, 0),), 1.1), Gate(GateKind.H, 0)))
    inv = inverse(c)
    assert inv.gates[0] == Gate(GateKind.H, 0)
    assert inv.gates[1].angle == -1.1 and inv.gates[1].controls == ((0, 0),)
    assert inv.gates[2] == Gate(GateKind.RY, 0, (), -0.3)
    assert inverse(inv) == c


@settings(max_examples=80, deadline=None)
@given(circuits())
def test_random_circuit_unitary_matches_matrix_product(c):
    U = circuit_unitary(c)
    np.testing.assert_allclose(U, reference_unitary(c), atol=1e-12)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_inverse_undoes_circuit(c):
    rng = np.random.default_rng(len(c))
    psi = rng.normal(size=1 << c.n_qubits) + 1j * rng.normal(size=1 << c.n_qubits)
    psi /= np.linalg.norm(psi)
    out = run(run(StateVector(psi), c), inverse(c)).amplitudes
    np.testing.assert_allclose(out, psi, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_text_round_trip(c):
    again = Circuit.from_text(c.to_text())
    assert again == c


def test_parse_gate_errors():
    with pytest.raises(ValueError):
        parse_gate("CNOT t=1 c=[0:1]")
    with pytest.raises(ValueError):
        parse_gate("RY t=1 c=[]")


def test_phase_gate_acts_on_zero():
    U = circuit_unitary(Circuit(1, (Gate(GateKind.PHASE, 0, (), math.pi / 2),)))
    np.testing.assert_allclose(U, np.diag([1j, 1.0]), atol=1e-15)


def test_global_phase_flip_is_minus_identity():
    np.testing.assert_allclose(circuit_unitary(global_phase_flip(0, 1)), -np.eye(2), atol=1e-15)
    c = controlled(global_phase_flip(0, 2), [(1, 1)])
    np.testing.assert_allclose(circuit_unitary(c), np.diag([1, 1, -1, -1]), atol=1e-15)


@pytest.mark.parametrize("qubits,n", [([0], 1), ([0, 1], 2), ([1, 2, 3], 4), ([0, 2, 4], 5)])
def test_reflection_about_zero(qubits, n):
    R = circuit_unitary(reflection_about_zero(qubits, n))
    mask = sum(1 << q for q in qubits)
    want = np.diag([1.0 if i & mask == 0 else -1.0 for i in range(1 << n)])
    np.testing.assert_allclose(R, want, atol=1e-15)
    np.testing.assert_allclose(R @ R, np.eye(1 << n), atol=1e-15)


def test_gate_counts():
    c = compose(increment([0, 1, 2]), Circuit(3, (Gate(GateKind.RY, 0, (), 0.1),)))
    assert gate_counts(c) == {"X": 3, "RY": 1, "total": 4}
