"""Hypothesis strategies for random small circuits."""

import math

from hypothesis import strategies as st

from lfboson.circuit import Circuit, Gate, GateKind


@st.composite
def gates(draw, n_qubits: int):
    kind = draw(st.sampled_from(list(GateKind)))
    target = draw(st.integers(0, n_qubits - 1))
    others = [q for q in range(n_qubits) if q != target]
    ctrl_qubits = draw(st.lists(st.sampled_from(others), unique=True, max_size=len(others))) if others else []
    controls = tuple((q, draw(st.integers(0, 1))) for q in ctrl_qubits)
    angle = draw(st.floats(-2 * math.pi, 2 * math.pi)) if kind in (GateKind.RY, GateKind.PHASE) else 0.0
    return Gate(kind, target, controls, angle)


@st.composite
def circuits(draw, max_qubits: int = 5, max_gates: int = 12):
    n = draw(st.integers(1, max_qubits))
    gs = draw(st.lists(gates(n), max_size=max_gates))
    return Circuit(n, tuple(gs))
