"""Noiseless statevector engine for multi-controlled gate circuits.

Amplitudes live in a ``(2,) * n`` view of a flat complex array; qubit ``q``
is bit ``q`` of the flat index.  A controlled gate touches only the slice
where every control qubit matches its polarity, obtained by basic indexing,
so no full gate matrix is ever built.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Sequence, Union

import numpy as np

from .circuit import Circuit, Gate, GateKind, compose, controlled
from .fock import FockState, RegisterLayout, sector_of, state_index


class NumericalAnomalyError(ArithmeticError):
    """A quantity that must be real came out with a sizeable imaginary part."""


IMAG_TOL = 1e-10


class StateVector:
    def __init__(self, amplitudes: np.ndarray, layout: RegisterLayout | None = None):
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        n = int(round(math.log2(amps.size)))
        if 1 << n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        self.amplitudes = amps
        self.n = n
        self.layout = layout

    @classmethod
    def zero(cls, n: int, layout: RegisterLayout | None = None) -> "StateVector":
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, layout)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.layout)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def vdot(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probability(self, qubit: int, value: int) -> float:
        t = self.amplitudes.reshape((2,) * self.n)
        idx = [slice(None)] * self.n
        idx[self.n - 1 - qubit] = value
        return float(np.sum(np.abs(t[tuple(idx)]) ** 2))

    # -- gate application -----------------------------------------------------

    def apply(self, gate: Gate, workers: int = 1) -> "StateVector":
        """Apply ``gate`` in place and return ``self``."""
        n = self.n
        for q in gate.qubits:
            if q >= n:
                raise IndexError(f"qubit {q} out of range for {n}-qubit state")
        t = self.amplitudes.reshape((2,) * n)
        idx: list = [slice(None)] * n
        for q, pol in gate.controls:
            idx[n - 1 - q] = pol
        free = [q for q in range(n - 1, -1, -1) if q not in gate.qubits]
        if workers > 1 and free:
            # disjoint halves along free axes, one slice per worker
            split = free[: max(1, min(len(free), int(math.log2(workers))))]
            jobs = []
            for pattern in range(1 << len(split)):
                sub = list(idx)
                for i, q in enumerate(split):
                    sub[n - 1 - q] = (pattern >> i) & 1
                jobs.append(sub)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(lambda s: _apply_slice(t, s, gate, n), jobs))
        else:
            _apply_slice(t, idx, gate, n)
        return self


def _apply_slice(t: np.ndarray, idx: list, gate: Gate, n: int) -> None:
    i0 = list(idx)
    i1 = list(idx)
    i0[n - 1 - gate.target] = 0
    i1[n - 1 - gate.target] = 1
    # trailing Ellipsis keeps a (possibly 0-d) view when every axis is fixed
    a0 = t[tuple(i0) + (Ellipsis,)]
    a1 = t[tuple(i1) + (Ellipsis,)]
    kind = gate.kind
    if kind is GateKind.X:
        tmp = a0.copy()
        a0[...] = a1
        a1[...] = tmp
    elif kind is GateKind.H:
        s = 1.0 / math.sqrt(2.0)
        tmp = a0.copy()
        a0 += a1
        a0 *= s
        a1 -= tmp
        a1 *= -s
    elif kind is GateKind.RY:
        c = math.cos(gate.angle / 2.0)
        s = math.sin(gate.angle / 2.0)
        tmp = a0.copy()
        a0 *= c
        a0 -= s * a1
        a1 *= c
        a1 += s * tmp
    elif kind is GateKind.PHASE:
        # separate real ops: complex-scalar multiply rounds differently on
        # strided and contiguous views, which would make results depend on
        # the worker split
        c, s = math.cos(gate.angle), math.sin(gate.angle)
        re = a0.real.copy()
        im = a0.imag.copy()
        a0.real = c * re - s * im
        a0.imag = s * re + c * im
    else:  # pragma: no cover
        raise ValueError(f"unknown gate kind {kind}")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    return state.copy().apply(gate)


def run(state: StateVector, circuit: Circuit, workers: int = 1, in_place: bool = False) -> StateVector:
    if circuit.n_qubits > state.n:
        raise IndexError(f"circuit needs {circuit.n_qubits} qubits, state has {state.n}")
    out = state if in_place else state.copy()
    for g in circuit.gates:
        out.apply(g, workers)
    return out


def circuit_unitary(circuit: Circuit, n_qubits: int | None = None) -> np.ndarray:
    """Dense unitary built column by column; meant for small test circuits."""
    n = circuit.n_qubits if n_qubits is None else n_qubits
    if n > 12:
        raise ValueError("refusing to build a dense unitary beyond 12 qubits")
    dim = 1 << n
    U = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[col] = 1.0
        U[:, col] = run(StateVector(amps), circuit, in_place=True).amplitudes
    return U


# -- sparse engine ------------------------------------------------------------------

PRUNE_TOL = 1e-15


class SparseState:
    """Amplitudes stored as parallel ``(index, value)`` arrays.

    Used when the register is too wide for a dense vector but the circuit
    only ever populates a small part of it, as the walk circuits do.
    Indices are kept unique; entries whose magnitude drops below
    ``PRUNE_TOL`` after a branching gate are discarded.
    """

    def __init__(self, index: np.ndarray, values: np.ndarray, n: int, layout: RegisterLayout | None = None):
        self.index = np.asarray(index, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.complex128)
        self.n = n
        self.layout = layout

    @classmethod
    def from_weights(cls, weights: Mapping[int, complex], n: int, layout=None) -> "SparseState":
        keys = sorted(weights)
        return cls(np.array(keys, dtype=np.int64), np.array([weights[k] for k in keys]), n, layout)

    def copy(self) -> "SparseState":
        return SparseState(self.index.copy(), self.values.copy(), self.n, self.layout)

    def __len__(self) -> int:
        return self.index.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def amplitude(self, index: int) -> complex:
        hit = np.nonzero(self.index == index)[0]
        return complex(self.values[hit[0]]) if hit.size else 0j

    def vdot(self, other: "SparseState") -> complex:
        common, ia, ib = np.intersect1d(self.index, other.index, assume_unique=True, return_indices=True)
        return complex(np.vdot(self.values[ia], other.values[ib]))

    def to_dense(self) -> StateVector:
        amps = np.zeros(1 << self.n, dtype=np.complex128)
        amps[self.index] = self.values
        return StateVector(amps, self.layout)

    def apply(self, gate: Gate, workers: int = 1) -> "SparseState":
        for q in gate.qubits:
            if q >= self.n:
                raise IndexError(f"qubit {q} out of range for {self.n}-qubit state")
        self.index, self.values = _sparse_gate(self.index, self.values, gate)
        return self


def _control_mask(index: np.ndarray, controls) -> np.ndarray | None:
    if not controls:
        return None
    cmask = 0
    cval = 0
    for q, pol in controls:
        cmask |= 1 << q
        cval |= pol << q
    return (index & cmask) == cval


def _sparse_gate(index: np.ndarray, values: np.ndarray, gate: Gate):
    kind = gate.kind
    if kind in (GateKind.RY, GateKind.PHASE) and gate.angle == 0.0:
        return index, values
    mask = _control_mask(index, gate.controls)
    tbit = np.int64(1 << gate.target)
    if kind is GateKind.X:
        index = index.copy()
        if mask is None:
            index ^= tbit
        else:
            index[mask] ^= tbit
        return index, values
    if kind is GateKind.PHASE:
        hit = (index & tbit) == 0
        if mask is not None:
            hit &= mask
        values = values.copy()
        values[hit] *= complex(math.cos(gate.angle), math.sin(gate.angle))
        return index, values
    if kind is GateKind.H:
        s = 1.0 / math.sqrt(2.0)
        u = ((s, s), (s, -s))
    else:
        c, s = math.cos(gate.angle / 2.0), math.sin(gate.angle / 2.0)
        u = ((c, -s), (s, c))
    if mask is None:
        sel_idx, sel_val = index, values
        keep_idx = keep_val = None
    else:
        sel_idx, sel_val = index[mask], values[mask]
        keep_idx, keep_val = index[~mask], values[~mask]
    bit = (sel_idx & tbit) != 0
    base = sel_idx & ~tbit
    # column of u picked by the incoming bit
    to0 = np.where(bit, u[0][1], u[0][0]) * sel_val
    to1 = np.where(bit, u[1][1], u[1][0]) * sel_val
    cand = np.concatenate([base, base | tbit])
    amps = np.concatenate([to0, to1])
    uniq, inv = np.unique(cand, return_inverse=True)
    merged = np.bincount(inv, weights=amps.real, minlength=uniq.size) + 1j * np.bincount(
        inv, weights=amps.imag, minlength=uniq.size
    )
    live = np.abs(merged) > PRUNE_TOL
    uniq, merged = uniq[live], merged[live]
    if keep_idx is None:
        return uniq, merged
    return np.concatenate([keep_idx, uniq]), np.concatenate([keep_val, merged])


def _group_key(gate: Gate, key_qubits: frozenset[int]):
    ctrl = tuple(sorted((q, p) for q, p in gate.controls if q in key_qubits))
    if len(ctrl) != len(key_qubits) or gate.target in key_qubits:
        return None
    return ctrl


def run_sparse(
    state: SparseState, circuit: Circuit, key_qubits=(), in_place: bool = False
) -> SparseState:
    """Run ``circuit`` on a sparse state.

    Consecutive gates that all fire on one fixed pattern of ``key_qubits``
    (for the walk circuits: one monomial index) act on that slice only, so
    the full amplitude list is filtered once per run of gates instead of
    once per gate.
    """
    if circuit.n_qubits > state.n:
        raise IndexError(f"circuit needs {circuit.n_qubits} qubits, state has {state.n}")
    out = state if in_place else state.copy()
    keys = frozenset(key_qubits)
    gates = circuit.gates
    i = 0
    while i < len(gates):
        key = _group_key(gates[i], keys) if keys else None
        if key is None:
            out.apply(gates[i])
            i += 1
            continue
        j = i + 1
        while j < len(gates) and _group_key(gates[j], keys) == key:
            j += 1
        mask = _control_mask(out.index, key)
        sub_idx, sub_val = out.index[mask], out.values[mask]
        for g in gates[i:j]:
            sub_idx, sub_val = _sparse_gate(sub_idx, sub_val, g)
        out.index = np.concatenate([out.index[~mask], sub_idx])
        out.values = np.concatenate([out.values[~mask], sub_val])
        i = j
    return out


# -- walk-register helpers --------------------------------------------------------

DENSE_MAX_QUBITS = 20


def _normalized_weights(weights: Mapping[FockState, complex]) -> dict[FockState, complex]:
    if not weights:
        raise ValueError("pivot weights must not be empty")
    sectors = {sector_of(s) for s in weights}
    if len(sectors) > 1:
        raise ValueError("pivot mixes particle-number sectors")
    norm = math.sqrt(sum(abs(w) ** 2 for w in weights.values()))
    if norm == 0.0:
        raise ValueError("pivot weights have zero norm")
    return {s: complex(w) / norm for s, w in weights.items()}


Pivot = Union[FockState, Mapping[FockState, complex]]


def pivot_weights(pivot: Pivot) -> dict[FockState, complex]:
    if isinstance(pivot, FockState):
        return {pivot: 1.0 + 0j}
    return _normalized_weights(pivot)


def _resolve_backend(layout: RegisterLayout, backend: str) -> str:
    if backend == "auto":
        return "dense" if layout.n_qubits <= DENSE_MAX_QUBITS else "sparse"
    if backend not in ("dense", "sparse"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def init_state(
    layout: RegisterLayout,
    F: FockState | None = None,
    pivot_weights: Mapping[FockState, complex] | None = None,
    backend: str = "dense",
):
    """Basis state ``|F>`` or a normalized superposition, ancillas at ``|0>``.

    Amplitudes are written directly; no preparation circuit is involved.
    """
    if (F is None) == (pivot_weights is None):
        raise ValueError("give exactly one of F or pivot_weights")
    weights = {F: 1.0 + 0j} if F is not None else _normalized_weights(pivot_weights)
    amps: dict[int, complex] = {}
    for s, w in weights.items():
        i = state_index(s, layout)
        amps[i] = amps.get(i, 0j) + w
    if _resolve_backend(layout, backend) == "sparse":
        return SparseState.from_weights(amps, layout.n_qubits, layout)
    dense = np.zeros(1 << layout.n_qubits, dtype=np.complex128)
    for i, w in amps.items():
        dense[i] = w
    return StateVector(dense, layout)


def _pivot_state(layout: RegisterLayout, pivot: Pivot, backend: str):
    return init_state(layout, pivot_weights=pivot_weights(pivot), backend=backend)


def _run_any(state, circuit: Circuit, layout: RegisterLayout, workers: int = 1, in_place: bool = False):
    if isinstance(state, SparseState):
        return run_sparse(state, circuit, layout.id, in_place=in_place)
    return run(state, circuit, workers, in_place=in_place)


def blockencoded_element(
    circuit: Circuit, F: Pivot, G: Pivot, layout: RegisterLayout, backend: str = "auto"
) -> complex:
    """``<G, 0_a| circuit |F, 0_a>``."""
    out = _run_any(_pivot_state(layout, F, backend), circuit, layout, in_place=True)
    return _pivot_state(layout, G, backend).vdot(out)


def projected_block(
    circuit: Circuit, basis: Sequence[FockState], layout: RegisterLayout, backend: str = "auto"
) -> np.ndarray:
    """Matrix of ``<G, 0_a| circuit |F, 0_a>`` over ``basis`` (rows G, columns F)."""
    rows = [state_index(s, layout) for s in basis]
    out = np.zeros((len(basis), len(basis)), dtype=np.complex128)
    for col, F in enumerate(basis):
        psi = _run_any(init_state(layout, F, backend=backend), circuit, layout, in_place=True)
        if isinstance(psi, SparseState):
            lookup = dict(zip(psi.index.tolist(), psi.values.tolist()))
            out[:, col] = [lookup.get(r, 0j) for r in rows]
        else:
            out[:, col] = psi.amplitudes[rows]
    return out


def real_part_checked(value: complex, what: str = "value") -> float:
    if abs(value.imag) > IMAG_TOL:
        raise NumericalAnomalyError(f"{what} has imaginary part {value.imag:.3e}")
    return float(value.real)


def expectation_T(walk, pivot: Pivot, order: int, backend: str = "auto") -> float:
    """``<psi_0| T_n(H') |psi_0>`` from the Chebyshev walk circuit."""
    from .blockenc import chebyshev_circuit

    psi0 = _pivot_state(walk.layout, pivot, backend)
    out = _run_any(psi0, chebyshev_circuit(walk, order), walk.layout)
    return real_part_checked(psi0.vdot(out), f"<T_{order}>")


def chebyshev_expectations(
    walk, pivot: Pivot, max_order: int, backend: str = "auto", workers: int = 1
) -> np.ndarray:
    """``<T_0> .. <T_max_order>`` sharing the even-order prefix states.

    ``T_{2k}`` is ``(U^dag P U P)^k`` and ``T_{2k+1}`` is ``U P`` on top of it,
    so one pass of alternating applications covers every order.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    layout = walk.layout
    psi0 = _pivot_state(layout, pivot, backend)
    vals = [1.0 + 0j]
    even = psi0.copy()
    for order in range(1, max_order + 1):
        if order % 2:
            _run_any(even, walk.reflection, layout, workers, in_place=True)
            odd = _run_any(even, walk.u_h, layout, workers)
            vals.append(psi0.vdot(odd))
        else:
            _run_any(odd, walk.reflection, layout, workers, in_place=True)
            even = _run_any(odd, walk.u_h_dag, layout, workers, in_place=True)
            vals.append(psi0.vdot(even))
    return np.array([real_part_checked(v, f"<T_{i}>") for i, v in enumerate(vals)])


def hadamard_test_circuit(circuit: Circuit) -> tuple[Circuit, int]:
    """Extra control qubit in superposition around a controlled ``circuit``."""
    anc = circuit.n_qubits
    n = anc + 1
    h = Circuit(n, (Gate(GateKind.H, anc),))
    return compose(h, controlled(circuit.widen(n), [(anc, 1)]), h), anc


def hadamard_test_probability(circuit: Circuit, pivot: Pivot, layout: RegisterLayout, backend: str = "auto") -> float:
    """Probability of reading ``0`` on the Hadamard-test qubit."""
    test, anc = hadamard_test_circuit(circuit.widen(layout.n_qubits))
    weights = {state_index(s, layout): w for s, w in pivot_weights(pivot).items()}
    if _resolve_backend(layout, backend) == "sparse":
        psi = SparseState.from_weights(weights, test.n_qubits, layout)
        out = run_sparse(psi, test, layout.id, in_place=True)
        p0 = float(np.sum(np.abs(out.values[(out.index >> anc) & 1 == 0]) ** 2))
    else:
        amps = np.zeros(1 << test.n_qubits, dtype=np.complex128)
        for i, w in weights.items():
            amps[i] = w
        out = run(StateVector(amps, layout), test, in_place=True)
        p0 = out.probability(anc, 0)
    return min(1.0, max(0.0, p0))


def hadamard_test_estimate(
    circuit: Circuit,
    pivot: Pivot,
    shots: int,
    seed: int | None,
    layout: RegisterLayout,
    backend: str = "auto",
) -> float:
    """Shot estimate of ``Re <psi_0, 0_a| circuit |psi_0, 0_a>``.

    Returns ``(n_0 - n_1) / shots`` for ``shots`` samples of the test qubit.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p0 = hadamard_test_probability(circuit, pivot, layout, backend)
    n0 = int(np.random.default_rng(seed).binomial(shots, p0))
    return (2 * n0 - shots) / shots
