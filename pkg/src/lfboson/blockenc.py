"""Walk-state block encoding of the squeezed Hamiltonian.

``U_H`` maps ``|F>|0_a>`` so that its all-zero-ancilla block equals
``H / (D * Xi)``.  It is the forward-walk preparation followed by the
Hadamard diffusion on the index register (the backward preparation, which is
its own inverse).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import (
    Circuit,
    Gate,
    GateKind,
    compose,
    controlled,
    decrement,
    increment,
    inverse,
    reflection_about_zero,
    value_controls,
)
from .fock import RegisterLayout, build_layout
from .hamiltonian import HamiltonianSpec, WKind


def _check_mode(k: int, lam: int, layout: RegisterLayout) -> None:
    if not 1 <= k <= layout.K:
        raise ValueError(f"mode {k} is not in layout with K={layout.K}")
    if layout.lambda_of(k) != lam:
        raise ValueError(f"mode {k} has Lambda={layout.lambda_of(k)} in layout, got {lam}")


def overflow_values(k: int, layout: RegisterLayout) -> list[int]:
    """Register values of ``s_k`` above ``Lambda_k``; never occupied at fixed K."""
    width = len(layout.s_of(k))
    return list(range(layout.lambda_of(k) + 1, 1 << width))


def module_for(
    kind: WKind, k: int, lam: int, layout: RegisterLayout, flag_overflow: bool = True
) -> Circuit:
    """Circuit ``|r>_{s_k}|0>_{ph_k} -> |r + delta>|gamma_r>`` for one combination.

    Vanishing occupations flip ``ph_k`` to ``|1>``; valid ones rotate it to
    ``xi_r |0> + sqrt(1 - xi_r^2) |1>``; the register is then shifted by
    ``delta`` with unconditioned ripple adders.  With ``flag_overflow`` the
    unreachable register values above ``Lambda_k`` are flagged as well, which
    keeps those states from wrapping around into the physical subspace.
    """
    _check_mode(k, lam, layout)
    s = layout.s_of(k)
    ph = layout.ph_of(k)
    n = layout.n_qubits
    flags = kind.vanishing(lam)
    if flag_overflow:
        flags = flags + overflow_values(k, layout)
    gates = [Gate(GateKind.X, ph, value_controls(s, r)) for r in flags]
    for r in kind.valid_range(lam):
        theta = 2.0 * math.acos(min(1.0, kind.xi(r, lam)))
        gates.append(Gate(GateKind.RY, ph, value_controls(s, r), theta))
    parts = [Circuit(n, tuple(gates))]
    step = increment if kind.delta > 0 else decrement
    parts += [step(s, n)] * abs(kind.delta)
    return compose(*parts)


def forward_prep(spec: HamiltonianSpec, layout: RegisterLayout, flag_overflow: bool = True) -> Circuit:
    """Forward walk state from ``|F>|0_a>``: ac set, id diffused, one block per monomial."""
    if layout.K != spec.K:
        raise ValueError("layout and Hamiltonian disagree on K")
    if spec.M > layout.index_dimension:
        raise ValueError("index register too small for the monomial count")
    n = layout.n_qubits
    xi_max = spec.Xi
    head = [Gate(GateKind.X, layout.ac)] + [Gate(GateKind.H, q) for q in layout.id]
    parts = [Circuit(n, tuple(head))]
    for j, mono in enumerate(spec.monomials):
        ctrl = value_controls(layout.id, j) if layout.id else ()
        for k, kind in mono.factors:
            parts.append(controlled(module_for(kind, k, layout.lambda_of(k), layout, flag_overflow), ctrl))
        ratio = mono.coefficient / xi_max
        rho = abs(ratio)
        if rho > 1.0 + 1e-12:
            raise ValueError(f"monomial {j} coefficient exceeds the scale Xi={xi_max}")
        beta = 0.0 if ratio >= 0 else math.pi
        alpha = 2.0 * math.acos(min(1.0, rho))
        parts.append(
            Circuit(
                n,
                (
                    Gate(GateKind.PHASE, layout.me, ctrl, beta),
                    Gate(GateKind.RY, layout.me, ctrl, alpha),
                    Gate(GateKind.X, layout.ac, ctrl),
                ),
            )
        )
    return compose(*parts)


@dataclass(frozen=True)
class WalkCircuits:
    spec: HamiltonianSpec
    layout: RegisterLayout
    u_h: Circuit
    u_h_dag: Circuit
    reflection: Circuit

    @property
    def scale(self) -> float:
        return self.spec.scale


def walk_unitary(
    spec: HamiltonianSpec, layout: RegisterLayout | None = None, flag_overflow: bool = True
) -> WalkCircuits:
    if layout is None:
        layout = build_layout(spec.K, spec.M)
    n = layout.n_qubits
    diffusion = Circuit(n, tuple(Gate(GateKind.H, q) for q in layout.id))
    u_h = compose(forward_prep(spec, layout, flag_overflow), diffusion)
    return WalkCircuits(
        spec=spec,
        layout=layout,
        u_h=u_h,
        u_h_dag=inverse(u_h),
        reflection=reflection_about_zero(layout.ancilla_qubits, n),
    )


def chebyshev_circuit(walk: WalkCircuits, order: int) -> Circuit:
    """Circuit whose all-zero-ancilla block is ``T_order(H')``.

    Even ``2k``: ``(U^dag P U P)^k``; odd ``2k+1``: ``U P (U^dag P U P)^k``,
    written as operator products (rightmost acts first).
    """
    if order < 0:
        raise ValueError("Chebyshev order must be >= 0")
    n = walk.layout.n_qubits
    pair = compose(walk.reflection, walk.u_h, walk.reflection, walk.u_h_dag)
    parts = [pair] * (order // 2)
    if order % 2:
        parts += [walk.reflection, walk.u_h]
    return compose(Circuit(n), *parts)
