"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every test records one ``criterion N: PASS|FAIL ...`` line, printed in the
pytest terminal summary (and directly when this file is run as a script).
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from lfboson.blockenc import chebyshev_circuit, walk_unitary
from lfboson.circuit import compose, decrement, gate_counts, increment, reflection_about_zero
from lfboson.fock import FockState, Sector, enumerate_basis, sector_basis
from lfboson.hamiltonian import (
    ModelParams,
    build_monomials,
    exact_matrix,
    exact_spectrum,
    find_critical_coupling,
    sector_matrix,
)
from lfboson.qksd import qksd_ground_energy
from lfboson.simulator import (
    StateVector,
    chebyshev_expectations,
    circuit_unitary,
    expectation_T,
    hadamard_test_estimate,
    projected_block,
    run,
)
from oracles import (
    REFERENCE_COEFFICIENTS,
    REFERENCE_EIGENVALUES,
    REFERENCE_EVEN_GROUND,
    REFERENCE_LAMBDA,
    REFERENCE_MATRIX,
    REFERENCE_ORDER,
    REFERENCE_ODD_GROUND,
    chebyshev_matrices,
    fock_matrix,
)

P4 = ModelParams(REFERENCE_LAMBDA, 4)


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def occupation_vectors(K):
    return [tuple(s.occupation(k) for k in range(1, K + 1)) for s in enumerate_basis(K)]


def test_criterion_1_monomial_table():
    t0 = time.perf_counter()
    spec = build_monomials(P4)
    elapsed = time.perf_counter() - t0
    got = sorted((m.label(), m.coefficient) for m in spec.monomials)
    want = sorted(REFERENCE_COEFFICIENTS)
    labels_ok = spec.M == 14 and [g[0] for g in got] == [w[0] for w in want]
    err = max(abs(g[1] - w[1]) for g, w in zip(got, want)) if labels_ok else math.inf
    ok = labels_ok and err <= 1e-4 and elapsed < 1.0
    record(1, ok, f"M={spec.M} max|dB'|={err:.2e} (tol 1e-4) time={elapsed:.3f}s")
    assert ok


def test_criterion_2_reference_matrix():
    t0 = time.perf_counter()
    basis = [FockState.parse(lab, 4) for lab in REFERENCE_ORDER]
    H = exact_matrix(build_monomials(P4), basis)
    elapsed = time.perf_counter() - t0
    err = np.abs(H - REFERENCE_MATRIX).max()
    zeros_exact = bool(np.all(H[REFERENCE_MATRIX == 0.0] == 0.0))
    ok = err <= 1e-4 and zeros_exact and elapsed < 1.0
    record(2, ok, f"max|dH|={err:.2e} (tol 1e-4) exact zeros={zeros_exact} time={elapsed:.3f}s")
    assert ok


def test_criterion_3_eigenvalues():
    t0 = time.perf_counter()
    E = exact_spectrum(exact_matrix(build_monomials(P4)))
    elapsed = time.perf_counter() - t0
    errs = np.abs(E - REFERENCE_EIGENVALUES)
    ok = errs[0] <= 1e-5 and np.all(errs[1:] <= 1e-4) and elapsed < 1.0
    record(3, ok, f"|dE0|={errs[0]:.2e} (tol 1e-5) max|dE1..4|={errs[1:].max():.2e} (tol 1e-4) time={elapsed:.3f}s")
    assert ok


def test_criterion_4_block_encoding():
    t0 = time.perf_counter()
    worst = 0.0
    for K in (2, 3, 4):
        for lam in (1.0, 10.0, REFERENCE_LAMBDA):
            walk = walk_unitary(build_monomials(ModelParams(lam, K)))
            block = walk.scale * projected_block(walk.u_h, enumerate_basis(K), walk.layout)
            worst = max(worst, np.abs(block - fock_matrix(K, lam, occupation_vectors(K))).max())
    walk4 = walk_unitary(build_monomials(P4))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and walk4.layout.n_qubits == 17 and walk4.layout.system_width == 7 and elapsed < 30
    record(4, ok, f"max residual={worst:.2e} (tol 1e-10) qubits={walk4.layout.n_qubits} "
                  f"Q_s={walk4.layout.system_width} time={elapsed:.2f}s")
    assert ok


def test_criterion_5_chebyshev():
    t0 = time.perf_counter()
    spec = build_monomials(P4)
    walk = walk_unitary(spec)
    basis = enumerate_basis(4)
    hp = exact_matrix(spec, basis) / walk.scale
    worst = 0.0
    for n, T in enumerate(chebyshev_matrices(hp, 8)):
        got = projected_block(chebyshev_circuit(walk, n), basis, walk.layout)
        worst = max(worst, np.abs(got - T).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 120
    record(5, ok, f"max |T_n block - T_n(H')| over n<=8 = {worst:.2e} (tol 1e-10) time={elapsed:.2f}s")
    assert ok


def test_criterion_6_qksd_end_to_end():
    t0 = time.perf_counter()
    odd = qksd_ground_energy(P4, Sector.ODD)
    even = qksd_ground_energy(P4, Sector.EVEN, walk=odd.walk)
    elapsed = time.perf_counter() - t0
    d_odd = abs(odd.ground - REFERENCE_ODD_GROUND)
    d_even = abs(even.ground - REFERENCE_EVEN_GROUND)
    ok = d_odd <= 1e-5 and d_even <= 1e-4 and elapsed < 120
    record(6, ok, f"odd={odd.ground:.6e} (|d|={d_odd:.1e}, tol 1e-5) even={even.ground:.6f} "
                  f"(|d|={d_even:.1e}, tol 1e-4) time={elapsed:.2f}s")
    assert ok


def test_criterion_7_critical_coupling():
    t0 = time.perf_counter()
    lam = find_critical_coupling(4, Sector.ODD, (80.0, 100.0), tol=1e-3)
    elapsed = time.perf_counter() - t0
    ok = abs(lam - 92.4746) <= 0.01 and elapsed < 10
    record(7, ok, f"critical lambda/m2={lam:.5f} (target 92.4746 +- 0.01) time={elapsed:.2f}s")
    assert ok


def test_criterion_8_property_suite():
    t0 = time.perf_counter()
    checks: dict[str, bool] = {}

    # adder / subtractor exhaustive round trips
    adder_ok = True
    for n in range(1, 5):
        reg = list(range(n))
        for r in range(1 << n):
            amps = np.zeros(1 << n, dtype=complex)
            amps[r] = 1
            up = run(StateVector(amps), increment(reg)).amplitudes
            down = run(StateVector(amps), decrement(reg)).amplitudes
            back = run(StateVector(amps), compose(increment(reg), decrement(reg))).amplitudes
            adder_ok &= up[(r + 1) % (1 << n)] == 1 and down[(r - 1) % (1 << n)] == 1 and back[r] == 1
    checks["adder"] = bool(adder_ok)

    # unitarity of emitted circuits on <= 5 qubits
    walk1 = walk_unitary(build_monomials(ModelParams(5.0, 1)))
    small = [increment([0, 1, 2, 3, 4]), decrement([0, 2, 4], 5), reflection_about_zero([1, 2, 3], 5)]
    small += [walk1.u_h, walk1.u_h_dag, walk1.reflection, chebyshev_circuit(walk1, 3)]
    assert all(c.n_qubits <= 5 for c in small)
    uerr = max(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() for U in map(circuit_unitary, small))
    checks["unitarity"] = uerr <= 1e-12

    # norm preservation through the K=4 walk
    walk = walk_unitary(build_monomials(P4))
    rng = np.random.default_rng(3)
    psi = rng.normal(size=1 << walk.layout.n_qubits) + 1j * rng.normal(size=1 << walk.layout.n_qubits)
    psi /= np.linalg.norm(psi)
    out = run(StateVector(psi), chebyshev_circuit(walk, 4))
    checks["norm"] = abs(out.norm() - 1.0) <= 1e-10

    # sector confinement: Ritz values stay inside the pivot sector's spectral range
    confined = True
    for K in range(2, 7):
        params = ModelParams(20.0, K)
        spec = build_monomials(params)
        wk = walk_unitary(spec)
        for sec in Sector:
            if not sector_basis(K, sec):
                continue
            own = exact_spectrum(sector_matrix(spec, sec)[1])
            vals = qksd_ground_energy(params, sec, krylov_dim=1, walk=wk).solution.eigenvalues
            confined &= bool(np.all(vals >= own[0] - 1e-8 * wk.scale) and np.all(vals <= own[-1] + 1e-8 * wk.scale))
    checks["sector confinement"] = confined

    # Hadamard-test estimator within 5/sqrt(shots), fixed seed
    shots = 100_000
    pivot = FockState.parse("4^1")
    had = []
    for n in range(4):
        circ = chebyshev_circuit(walk, n)
        had.append(abs(hadamard_test_estimate(circ, pivot, shots, 99 + n, walk.layout) - expectation_T(walk, pivot, n)))
    checks["hadamard"] = max(had) <= 5 / math.sqrt(shots)

    # identical outputs for different worker counts
    one = chebyshev_expectations(walk, pivot, 5, backend="dense", workers=1)
    four = chebyshev_expectations(walk, pivot, 5, backend="dense", workers=4)
    checks["workers"] = bool(np.array_equal(one, four))

    elapsed = time.perf_counter() - t0
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    record(8, ok, f"{len(checks) - len(failed)}/{len(checks)} property groups pass"
                  f"{' (failed: ' + ', '.join(failed) + ')' if failed else ''} time={elapsed:.2f}s")
    assert ok


def test_criterion_9_scaling():
    t0 = time.perf_counter()
    params = ModelParams(REFERENCE_LAMBDA, 8)
    spec = build_monomials(params)
    walk = walk_unitary(spec)
    rel = {}
    for sec in Sector:
        exact = exact_spectrum(sector_matrix(spec, sec)[1])[0]
        got = qksd_ground_energy(params, sec, walk=walk).ground
        rel[sec.value] = abs(got - exact) / abs(exact)
    Ks = [2, 4, 6, 8]
    counts = [gate_counts(walk_unitary(build_monomials(ModelParams(REFERENCE_LAMBDA, K))).u_h)["total"] for K in Ks]
    slope = float(np.polyfit(np.log(Ks), np.log(counts), 1)[0])
    elapsed = time.perf_counter() - t0
    agree = all(r <= 1e-8 for r in rel.values())
    trend = counts == sorted(counts) and slope <= 5.5
    ok = agree and trend and elapsed < 600
    record(9, ok, f"K=8 rel. error even={rel['even']:.2e} odd={rel['odd']:.2e} (tol 1e-8); "
                  f"gate-count slope over K=2..8 = {slope:.2f} (<= 5 + log slack) time={elapsed:.1f}s")
    assert ok


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
