"""Chebyshev Krylov subspace diagonalization from walk-circuit expectations.

With ``|psi_i> = T_i(H')|psi_0>``, every projected matrix element reduces to
expectations ``<T_n(H')>_0`` through ``T_i T_j = (T_{i+j} + T_{|i-j|}) / 2``.
The generalized eigenproblem ``H' c = E S c`` is solved after canonical
orthogonalization of the overlap ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .blockenc import WalkCircuits, chebyshev_circuit, walk_unitary
from .fock import FockState, Sector, sector_basis, sector_of
from .hamiltonian import ModelParams, build_monomials
from .simulator import Pivot, chebyshev_expectations, hadamard_test_estimate, pivot_weights


class DegenerateSubspaceError(ArithmeticError):
    """Every overlap eigenvalue fell below the orthogonalization threshold."""


DEFAULT_EPS_REL = 1e-8


def symmetric_eig(a: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a real symmetric matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.T)) > tol * max(1.0, np.max(np.abs(a))):
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    return w, v


@dataclass(frozen=True)
class KrylovMatrices:
    hp: np.ndarray
    s: np.ndarray
    expectations: np.ndarray
    scale: float

    @property
    def dim(self) -> int:
        return self.s.shape[0]


def build_krylov_matrices(expectations: Sequence[float], dim: int, scale: float) -> KrylovMatrices:
    t = np.asarray(expectations, dtype=float)
    if dim < 1:
        raise ValueError("Krylov dimension must be >= 1")
    if t.size < 2 * dim:
        raise ValueError(f"need <T_0..T_{2 * dim - 1}>, got {t.size} expectations")
    hp = np.empty((dim, dim))
    s = np.empty((dim, dim))
    for i in range(dim):
        for j in range(dim):
            hp[i, j] = 0.25 * (t[i + j + 1] + t[abs(i + j - 1)] + t[abs(i - j + 1)] + t[abs(i - j - 1)])
            s[i, j] = 0.5 * (t[i + j] + t[abs(i - j)])
    return KrylovMatrices(hp=hp, s=s, expectations=t[: 2 * dim], scale=float(scale))


@dataclass(frozen=True)
class GevpSolution:
    eigenvalues: np.ndarray
    retained_dim: int
    threshold: float
    overlap_eigenvalues: np.ndarray = field(repr=False)
    matrices: KrylovMatrices | None = field(default=None, repr=False)
    # columns: S-normalized generalized eigenvectors in the Krylov basis
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def ground(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def sensitivity(self) -> float:
        """Conditioning constant ``c`` of the ground estimate.

        If every expectation ``<T_n>`` is off by at most ``dt``, each entry of
        ``H'`` and ``S`` is off by at most ``dt`` and, to first order,
        ``|dE| <= D * Xi * dt * c`` with ``c = (1 + |E'|) * ||phi||_1^2`` for the
        S-normalized ground vector ``phi`` and dimensionless ``E'``.
        """
        if self.vectors is None or self.matrices is None:
            raise ValueError("solution carries no eigenvectors")
        e = self.ground / self.matrices.scale
        phi = self.vectors[:, 0]
        return float((1.0 + abs(e)) * np.sum(np.abs(phi)) ** 2)

    @property
    def condition(self) -> float:
        """Ratio of largest to smallest retained overlap eigenvalue."""
        kept = self.overlap_eigenvalues[self.overlap_eigenvalues > self.threshold]
        return float(kept.max() / kept.min())


def solve_gevp(km: KrylovMatrices, eps_rel: float = DEFAULT_EPS_REL) -> GevpSolution:
    """Canonical orthogonalization, then the reduced symmetric eigenproblem.

    Eigenvalues come back multiplied by ``km.scale`` (physical units).
    """
    sigma, v = symmetric_eig(km.s)
    threshold = eps_rel * sigma.max() if sigma.size else 0.0
    keep = sigma > threshold
    if not keep.any():
        raise DegenerateSubspaceError(f"no overlap eigenvalue above {threshold:.3e}")
    x = v[:, keep] / np.sqrt(sigma[keep])
    reduced = x.T @ km.hp @ x
    energies, y = symmetric_eig(0.5 * (reduced + reduced.T))
    return GevpSolution(
        eigenvalues=energies * km.scale,
        retained_dim=int(keep.sum()),
        threshold=float(threshold),
        overlap_eigenvalues=sigma,
        matrices=km,
        vectors=x @ y,
    )


def default_pivot(K: int, sector: Sector) -> FockState:
    basis = sector_basis(K, sector)
    if not basis:
        raise ValueError(f"K={K} has no {sector.value} states")
    return basis[0]


@dataclass(frozen=True)
class QksdResult:
    solution: GevpSolution
    walk: WalkCircuits
    pivot: dict
    mode: str

    @property
    def ground(self) -> float:
        return self.solution.ground


def shot_expectations(
    walk: WalkCircuits, pivot: Pivot, max_order: int, shots: int, seed: int | None, backend: str = "auto"
) -> np.ndarray:
    """Hadamard-test estimates of ``<T_0> .. <T_max_order>``, one child seed per order."""
    seeds = np.random.SeedSequence(seed).spawn(max_order + 1)
    out = []
    for n in range(max_order + 1):
        child = int(seeds[n].generate_state(1)[0])
        out.append(
            hadamard_test_estimate(chebyshev_circuit(walk, n), pivot, shots, child, walk.layout, backend)
        )
    return np.array(out)


def qksd_ground_energy(
    params: ModelParams,
    sector: Sector,
    pivot: Pivot | None = None,
    krylov_dim: int | None = None,
    mode: str = "exact",
    shots: int = 100_000,
    seed: int | None = None,
    eps_rel: float = DEFAULT_EPS_REL,
    backend: str = "auto",
    walk: WalkCircuits | None = None,
) -> QksdResult:
    """Hamiltonian -> walk circuits -> expectations -> Krylov matrices -> GEVP.

    ``krylov_dim`` defaults to the sector dimension; ``pivot`` to the first
    basis state of the sector.
    """
    if pivot is None:
        pivot = default_pivot(params.K, sector)
    weights = pivot_weights(pivot)
    if any(sector_of(s) is not sector for s in weights):
        raise ValueError(f"pivot is not in the {sector.value} sector")
    if krylov_dim is None:
        krylov_dim = len(sector_basis(params.K, sector))
    if walk is None:
        walk = walk_unitary(build_monomials(params))
    max_order = 2 * krylov_dim - 1
    if mode == "exact":
        t = chebyshev_expectations(walk, weights, max_order, backend=backend)
    elif mode == "shots":
        t = shot_expectations(walk, weights, max_order, shots, seed, backend)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    km = build_krylov_matrices(t, krylov_dim, walk.scale)
    return QksdResult(solution=solve_gevp(km, eps_rel), walk=walk, pivot=weights, mode=mode)
