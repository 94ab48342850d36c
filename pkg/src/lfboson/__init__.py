"""Quantum-walk input scheme for many-boson light-front Hamiltonians."""

__version__ = "0.1.0"

from .fock import (
    FockState,
    RegisterLayout,
    Sector,
    build_layout,
    enumerate_basis,
    max_occupations,
    sector_of,
    state_index,
)
from .hamiltonian import (
    HamiltonianSpec,
    ModelParams,
    Monomial,
    WKind,
    build_monomials,
    exact_matrix,
    exact_spectrum,
    find_critical_coupling,
)
from .blockenc import WalkCircuits, chebyshev_circuit, walk_unitary
from .qksd import qksd_ground_energy, solve_gevp

__all__ = [
    "FockState",
    "HamiltonianSpec",
    "ModelParams",
    "Monomial",
    "RegisterLayout",
    "Sector",
    "WKind",
    "WalkCircuits",
    "build_layout",
    "build_monomials",
    "chebyshev_circuit",
    "enumerate_basis",
    "exact_matrix",
    "exact_spectrum",
    "find_critical_coupling",
    "max_occupations",
    "qksd_ground_energy",
    "sector_of",
    "solve_gevp",
    "state_index",
    "walk_unitary",
]
