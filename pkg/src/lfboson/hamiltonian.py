"""DLCQ light-front Hamiltonian of two-dimensional phi^4 theory.

The Hamiltonian is kept as a list of normal-ordered monomials.  Two
representations are built from the same term list:

* raw terms ``B * a^dag ... a ...`` with the usual ladder operators, used by
  :func:`exact_matrix` (the classical oracle), and
* squeezed monomials ``B' * W_k W_l ...`` where ``b_k = a_k / sqrt(Lambda_k)``
  and each mode's operators are grouped into one of eight per-mode
  combinations (:class:`WKind`), which is what the circuits encode.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .fock import FockState, Sector, _check_K, enumerate_basis, max_occupations, sector_of


class StructureError(RuntimeError):
    """A monomial whose per-mode operator pattern matches no known combination."""


class BracketError(ValueError):
    """Bisection bracket without a sign change of the lowest eigenvalue."""


class WKind(enum.Enum):
    """Per-mode normal-ordered product ``(b^dag)^c b^a`` of squeezed operators."""

    PLUS = "+"
    PLUS_PLUS = "++"
    PLUS_PLUS_PLUS = "+++"
    MINUS = "-"
    MINUS_MINUS = "--"
    MINUS_MINUS_MINUS = "---"
    PLUS_MINUS = "+-"
    PLUS_PLUS_MINUS_MINUS = "++--"

    @property
    def creations(self) -> int:
        return self.value.count("+")

    @property
    def annihilations(self) -> int:
        return self.value.count("-")

    @property
    def delta(self) -> int:
        return self.creations - self.annihilations

    def valid_range(self, lam: int) -> range:
        """Occupations on which the combination acts without vanishing."""
        c, a = self.creations, self.annihilations
        if self.delta > 0:
            return range(0, lam - c + 1)
        return range(a, lam + 1)

    def vanishing(self, lam: int) -> list[int]:
        valid = self.valid_range(lam)
        return [r for r in range(lam + 1) if r not in valid]

    def xi(self, r: int, lam: int) -> float:
        """Scaled normalization factor of ``W |r> = xi |r + delta>``."""
        if r not in self.valid_range(lam):
            raise ValueError(f"occupation {r} is a vanishing case of ({self.value}) for Lambda={lam}")
        a, c = self.annihilations, self.creations
        # falling factorial from annihilators, then rising from creators
        num = 1
        for i in range(a):
            num *= r - i
        base = r - a
        for i in range(1, c + 1):
            num *= base + i
        return math.sqrt(num / lam ** (a + c))

    @classmethod
    def from_counts(cls, creations: int, annihilations: int) -> "WKind":
        for kind in cls:
            if kind.creations == creations and kind.annihilations == annihilations:
                return kind
        raise StructureError(
            f"no combination with {creations} creation(s) and {annihilations} annihilation(s)"
        )


@dataclass(frozen=True)
class ModelParams:
    lambda_over_m2: float
    K: int
    m2: float = 1.0

    def __post_init__(self) -> None:
        _check_K(self.K)
        if not self.m2 > 0:
            raise ValueError(f"m2 must be positive, got {self.m2}")
        if not self.lambda_over_m2 >= 0:
            raise ValueError(f"lambda/m2 must be non-negative, got {self.lambda_over_m2}")

    @property
    def coupling(self) -> float:
        return self.lambda_over_m2 * self.m2


@dataclass(frozen=True)
class RawTerm:
    """``coefficient * a^dag_{c1} a^dag_{c2} ... a_{a1} a_{a2} ...``."""

    origin: str
    creations: tuple[int, ...]
    annihilations: tuple[int, ...]
    coefficient: float


@dataclass(frozen=True)
class Monomial:
    index: int
    factors: tuple[tuple[int, WKind], ...]
    coefficient: float
    origin: str

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.factors)

    def label(self) -> str:
        return "".join(f"({w.value}){k}" for k, w in self.factors)


@dataclass(frozen=True)
class HamiltonianSpec:
    params: ModelParams
    monomials: tuple[Monomial, ...]

    @property
    def K(self) -> int:
        return self.params.K

    @property
    def M(self) -> int:
        return len(self.monomials)

    @property
    def Xi(self) -> float:
        return max(abs(m.coefficient) for m in self.monomials)

    @property
    def D(self) -> int:
        return 1 << math.ceil(math.log2(self.M))

    @property
    def scale(self) -> float:
        """Subnormalization ``D * Xi`` of the block-encoded Hamiltonian."""
        return self.D * self.Xi

    def with_coefficient(self, index: int, value: float) -> "HamiltonianSpec":
        """Copy with one monomial coefficient replaced (fault injection)."""
        mons = tuple(
            replace(m, coefficient=value) if m.index == index else m for m in self.monomials
        )
        if mons == self.monomials and all(m.index != index for m in self.monomials):
            raise IndexError(f"no monomial with index {index}")
        return replace(self, monomials=mons)


def _pair_norm(k: int, l: int) -> float:
    # N_kl^2
    return 2.0 if k == l else 1.0


def _triple_norm(l: int, m: int, n: int) -> float:
    # N_lmn^2
    distinct = len({l, m, n})
    return {1: 6.0, 2: 2.0, 3: 1.0}[distinct]


def _ordered_pairs(total: int) -> list[tuple[int, int]]:
    return [(k, total - k) for k in range(1, total // 2 + 1)]


def _ordered_triples(total: int) -> list[tuple[int, int, int]]:
    out = []
    for l in range(1, total // 3 + 1):
        for m in range(l, (total - l) // 2 + 1):
            out.append((l, m, total - l - m))
    return out


def hamiltonian_terms(params: ModelParams) -> list[RawTerm]:
    """Normal-ordered ladder-operator terms, all modes inside ``1..K``.

    The logarithmically divergent self-energy in the one-body term is dropped
    (normal ordering), leaving ``m^2 / k``.
    """
    K = params.K
    g = params.coupling / (4.0 * math.pi)
    terms: list[RawTerm] = []
    for k in range(1, K + 1):
        terms.append(RawTerm("H11", (k,), (k,), params.m2 / k))
    for total in range(2, K + 1):
        pairs = _ordered_pairs(total)
        for k, l in pairs:
            for m, n in pairs:
                b = g / (_pair_norm(k, l) * _pair_norm(m, n)) / math.sqrt(k * l * m * n)
                terms.append(RawTerm("H22", (k, l), (m, n), b))
    three_one = []
    for k in range(3, K + 1):
        for l, m, n in _ordered_triples(k):
            b = g / _triple_norm(l, m, n) / math.sqrt(k * l * m * n)
            three_one.append((k, (l, m, n), b))
    for k, lmn, b in three_one:
        terms.append(RawTerm("H31", (k,), lmn, b))
    for k, (l, m, n), b in three_one:
        terms.append(RawTerm("H13", (n, m, l), (k,), b))
    return terms


def group_operators(
    creation_modes: Iterable[int], annihilation_modes: Iterable[int]
) -> list[tuple[int, WKind]]:
    """Group a normal-ordered monomial into per-mode combinations, ascending mode."""
    cre = Counter(creation_modes)
    ann = Counter(annihilation_modes)
    return [
        (k, WKind.from_counts(cre.get(k, 0), ann.get(k, 0)))
        for k in sorted(set(cre) | set(ann))
    ]


def squeeze_factor(term: RawTerm, lambdas: Sequence[int]) -> float:
    """``B' / B``: product of ``sqrt(Lambda)`` over every operator in the term."""
    out = 1.0
    for k in term.creations + term.annihilations:
        out *= math.sqrt(lambdas[k - 1])
    return out


def build_monomials(params: ModelParams) -> HamiltonianSpec:
    lambdas = max_occupations(params.K)
    mons = []
    for j, term in enumerate(hamiltonian_terms(params)):
        mons.append(
            Monomial(
                index=j,
                factors=tuple(group_operators(term.creations, term.annihilations)),
                coefficient=term.coefficient * squeeze_factor(term, lambdas),
                origin=term.origin,
            )
        )
    return HamiltonianSpec(params=params, monomials=tuple(mons))


# --- classical matrices --------------------------------------------------------


def _apply_ladder(
    counts: dict[int, int], creations: Sequence[int], annihilations: Sequence[int]
) -> tuple[float, dict[int, int]]:
    # rightmost operator acts first
    occ = dict(counts)
    amp = 1.0
    for k in reversed(annihilations):
        r = occ.get(k, 0)
        if r == 0:
            return 0.0, {}
        amp *= math.sqrt(r)
        occ[k] = r - 1
    for k in reversed(creations):
        r = occ.get(k, 0)
        amp *= math.sqrt(r + 1)
        occ[k] = r + 1
    return amp, occ


def _basis_lookup(basis: Sequence[FockState]) -> dict[tuple, int]:
    return {s.occupations: i for i, s in enumerate(basis)}


def exact_matrix(spec: HamiltonianSpec, basis: Sequence[FockState] | None = None) -> np.ndarray:
    """Dense ``<G|H|F>`` from unsqueezed ladder actions on each basis state."""
    if basis is None:
        basis = enumerate_basis(spec.K)
    lookup = _basis_lookup(basis)
    n = len(basis)
    H = np.zeros((n, n))
    for term in hamiltonian_terms(spec.params):
        for col, F in enumerate(basis):
            amp, occ = _apply_ladder(F.counts(), term.creations, term.annihilations)
            if amp == 0.0:
                continue
            G = FockState.from_counts(F.K, occ)
            H[lookup[G.occupations], col] += term.coefficient * amp
    return H


def squeezed_matrix(spec: HamiltonianSpec, basis: Sequence[FockState] | None = None) -> np.ndarray:
    """Same matrix assembled from squeezed monomials and the per-mode ``xi`` table."""
    if basis is None:
        basis = enumerate_basis(spec.K)
    lookup = _basis_lookup(basis)
    lambdas = max_occupations(spec.K)
    n = len(basis)
    H = np.zeros((n, n))
    for mono in spec.monomials:
        for col, F in enumerate(basis):
            occ = F.counts()
            amp = mono.coefficient
            for k, kind in mono.factors:
                r = occ.get(k, 0)
                lam = lambdas[k - 1]
                if r not in kind.valid_range(lam):
                    amp = 0.0
                    break
                amp *= kind.xi(r, lam)
                occ[k] = r + kind.delta
            if amp == 0.0:
                continue
            G = FockState.from_counts(F.K, occ)
            H[lookup[G.occupations], col] += amp
    return H


def exact_spectrum(matrix: np.ndarray) -> np.ndarray:
    from .qksd import symmetric_eig

    return symmetric_eig(matrix)[0]


def mass_squared_spectrum(spec: HamiltonianSpec, basis: Sequence[FockState] | None = None) -> np.ndarray:
    """Eigenvalues of the invariant-mass operator ``M^2 = K H``."""
    return spec.K * exact_spectrum(exact_matrix(spec, basis))


def sector_matrix(spec: HamiltonianSpec, sector: Sector) -> tuple[list[FockState], np.ndarray]:
    basis = [s for s in enumerate_basis(spec.K) if sector_of(s) is sector]
    return basis, exact_matrix(spec, basis)


def lowest_sector_eigenvalue(K: int, sector: Sector, lambda_over_m2: float, m2: float = 1.0) -> float:
    spec = build_monomials(ModelParams(lambda_over_m2=lambda_over_m2, K=K, m2=m2))
    basis, H = sector_matrix(spec, sector)
    if not basis:
        raise ValueError(f"K={K} has no {sector.value} states")
    return float(exact_spectrum(H)[0])


def find_critical_coupling(
    K: int,
    sector: Sector,
    bracket: tuple[float, float],
    tol: float = 1e-3,
    m2: float = 1.0,
    lowest: Callable[[float], float] | None = None,
) -> float:
    """Bisect for the coupling where the lowest sector eigenvalue changes sign."""
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise BracketError(f"bracket must satisfy lo < hi, got ({lo}, {hi})")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if lowest is None:
        def lowest(x: float) -> float:
            return lowest_sector_eigenvalue(K, sector, x, m2)

    f_lo, f_hi = lowest(lo), lowest(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(
            f"lowest {sector.value} eigenvalue does not change sign on [{lo}, {hi}]: "
            f"{f_lo:.6g}, {f_hi:.6g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = lowest(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
