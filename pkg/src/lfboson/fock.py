"""Fixed-K bosonic Fock bases and the qubit register layout.

A Fock state with total longitudinal momentum ``K`` is an integer partition
of ``K``: ``r_k`` bosons sit in mode ``k`` and ``sum(k * r_k) == K``.  Each
mode gets a subregister holding ``r_k`` in binary (little-endian), sized by
the largest occupation the mode can reach, ``floor(K / k)``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping


class InvalidStateError(ValueError):
    """Occupation pattern that cannot be placed in the register layout."""


class Sector(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @classmethod
    def parse(cls, text: str) -> "Sector":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown sector {text!r}; expected 'even' or 'odd'") from None


def _check_K(K: int) -> None:
    if not isinstance(K, (int,)) or isinstance(K, bool) or K < 1:
        raise ValueError(f"total momentum K must be a positive integer, got {K!r}")


@dataclass(frozen=True)
class FockState:
    """Occupation-number state ``|k^{r_k}, l^{r_l}, ...>`` at fixed ``K``.

    ``occupations`` holds ``(mode, count)`` pairs sorted by descending mode,
    with zero counts omitted.
    """

    K: int
    occupations: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        _check_K(self.K)
        occ = tuple(sorted(((int(k), int(r)) for k, r in self.occupations), reverse=True))
        modes = [k for k, _ in occ]
        if len(set(modes)) != len(modes):
            raise InvalidStateError(f"repeated mode in {self.occupations}")
        for k, r in occ:
            if k < 1:
                raise InvalidStateError(f"mode must be >= 1, got {k}")
            if r < 1:
                raise InvalidStateError(f"stored occupations must be >= 1, got {k}^{r}")
        if sum(k * r for k, r in occ) != self.K:
            raise InvalidStateError(f"occupations {occ} do not sum to K={self.K}")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def from_counts(cls, K: int, counts: Mapping[int, int]) -> "FockState":
        return cls(K, tuple((k, r) for k, r in counts.items() if r))

    @classmethod
    def from_partition(cls, parts: list[int] | tuple[int, ...]) -> "FockState":
        counts: dict[int, int] = {}
        for p in parts:
            counts[p] = counts.get(p, 0) + 1
        return cls.from_counts(sum(parts), counts)

    @classmethod
    def parse(cls, text: str, K: int | None = None) -> "FockState":
        """Parse caret-exponent syntax such as ``"2^1 1^2"`` or ``"4^1"``."""
        tokens = [t for t in re.split(r"[\s,]+", text.strip()) if t]
        if not tokens:
            raise InvalidStateError("empty state specification")
        counts: dict[int, int] = {}
        for tok in tokens:
            m = re.fullmatch(r"(\d+)(?:\^(\d+))?", tok)
            if m is None:
                raise InvalidStateError(f"cannot parse occupation token {tok!r}")
            k = int(m.group(1))
            r = int(m.group(2)) if m.group(2) is not None else 1
            counts[k] = counts.get(k, 0) + r
        total = sum(k * r for k, r in counts.items())
        if K is not None and total != K:
            raise InvalidStateError(f"state {text!r} has K={total}, expected {K}")
        return cls.from_counts(total, counts)

    def occupation(self, k: int) -> int:
        for mode, r in self.occupations:
            if mode == k:
                return r
        return 0

    def counts(self) -> dict[int, int]:
        return dict(self.occupations)

    @property
    def particle_number(self) -> int:
        return sum(r for _, r in self.occupations)

    @property
    def label(self) -> str:
        return " ".join(f"{k}^{r}" for k, r in self.occupations)

    def __str__(self) -> str:
        return f"|{self.label}>"


def max_occupations(K: int) -> list[int]:
    """Largest occupation ``floor(K/k)`` of each mode ``k = 1..K``."""
    _check_K(K)
    return [K // k for k in range(1, K + 1)]


def _partitions(n: int, largest: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def enumerate_basis(K: int) -> list[FockState]:
    """All Fock states of total momentum ``K``, descending-lexicographic."""
    _check_K(K)
    return [FockState.from_partition(p) for p in _partitions(K, K)]


def sector_of(state: FockState) -> Sector:
    return Sector.ODD if state.particle_number % 2 else Sector.EVEN


def sector_basis(K: int, sector: Sector) -> list[FockState]:
    return [s for s in enumerate_basis(K) if sector_of(s) is sector]


def _width(n_values: int) -> int:
    # qubits needed to hold the integers 0..n_values-1, at least one
    return max(1, math.ceil(math.log2(n_values)))


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit assignment for the walk circuits.

    Order: ``s_1 .. s_K`` (little-endian each), ``ph_1 .. ph_K``, ``me``,
    ``ac``, then the monomial index register ``id``.  Qubit ``q`` is bit
    ``q`` of the computational-basis index.
    """

    K: int
    monomial_count: int
    s: tuple[tuple[int, ...], ...]
    ph: tuple[int, ...]
    me: int
    ac: int
    id: tuple[int, ...]
    n_qubits: int
    lambdas: tuple[int, ...] = field(repr=False)

    def s_of(self, k: int) -> tuple[int, ...]:
        if not 1 <= k <= self.K:
            raise ValueError(f"mode {k} outside 1..{self.K}")
        return self.s[k - 1]

    def ph_of(self, k: int) -> int:
        if not 1 <= k <= self.K:
            raise ValueError(f"mode {k} outside 1..{self.K}")
        return self.ph[k - 1]

    def lambda_of(self, k: int) -> int:
        return self.lambdas[k - 1]

    @property
    def system_qubits(self) -> tuple[int, ...]:
        return tuple(q for reg in self.s for q in reg)

    @property
    def system_width(self) -> int:
        return len(self.system_qubits)

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        """Qubits projected onto ``|0>`` in the block encoding: ph, me, ac, id."""
        return self.ph + (self.me, self.ac) + self.id

    @property
    def index_dimension(self) -> int:
        return 1 << len(self.id)

    def widths(self) -> dict[str, int]:
        return {
            "system": self.system_width,
            "ph": len(self.ph),
            "me": 1,
            "ac": 1,
            "id": len(self.id),
            "total": self.n_qubits,
        }


def system_qubit_count(K: int) -> int:
    """Number of qubits encoding all mode occupations for momentum ``K``."""
    return sum(_width(lam + 1) for lam in max_occupations(K))


def build_layout(K: int, monomial_count: int) -> RegisterLayout:
    _check_K(K)
    if monomial_count < 1:
        raise ValueError(f"monomial count must be >= 1, got {monomial_count}")
    lambdas = max_occupations(K)
    q = 0
    s = []
    for lam in lambdas:
        w = _width(lam + 1)
        s.append(tuple(range(q, q + w)))
        q += w
    ph = tuple(range(q, q + K))
    q += K
    me, ac = q, q + 1
    q += 2
    id_width = math.ceil(math.log2(monomial_count))
    ids = tuple(range(q, q + id_width))
    q += id_width
    return RegisterLayout(
        K=K,
        monomial_count=monomial_count,
        s=tuple(s),
        ph=ph,
        me=me,
        ac=ac,
        id=ids,
        n_qubits=q,
        lambdas=tuple(lambdas),
    )


def state_index(state: FockState, layout: RegisterLayout) -> int:
    """Computational-basis index of ``|state>`` with every ancilla at ``|0>``."""
    if state.K != layout.K:
        raise InvalidStateError(f"state has K={state.K}, layout has K={layout.K}")
    idx = 0
    for k, r in state.occupations:
        reg = layout.s_of(k)
        if r >= 1 << len(reg):
            raise InvalidStateError(f"occupation {k}^{r} exceeds subregister capacity")
        idx |= r << reg[0]
    return idx


def decode_index(index: int, layout: RegisterLayout) -> FockState:
    """Inverse of :func:`state_index`; ancilla bits must be zero."""
    anc_mask = sum(1 << q for q in layout.ancilla_qubits)
    if index & anc_mask:
        raise InvalidStateError(f"index {index} has nonzero ancilla bits")
    counts = {}
    for k in range(1, layout.K + 1):
        reg = layout.s_of(k)
        r = (index >> reg[0]) & ((1 << len(reg)) - 1)
        if r:
            counts[k] = r
    try:
        return FockState.from_counts(layout.K, counts)
    except InvalidStateError:
        raise InvalidStateError(f"index {index} does not encode a K={layout.K} state") from None


def system_occupations(index: int, layout: RegisterLayout) -> list[int]:
    """Raw per-mode register values ``[r_1, ..., r_K]`` of a basis index."""
    return [
        (index >> reg[0]) & ((1 << len(reg)) - 1) for reg in layout.s
    ]
