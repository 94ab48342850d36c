"""Gate-level circuit IR with multi-controlled elementary gates.

Controls carry a polarity: ``(q, 1)`` fires on ``|1>``, ``(q, 0)`` on ``|0>``.
Multi-controlled gates are kept as single IR entries; nothing here
decomposes them.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GateKind(enum.Enum):
    X = "X"
    H = "H"
    RY = "RY"
    # P_X(beta): |0> -> e^{i beta}|0>, |1> -> |1>
    PHASE = "P"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    target: int
    controls: tuple[tuple[int, int], ...] = ()
    angle: float = 0.0

    def __post_init__(self) -> None:
        qubits = [q for q, _ in self.controls]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated control qubit in {self.controls}")
        if self.target in qubits:
            raise ValueError(f"target {self.target} also used as control")
        for q, pol in self.controls:
            if pol not in (0, 1):
                raise ValueError(f"control polarity must be 0 or 1, got {pol}")
        if self.target < 0 or any(q < 0 for q in qubits):
            raise ValueError("negative qubit index")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) + tuple(q for q, _ in self.controls)

    def inverse(self) -> "Gate":
        if self.kind in (GateKind.RY, GateKind.PHASE):
            return Gate(self.kind, self.target, self.controls, -self.angle)
        return self

    def with_controls(self, extra: Sequence[tuple[int, int]]) -> "Gate":
        return Gate(self.kind, self.target, self.controls + tuple(extra), self.angle)

    def to_text(self) -> str:
        head = self.kind.value
        if self.kind in (GateKind.RY, GateKind.PHASE):
            head += f"({self.angle!r})"
        ctrl = ",".join(f"{q}:{p}" for q, p in self.controls)
        return f"{head} t={self.target} c=[{ctrl}]"


_LINE = re.compile(r"^(X|H|RY|P)(?:\(([^)]*)\))?\s+t=(\d+)\s+c=\[([^\]]*)\]$")


def parse_gate(line: str) -> Gate:
    m = _LINE.match(line.strip())
    if m is None:
        raise ValueError(f"cannot parse gate line {line!r}")
    kind = GateKind(m.group(1))
    angle = float(m.group(2)) if m.group(2) else 0.0
    if kind in (GateKind.RY, GateKind.PHASE) and m.group(2) is None:
        raise ValueError(f"{kind.value} gate needs an angle: {line!r}")
    controls = []
    if m.group(4).strip():
        for item in m.group(4).split(","):
            q, p = item.split(":")
            controls.append((int(q), int(p)))
    return Gate(kind, int(m.group(3)), tuple(controls), angle)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValueError(f"gate {g.to_text()} exceeds {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return compose(self, other)

    @property
    def qubits(self) -> set[int]:
        return {q for g in self.gates for q in g.qubits}

    def widen(self, n_qubits: int) -> "Circuit":
        if n_qubits < self.n_qubits:
            raise ValueError("cannot shrink a circuit")
        return Circuit(n_qubits, self.gates)

    def to_text(self) -> str:
        lines = [f"# qubits={self.n_qubits}"]
        lines += [g.to_text() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        n = None
        gates = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.match(r"#\s*qubits=(\d+)", line)
                if m:
                    n = int(m.group(1))
                continue
            gates.append(parse_gate(line))
        if n is None:
            n = 1 + max((max(g.qubits) for g in gates), default=-1)
        return cls(n, tuple(gates))


def compose(*circuits: Circuit) -> Circuit:
    """Apply ``circuits`` left to right."""
    n = max((c.n_qubits for c in circuits), default=0)
    return Circuit(n, tuple(g for c in circuits for g in c.gates))


def _check_register(register: Sequence[int]) -> list[int]:
    reg = list(register)
    if not reg:
        raise ValueError("register must contain at least one qubit")
    if len(set(reg)) != len(reg):
        raise ValueError(f"repeated qubit in register {reg}")
    return reg


def increment(register: Sequence[int], n_qubits: int | None = None) -> Circuit:
    """``|r> -> |r + 1 mod 2^n>`` on a little-endian register (ripple cascade)."""
    reg = _check_register(register)
    gates = []
    for i in range(len(reg) - 1, 0, -1):
        gates.append(Gate(GateKind.X, reg[i], tuple((q, 1) for q in reg[:i])))
    gates.append(Gate(GateKind.X, reg[0]))
    return Circuit(n_qubits if n_qubits is not None else max(reg) + 1, tuple(gates))


def decrement(register: Sequence[int], n_qubits: int | None = None) -> Circuit:
    return inverse(increment(register, n_qubits))


def controlled(c: Circuit, extra_controls: Iterable[tuple[int, int]]) -> Circuit:
    extra = tuple(extra_controls)
    extra_qubits = {q for q, _ in extra}
    if len(extra_qubits) != len(extra):
        raise ValueError("repeated extra control qubit")
    overlap = extra_qubits & c.qubits
    if overlap:
        raise ValueError(f"extra controls overlap circuit qubits {sorted(overlap)}")
    n = max([c.n_qubits] + [q + 1 for q in extra_qubits])
    return Circuit(n, tuple(g.with_controls(extra) for g in c.gates))


def value_controls(register: Sequence[int], value: int) -> tuple[tuple[int, int], ...]:
    """Controls firing when the little-endian ``register`` holds ``value``."""
    if value < 0 or value >= 1 << len(register):
        raise ValueError(f"value {value} does not fit in {len(register)} qubits")
    return tuple((q, (value >> i) & 1) for i, q in enumerate(register))


def inverse(c: Circuit) -> Circuit:
    return Circuit(c.n_qubits, tuple(g.inverse() for g in reversed(c.gates)))


def global_phase_flip(qubit: int, n_qubits: int) -> Circuit:
    """``-I`` from two phase gates on one qubit (stays exact under control)."""
    return Circuit(
        n_qubits,
        (
            Gate(GateKind.PHASE, qubit, angle=math.pi),
            Gate(GateKind.X, qubit),
            Gate(GateKind.PHASE, qubit, angle=math.pi),
            Gate(GateKind.X, qubit),
        ),
    )


def reflection_about_zero(qubits: Sequence[int], n_qubits: int | None = None) -> Circuit:
    """``2|0><0| - I`` on ``qubits``.

    A phase ``-1`` on the all-zero pattern gives ``I - 2|0><0|``; the trailing
    ``-I`` fixes the sign so the circuit is exactly the reflection.
    """
    reg = _check_register(qubits)
    n = n_qubits if n_qubits is not None else max(reg) + 1
    head, rest = reg[0], reg[1:]
    mark = Circuit(n, (Gate(GateKind.PHASE, head, tuple((q, 0) for q in rest), math.pi),))
    return compose(mark, global_phase_flip(head, n))


def gate_counts(c: Circuit) -> dict[str, int]:
    out: dict[str, int] = {}
    for g in c.gates:
        out[g.kind.value] = out.get(g.kind.value, 0) + 1
    out["total"] = len(c.gates)
    return out
