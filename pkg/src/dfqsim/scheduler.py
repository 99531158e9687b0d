"""Compile logical circuits into an actuator itinerary over the qubit lattice.

Qubits sit on a 1-D lattice with 2 nm spacing. The actuator parks above a
qubit for single-qubit gates and between two neighboring qubits (at the
0.85 nm two-qubit offset) for CNOTs. Non-adjacent CNOTs are routed as chains
of adjacent state exchanges ("swap hops") mediated by the actuator, then the
chain is undone, which keeps the pairwise operation count at O(N) per gate
and O(nN) per circuit.

Moves connect neighboring stations only (above <-> adjacent above, above <->
mid-pair offset); the itinerary's ``operation_count`` counts pairwise gate
operations, with moves reported separately.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .geometry import DEFAULT_LATTICE_SPACING_NM
from .logical import RotationAxes
from .protocols import DwellStep, synthesize_single_qubit

TWO_QUBIT_OFFSET_NM = 0.85
DEFAULT_CNOT_US = 500.0
DEFAULT_SWAP_HOP_US = 150.0
DEFAULT_TIP_SPEED_NM_PER_US = 0.23


class CircuitError(ValueError):
    pass


# A small catalog of named single-qubit gates in the logical basis.
def _named_gate(name: str) -> np.ndarray:
    s2 = 1.0 / np.sqrt(2.0)
    gates = {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": np.diag([1.0, -1.0]).astype(complex),
        "h": s2 * np.array([[1, 1], [1, -1]], dtype=complex),
        "s": np.diag([1.0, 1.0j]).astype(complex),
        "x90": s2 * np.array([[1, -1j], [-1j, 1]], dtype=complex),
    }
    try:
        return gates[name.lower()]
    except KeyError:
        raise CircuitError(f"unknown single-qubit gate name: {name!r}") from None


@dataclass(frozen=True)
class CircuitGate:
    """Either single(qubit, unitary) or cnot(control, target)."""

    kind: str
    qubits: tuple[int, ...]
    name: str = ""
    matrix: Optional[np.ndarray] = None

    @staticmethod
    def single(qubit: int, name: str = "h", matrix: Optional[np.ndarray] = None) -> "CircuitGate":
        return CircuitGate(kind="single", qubits=(qubit,), name=name, matrix=matrix)

    @staticmethod
    def cnot(control: int, target: int) -> "CircuitGate":
        return CircuitGate(kind="cnot", qubits=(control, target))

    def unitary(self) -> np.ndarray:
        if self.kind != "single":
            raise CircuitError("only single gates carry a 2x2 unitary")
        return self.matrix if self.matrix is not None else _named_gate(self.name)


@dataclass(frozen=True)
class LogicalCircuit:
    qubit_count: int
    gates: tuple[CircuitGate, ...]

    def __post_init__(self):
        if self.qubit_count < 1:
            raise CircuitError("circuit needs at least one qubit")
        for g in self.gates:
            if any(not 0 <= q < self.qubit_count for q in g.qubits):
                raise CircuitError(f"qubit index out of range in gate {g}")
            if g.kind == "cnot" and g.qubits[0] == g.qubits[1]:
                raise CircuitError("cnot control and target must differ")
            if g.kind not in ("single", "cnot"):
                raise CircuitError(f"unknown gate kind {g.kind!r}")


@dataclass(frozen=True)
class ItineraryStep:
    kind: str  # "move", "single", "cnot", "swap-hop"
    target: str
    duration_us: float = 0.0
    distance_nm: float = 0.0


@dataclass(frozen=True)
class ActuatorItinerary:
    steps: tuple[ItineraryStep, ...]

    @property
    def operation_count(self) -> int:
        """Pairwise gate operations (moves excluded)."""
        return sum(1 for s in self.steps if s.kind != "move")

    @property
    def move_count(self) -> int:
        return sum(1 for s in self.steps if s.kind == "move")

    @property
    def gate_time_us(self) -> float:
        return sum(s.duration_us for s in self.steps if s.kind != "move")

    @property
    def move_distance_nm(self) -> float:
        return sum(s.distance_nm for s in self.steps if s.kind == "move")


@dataclass(frozen=True)
class GateDurations:
    """Gate-time defaults; ``single_us`` of None means "from dwell synthesis"."""

    cnot_us: float = DEFAULT_CNOT_US
    swap_hop_us: float = DEFAULT_SWAP_HOP_US
    single_us: Optional[float] = None


# Stations on the line: ("above", q) or ("mid", q) = between qubits q, q+1.
Station = tuple[str, int]


def _station_x(st: Station, spacing: float) -> float:
    kind, q = st
    return q * spacing + (TWO_QUBIT_OFFSET_NM if kind == "mid" else 0.0)


def _neighbors(st: Station, n_qubits: int) -> list[Station]:
    kind, q = st
    out: list[Station] = []
    if kind == "above":
        if q > 0:
            out += [("above", q - 1), ("mid", q - 1)]
        if q < n_qubits - 1:
            out += [("above", q + 1), ("mid", q)]
    else:
        out += [("above", q), ("above", q + 1)]
        if q > 0:
            out.append(("mid", q - 1))
        if q < n_qubits - 2:
            out.append(("mid", q + 1))
    return out


def _walk(src: Station, dst: Station, n_qubits: int, spacing: float) -> list[ItineraryStep]:
    moves = []
    cur = src
    x_dst = _station_x(dst, spacing)
    while cur != dst:
        options = _neighbors(cur, n_qubits)
        nxt = min(options, key=lambda s: (abs(_station_x(s, spacing) - x_dst), s != dst))
        dist = abs(_station_x(nxt, spacing) - _station_x(cur, spacing))
        moves.append(
            ItineraryStep(kind="move", target=f"{nxt[0]}-{nxt[1]}", distance_nm=dist)
        )
        cur = nxt
    return moves


def _single_duration(
    gate: CircuitGate, durations: GateDurations, axes: Optional[RotationAxes]
) -> float:
    if durations.single_us is not None:
        return durations.single_us
    if axes is None:
        raise CircuitError("single-qubit durations need rotation axes or an explicit default")
    steps = synthesize_single_qubit(gate.unitary(), axes)
    return sum(s.dwell_time_us for s in steps)


def compile_circuit(
    circuit: LogicalCircuit,
    spacing_nm: float = DEFAULT_LATTICE_SPACING_NM,
    durations: GateDurations = GateDurations(),
    axes: Optional[RotationAxes] = None,
    home: Station = ("above", 0),
) -> ActuatorItinerary:
    """Compile a logical circuit into moves plus pairwise gate operations.

    Non-adjacent CNOT(a, b) costs 2(|a-b| - 1) swap hops plus the gate, so a
    circuit of n gates on N qubits compiles to at most 2 n N pairwise
    operations (asserted before returning).
    """
    n = circuit.qubit_count
    steps: list[ItineraryStep] = []
    cur = home

    def go(dst: Station):
        nonlocal cur
        steps.extend(_walk(cur, dst, n, spacing_nm))
        cur = dst

    for gate in circuit.gates:
        if gate.kind == "single":
            q = gate.qubits[0]
            go(("above", q))
            steps.append(
                ItineraryStep(
                    kind="single",
                    target=f"q{q}",
                    duration_us=_single_duration(gate, durations, axes),
                )
            )
            continue
        lo, hi = sorted(gate.qubits)
        for j in range(hi - 1, lo, -1):
            go(("mid", j))
            steps.append(
                ItineraryStep(
                    kind="swap-hop", target=f"q{j}-q{j + 1}", duration_us=durations.swap_hop_us
                )
            )
        go(("mid", lo))
        steps.append(
            ItineraryStep(kind="cnot", target=f"q{lo}-q{lo + 1}", duration_us=durations.cnot_us)
        )
        for j in range(lo + 1, hi):
            go(("mid", j))
            steps.append(
                ItineraryStep(
                    kind="swap-hop", target=f"q{j}-q{j + 1}", duration_us=durations.swap_hop_us
                )
            )

    itinerary = ActuatorItinerary(steps=tuple(steps))
    bound = 2 * max(1, len(circuit.gates)) * max(2, n)
    assert itinerary.operation_count <= bound, "operation count exceeded the 2nN bound"
    return itinerary


@dataclass(frozen=True)
class TimeBudget:
    move_time_us: float
    gate_time_us: float
    operation_count: int
    move_count: int

    @property
    def move_gate_ratio(self) -> float:
        if self.gate_time_us == 0.0:
            return 0.0 if self.move_time_us == 0.0 else np.inf
        return self.move_time_us / self.gate_time_us


def time_budget(
    itinerary: ActuatorItinerary,
    tip_speed_nm_per_us: float = DEFAULT_TIP_SPEED_NM_PER_US,
) -> TimeBudget:
    """Total moving and gate times; moving is distance over tip speed."""
    if tip_speed_nm_per_us <= 0.0:
        raise ValueError("tip speed must be positive")
    return TimeBudget(
        move_time_us=itinerary.move_distance_nm / tip_speed_nm_per_us,
        gate_time_us=itinerary.gate_time_us,
        operation_count=itinerary.operation_count,
        move_count=itinerary.move_count,
    )
