"""Probe circuits: logical construction, routing onto hardware, op walks.

Bitstring convention used throughout: measured qubit 0 is the *rightmost*
character of a rendered outcome string, matching the usual little-endian
rendering of counts dictionaries.

The op walk (`walk_ops`) is the single source of truth for which error
opportunities touch which qubit.  The survival estimator, the analytic
survival oracle and the Monte-Carlo executor all consume the same walk, so
their per-qubit op paths agree by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence

import json

from .device import Topology

__all__ = [
    "Gate",
    "LogicalCircuit",
    "TranspiledOp",
    "TranspiledCircuit",
    "FlipEvent",
    "WalkStep",
    "CircuitError",
    "RoutingError",
    "build_bv",
    "transpile",
    "compose_probe",
    "walk_ops",
    "bit_at",
    "bits_to_string",
]


class CircuitError(ValueError):
    """A circuit failed structural validation."""


class RoutingError(CircuitError):
    """Routing could not place a 2-qubit op on the target topology."""


class Gate(Enum):
    H = "H"
    X = "X"
    CNOT = "CNOT"
    SWAP = "SWAP"
    MEASURE = "MEASURE"

    @property
    def n_registers(self) -> int:
        return 2 if self in (Gate.CNOT, Gate.SWAP) else 1


def bit_at(bits: str, index: int) -> str:
    """Character of measured qubit ``index`` in a rendered bitstring."""
    return bits[len(bits) - 1 - index]


def bits_to_string(bits: Sequence[int]) -> str:
    """Render bit values (index 0 first) as a string with index 0 rightmost."""
    return "".join("1" if b else "0" for b in reversed(bits))


@dataclass(frozen=True)
class LogicalCircuit:
    """Topology-agnostic circuit over logical qubits.

    ``measured`` lists logical qubits in measurement order; ``ideal_output``
    is the noise-free outcome over those qubits.  Builders guarantee the
    circuit lands in a single basis state before measurement; the constructor
    checks only structure (arity, ranges, measure-once-and-last).
    """

    num_qubits: int
    ops: tuple[tuple[Gate, tuple[int, ...]], ...]
    measured: tuple[int, ...]
    ideal_output: str

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        measured_at: dict[int, int] = {}
        for idx, (gate, qubits) in enumerate(self.ops):
            if len(qubits) != gate.n_registers:
                raise CircuitError(f"op {idx}: {gate.value} takes {gate.n_registers} qubits")
            if len(set(qubits)) != len(qubits):
                raise CircuitError(f"op {idx}: repeated qubit operand")
            for q in qubits:
                if not (0 <= q < self.num_qubits):
                    raise CircuitError(f"op {idx}: qubit {q} out of range")
                if q in measured_at:
                    raise CircuitError(f"op {idx}: qubit {q} used after measurement")
            if gate is Gate.MEASURE:
                measured_at[qubits[0]] = idx
        if sorted(measured_at) != sorted(self.measured):
            raise CircuitError("measured qubit list does not match MEASURE ops")
        if len(set(self.measured)) != len(self.measured):
            raise CircuitError("measured qubit listed twice")
        if len(self.ideal_output) != len(self.measured):
            raise CircuitError("ideal_output length must equal number of measured qubits")
        if any(c not in "01" for c in self.ideal_output):
            raise CircuitError("ideal_output must be a bitstring")


@dataclass(frozen=True)
class TranspiledOp:
    """One hardware op: gate, physical registers and its error lookup key."""

    gate: Gate
    registers: tuple[int, ...]
    error_key: tuple

    def __post_init__(self) -> None:
        if len(self.registers) != self.gate.n_registers:
            raise CircuitError(f"{self.gate.value} takes {self.gate.n_registers} registers")
        if len(set(self.registers)) != len(self.registers):
            raise CircuitError("repeated register operand")


def _single_op(gate: Gate, register: int) -> TranspiledOp:
    kind = "meas" if gate is Gate.MEASURE else "single"
    return TranspiledOp(gate, (register,), (kind, register))


def _pair_op(gate: Gate, a: int, b: int) -> TranspiledOp:
    return TranspiledOp(gate, (a, b), ("cnot", (min(a, b), max(a, b))))


@dataclass(frozen=True)
class FlipEvent:
    """One error opportunity for one tracked qubit.

    ``sub`` indexes the constituent CNOTs of a SWAP (0..2) and is 0 for every
    other gate; ``register`` is the physical location of the qubit when the
    op fires.
    """

    op_index: int
    sub: int
    logical: int
    register: int
    error_key: tuple


@dataclass(frozen=True)
class WalkStep:
    op_index: int
    op: TranspiledOp
    events: tuple[FlipEvent, ...]
    locations: dict[int, int]


def _walk(ops: Sequence[TranspiledOp], initial_mapping: dict[int, int]) -> Iterator[WalkStep]:
    loc = dict(initial_mapping)
    owner = {p: q for q, p in loc.items()}
    if len(owner) != len(loc):
        raise CircuitError("initial mapping is not injective")
    done: set[int] = set()
    for idx, op in enumerate(ops):
        for r in op.registers:
            q = owner.get(r)
            if q is not None and q in done:
                raise CircuitError(f"op {idx}: register {r} holds already-measured qubit {q}")
        events: list[FlipEvent] = []
        if op.gate is Gate.SWAP:
            a, b = op.registers
            qa, qb = owner.get(a), owner.get(b)
            for sub in range(3):
                if qa is not None:
                    events.append(FlipEvent(idx, sub, qa, a, op.error_key))
                if qb is not None:
                    events.append(FlipEvent(idx, sub, qb, b, op.error_key))
            owner.pop(a, None)
            owner.pop(b, None)
            if qa is not None:
                loc[qa] = b
                owner[b] = qa
            if qb is not None:
                loc[qb] = a
                owner[a] = qb
        else:
            for r in op.registers:
                q = owner.get(r)
                if q is not None:
                    events.append(FlipEvent(idx, 0, q, r, op.error_key))
            if op.gate is Gate.MEASURE:
                q = owner.get(op.registers[0])
                if q is not None:
                    done.add(q)
        yield WalkStep(idx, op, tuple(events), dict(loc))


@dataclass(frozen=True)
class TranspiledCircuit:
    """Hardware-level circuit plus the logical bookkeeping around it.

    ``initial_mapping``/``final_mapping`` map logical qubit to physical
    register before and after all routing SWAPs; ``measured`` lists logical
    qubits in fingerprint order.  The constructor replays the ops to confirm
    the final mapping and that each measured qubit is measured exactly once,
    by the last op touching its register.
    """

    num_qubits: int
    ops: tuple[TranspiledOp, ...]
    initial_mapping: dict[int, int]
    final_mapping: dict[int, int]
    measured: tuple[int, ...]
    ideal_output: str

    def __post_init__(self) -> None:
        for q, p in self.initial_mapping.items():
            if not (0 <= p < self.num_qubits):
                raise CircuitError(f"initial mapping sends {q} to bad register {p}")
        for op in self.ops:
            for r in op.registers:
                if not (0 <= r < self.num_qubits):
                    raise CircuitError(f"register {r} out of range")
        loc = dict(self.initial_mapping)
        seen_measures: list[int] = []
        for step in _walk(self.ops, self.initial_mapping):
            loc = step.locations
            if step.op.gate is Gate.MEASURE:
                for ev in step.events:
                    seen_measures.append(ev.logical)
        if loc != self.final_mapping:
            raise CircuitError("final mapping does not match replayed SWAPs")
        if sorted(seen_measures) != sorted(self.measured):
            raise CircuitError("MEASURE ops do not cover the measured qubit list")
        if len(self.ideal_output) != len(self.measured):
            raise CircuitError("ideal_output length must equal number of measured qubits")
        if any(c not in "01" for c in self.ideal_output):
            raise CircuitError("ideal_output must be a bitstring")

    def ideal_bit(self, fingerprint_index: int) -> int:
        return int(bit_at(self.ideal_output, fingerprint_index))


def walk_ops(circuit: TranspiledCircuit) -> Iterator[WalkStep]:
    """Replay a transpiled circuit, yielding per-op flip events and locations.

    A SWAP contributes three events (its constituent CNOTs) to each tracked
    qubit it touches and then exchanges their locations; a MEASURE
    contributes one event at the qubit's final register.
    """
    return _walk(circuit.ops, circuit.initial_mapping)


def build_bv(secret: str) -> LogicalCircuit:
    """Bernstein-Vazirani probe for a secret bitstring.

    Inputs are logical 0..n-2, the ancilla is logical n-1 and is prepared in
    the |-> state via X then H.  Oracle CNOTs run from each input whose
    secret bit is 1 into the ancilla, in ascending input order.  The ideal
    outcome equals the secret.
    """
    if not secret or any(c not in "01" for c in secret):
        raise CircuitError("secret must be a non-empty bitstring")
    n_inputs = len(secret)
    ancilla = n_inputs
    ops: list[tuple[Gate, tuple[int, ...]]] = [(Gate.X, (ancilla,)), (Gate.H, (ancilla,))]
    ops += [(Gate.H, (i,)) for i in range(n_inputs)]
    ops += [(Gate.CNOT, (i, ancilla)) for i in range(n_inputs) if bit_at(secret, i) == "1"]
    ops += [(Gate.H, (i,)) for i in range(n_inputs)]
    ops += [(Gate.MEASURE, (i,)) for i in range(n_inputs)]
    return LogicalCircuit(
        num_qubits=n_inputs + 1,
        ops=tuple(ops),
        measured=tuple(range(n_inputs)),
        ideal_output=secret,
    )


def _route_path(topology: Topology, start: int, goal: int, blocked: set[int]) -> list[int]:
    """Shortest register path start -> goal avoiding blocked interior nodes.

    Ties are broken toward the lowest physical index at each hop.
    """
    dist = topology.distances_from(goal, blocked=frozenset(blocked - {start, goal}))
    if start not in dist:
        raise RoutingError(f"no route from register {start} to {goal}")
    path = [start]
    cur = start
    while cur != goal:
        steps = [v for v in topology.neighbors(cur)
                 if v not in blocked and v in dist and dist[v] == dist[cur] - 1]
        cur = min(steps)
        path.append(cur)
    return path


def transpile(circuit: LogicalCircuit, topology: Topology,
              initial_mapping: Sequence[int] | Mapping[int, int]) -> TranspiledCircuit:
    """Route a logical circuit onto a topology under a fixed initial mapping.

    The mapping is a register per logical qubit, either as a sequence indexed
    by logical id or as an explicit {logical: register} mapping.  Non-adjacent
    2-qubit ops move their first operand along a shortest path with SWAPs
    placed immediately before the blocked op; nothing is swapped back
    afterwards.  Registers holding already-measured qubits are never routed
    through.
    """
    if isinstance(initial_mapping, Mapping):
        try:
            initial_mapping = [initial_mapping[q] for q in range(len(initial_mapping))]
        except KeyError:
            raise CircuitError("mapping must place logical qubits 0..n-1") from None
    if len(initial_mapping) != circuit.num_qubits:
        raise CircuitError("initial mapping must place every logical qubit")
    if len(set(initial_mapping)) != len(initial_mapping):
        raise CircuitError("initial mapping is not injective")
    for p in initial_mapping:
        if not (0 <= p < topology.num_qubits):
            raise CircuitError(f"mapping register {p} out of range")

    l2p = {q: p for q, p in enumerate(initial_mapping)}
    p2l = {p: q for q, p in l2p.items()}
    frozen: set[int] = set()
    out: list[TranspiledOp] = []

    def do_swap(a: int, b: int) -> None:
        out.append(_pair_op(Gate.SWAP, a, b))
        qa, qb = p2l.get(a), p2l.get(b)
        p2l.pop(a, None)
        p2l.pop(b, None)
        if qa is not None:
            l2p[qa] = b
            p2l[b] = qa
        if qb is not None:
            l2p[qb] = a
            p2l[a] = qb

    for gate, qubits in circuit.ops:
        if gate.n_registers == 1:
            p = l2p[qubits[0]]
            out.append(_single_op(gate, p))
            if gate is Gate.MEASURE:
                frozen.add(p)
            continue
        pa, pb = l2p[qubits[0]], l2p[qubits[1]]
        if not topology.adjacent(pa, pb):
            path = _route_path(topology, pa, pb, frozen)
            for nxt in path[1:-1]:
                do_swap(pa, nxt)
                pa = nxt
        out.append(_pair_op(gate, pa, pb))

    return TranspiledCircuit(
        num_qubits=topology.num_qubits,
        ops=tuple(out),
        initial_mapping={q: p for q, p in enumerate(initial_mapping)},
        final_mapping=dict(l2p),
        measured=circuit.measured,
        ideal_output=circuit.ideal_output,
    )


def compose_probe(subprobes: Sequence[tuple[str, Sequence[int]]],
                  topology: Topology) -> TranspiledCircuit:
    """Union of BV subprobes running on disjoint regions of one device.

    Each subprobe is a (secret, initial_mapping) pair.  Regions must be
    pairwise at graph distance >= 2 so the subprobes cannot interact even
    through a shared coupler.  A single subprobe composes to exactly its own
    transpilation.
    """
    if not subprobes:
        raise CircuitError("compose_probe needs at least one subprobe")
    parts = [transpile(build_bv(secret), topology, mapping) for secret, mapping in subprobes]
    used: list[set[int]] = []
    for part in parts:
        regs = set(part.initial_mapping.values())
        for op in part.ops:
            regs.update(op.registers)
        used.append(regs)
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            gap = topology.set_distance(used[i], used[j])
            if gap is not None and gap < 2:
                raise CircuitError(
                    f"subprobes {i} and {j} are at graph distance {gap}; need >= 2")

    ops: list[TranspiledOp] = []
    initial: dict[int, int] = {}
    final: dict[int, int] = {}
    measured: list[int] = []
    ideal_bits: list[int] = []
    offset = 0
    for part in parts:
        ops.extend(part.ops)
        for q, p in part.initial_mapping.items():
            initial[q + offset] = p
        for q, p in part.final_mapping.items():
            final[q + offset] = p
        measured.extend(q + offset for q in part.measured)
        ideal_bits.extend(part.ideal_bit(i) for i in range(len(part.measured)))
        offset += max(part.initial_mapping) + 1
    return TranspiledCircuit(
        num_qubits=topology.num_qubits,
        ops=tuple(ops),
        initial_mapping=initial,
        final_mapping=final,
        measured=tuple(measured),
        ideal_output=bits_to_string(ideal_bits),
    )


# --- JSON interchange ---------------------------------------------------------

def circuit_to_json(circuit: TranspiledCircuit) -> str:
    doc = {
        "num_qubits": circuit.num_qubits,
        "ops": [{"gate": op.gate.value, "qubits": list(op.registers)} for op in circuit.ops],
        "initial_mapping": {str(q): p for q, p in sorted(circuit.initial_mapping.items())},
        "final_mapping": {str(q): p for q, p in sorted(circuit.final_mapping.items())},
        "measured": list(circuit.measured),
        "ideal_output": circuit.ideal_output,
    }
    return json.dumps(doc, indent=2)


def circuit_from_json(document: str) -> TranspiledCircuit:
    raw = json.loads(document)
    ops = []
    for entry in raw["ops"]:
        gate = Gate(entry["gate"])
        regs = entry["qubits"]
        if gate.n_registers == 1:
            ops.append(_single_op(gate, regs[0]))
        else:
            ops.append(_pair_op(gate, regs[0], regs[1]))
    return TranspiledCircuit(
        num_qubits=raw["num_qubits"],
        ops=tuple(ops),
        initial_mapping={int(q): p for q, p in raw["initial_mapping"].items()},
        final_mapping={int(q): p for q, p in raw["final_mapping"].items()},
        measured=tuple(raw["measured"]),
        ideal_output=raw["ideal_output"],
    )
