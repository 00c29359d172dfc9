"""Simulated execution of probe circuits under an outcome-flip noise model.

A probe lands in a known basis state, so noise is modelled classically: each
op that touches a measured qubit's register is an independent chance to flip
that qubit's measured bit, with probability (op error rate + hidden rate).
A SWAP is three flip opportunities at its edge's CNOT rate; readout is one
more at the measurement register.  This yields the closed-form parity
oracle in `exact_survival`: a bit survives when an even number of its flip
opportunities fire.

Flip opportunities per qubit mirror the user-side estimator's op walk
exactly, since both consume the same walk of the transpiled ops.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ._flipcore import get_sampler, stream_key
from .circuit import TranspiledCircuit, bit_at, walk_ops
from .device import DeviceProfile, topology_compatible
from .estimator import Fingerprint

__all__ = [
    "NoiseSpec",
    "Counts",
    "TopologyError",
    "execute",
    "run_rounds",
    "exact_survival",
    "survival_from_counts",
    "counts_to_json",
    "counts_from_json",
]

_MAX_MEASURED = 64  # packed-word sampler limit; probes stay far below this


class TopologyError(Exception):
    """The platform rejected a circuit that does not fit the device topology."""


@dataclass(frozen=True)
class NoiseSpec:
    """Ground-truth noise of a device: its real profile plus a hidden extra.

    ``hidden_rate`` is added to every flip opportunity and never appears in
    any published profile; it stands in for calibration staleness and other
    unreported error sources.
    """

    true_profile: DeviceProfile
    hidden_rate: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.hidden_rate < 1.0):
            raise ValueError(f"hidden_rate {self.hidden_rate} outside [0, 1)")


@dataclass(frozen=True)
class Counts:
    """Measurement outcome histogram; keys follow the rightmost-is-qubit-0 rule."""

    counts: Mapping[str, int]
    shots: int

    def __post_init__(self) -> None:
        widths = {len(k) for k in self.counts}
        if len(widths) > 1:
            raise ValueError("outcome strings differ in width")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("negative count")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")
        object.__setattr__(self, "counts", dict(self.counts))

    def probabilities(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}


def _flip_schedule(circuit: TranspiledCircuit, noise: NoiseSpec, seed: int):
    """Per-event stream keys, flip probabilities and target bit positions."""
    profile = noise.true_profile
    bit_of = {q: i for i, q in enumerate(circuit.measured)}
    keys: list[int] = []
    probs: list[float] = []
    bits: list[int] = []
    for step in walk_ops(circuit):
        for ev in step.events:
            if ev.logical not in bit_of:
                continue
            p = profile.rate_for(ev.error_key) + noise.hidden_rate
            if p >= 1.0:
                raise ValueError(f"effective flip probability {p} at op {ev.op_index} not < 1")
            keys.append(stream_key(seed, ev.op_index, ev.sub, ev.register))
            probs.append(p)
            bits.append(bit_of[ev.logical])
    return (np.array(keys, dtype=np.uint64),
            np.array(probs, dtype=np.float64),
            np.array(bits, dtype=np.int64))


def _check(circuit: TranspiledCircuit, noise: NoiseSpec) -> None:
    if not topology_compatible(circuit, noise.true_profile.topology):
        raise TopologyError(
            f"circuit does not fit the topology of {noise.true_profile.device_id!r}")
    if len(circuit.measured) > _MAX_MEASURED:
        raise ValueError(f"at most {_MAX_MEASURED} measured qubits supported")


def execute(circuit: TranspiledCircuit, noise: NoiseSpec, shots: int, seed: int) -> Counts:
    """Sample measurement outcomes for a probe on a noisy device."""
    if shots < 1:
        raise ValueError("shots must be positive")
    _check(circuit, noise)
    keys, probs, bits = _flip_schedule(circuit, noise, seed)
    ideal = 0
    for i in range(len(circuit.measured)):
        ideal |= circuit.ideal_bit(i) << i
    packed = get_sampler()(ideal, keys, probs, bits, shots)
    width = len(circuit.measured)
    values, freqs = np.unique(packed, return_counts=True)
    counts = {format(int(v), f"0{width}b") if width else "": int(n)
              for v, n in zip(values, freqs)}
    return Counts(counts=counts, shots=shots)


def run_rounds(circuit: TranspiledCircuit, noise: NoiseSpec, shots: int,
               rounds: int, seed: int) -> Counts:
    """Pool several executions with per-round derived seeds (round r uses seed+r)."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    pooled: dict[str, int] = {}
    for r in range(rounds):
        part = execute(circuit, noise, shots, seed + r)
        for outcome, n in part.counts.items():
            pooled[outcome] = pooled.get(outcome, 0) + n
    return Counts(counts=pooled, shots=shots * rounds)


def exact_survival(circuit: TranspiledCircuit, noise: NoiseSpec) -> Fingerprint:
    """Closed-form survival under the flip model.

    A measured bit ends up correct when an even number of its flip
    opportunities fire, so survival is (1 + prod_k (1 - 2 p_k)) / 2 over that
    qubit's opportunities.
    """
    _check(circuit, noise)
    profile = noise.true_profile
    parity = {q: 1.0 for q in circuit.measured}
    for step in walk_ops(circuit):
        for ev in step.events:
            if ev.logical in parity:
                p = profile.rate_for(ev.error_key) + noise.hidden_rate
                if p >= 1.0:
                    raise ValueError(f"effective flip probability {p} not < 1")
                parity[ev.logical] *= 1.0 - 2.0 * p
    return Fingerprint(tuple((1.0 + parity[q]) / 2.0 for q in circuit.measured))


def survival_from_counts(counts: Counts, ideal_output: str) -> Fingerprint:
    """Per-qubit marginal survival: fraction of shots whose bit i came out ideal."""
    if not counts.counts:
        raise ValueError("empty counts")
    width = len(next(iter(counts.counts)))
    if width != len(ideal_output):
        raise ValueError("ideal_output width does not match outcome strings")
    survivals = []
    for i in range(width):
        good = sum(n for outcome, n in counts.counts.items()
                   if bit_at(outcome, i) == bit_at(ideal_output, i))
        survivals.append(good / counts.shots)
    return Fingerprint(tuple(survivals))


def counts_to_json(counts: Counts, *, seed: int | None = None) -> str:
    doc: dict = {"shots": counts.shots, "counts": dict(sorted(counts.counts.items()))}
    if seed is not None:
        doc["seed"] = seed
    return json.dumps(doc, indent=2)


def counts_from_json(document: str) -> tuple[Counts, int | None]:
    raw = json.loads(document)
    return Counts(counts=raw["counts"], shots=raw["shots"]), raw.get("seed")
