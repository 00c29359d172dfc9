"""Compare the compiled flip sampler against the numpy reference.

Builds a routed probe with a realistic flip schedule (a multi-bit secret
placed across a line device, so routing inserts SWAPs), then times both
kernels over a range of shot counts.  Outputs are checked for exact
equality before anything is timed; speed means nothing if the kernels
disagree.

Run from the repo root:

    python benchmarks/kernel_bench.py
    python benchmarks/kernel_bench.py --shots 500000 --repeats 7
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qprobe import _flipcore
from qprobe.circuit import build_bv, transpile
from qprobe.device import DeviceProfile, Topology
from qprobe.devicesim import NoiseSpec, _flip_schedule


def bench_profile(n: int) -> DeviceProfile:
    edges = tuple((i, i + 1) for i in range(n - 1))
    return DeviceProfile(
        device_id="bench",
        topology=Topology(num_qubits=n, edges=edges),
        cnot_error={e: 0.012 for e in edges},
        single_qubit_error={q: 0.0015 for q in range(n)},
        measurement_error={q: 0.03 for q in range(n)},
        calibration_time="2026-01-01T00:00:00Z",
    )


def build_schedule(seed: int):
    profile = bench_profile(32)
    # inputs at both ends of the line so the router has real work to do
    mapping = [0, 31, 4, 27, 8, 23, 12, 19, 15]
    circuit = transpile(build_bv("11111111"), profile.topology, mapping)
    keys, probs, bits = _flip_schedule(circuit, NoiseSpec(profile), seed)
    ideal = 0
    for i in range(len(circuit.measured)):
        ideal |= circuit.ideal_bit(i) << i
    return circuit, ideal, keys, probs, bits


def time_sampler(fn, ideal, keys, probs, bits, shots, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(ideal, keys, probs, bits, shots)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--shots", type=int, default=200_000,
                        help="largest shot count to time (default 200000)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best-of is reported (default 5)")
    parser.add_argument("--seed", type=int, default=20260211)
    args = parser.parse_args()

    circuit, ideal, keys, probs, bits = build_schedule(args.seed)
    print(f"probe: {len(circuit.ops)} ops, {len(keys)} flip opportunities, "
          f"{len(circuit.measured)} measured qubits")

    compiled = _flipcore._COMPILED
    if compiled is None:
        print("compiled kernel not built; only the numpy reference is available")

    def run_compiled(ideal, keys, probs, bits, shots):
        out = np.empty(shots, dtype=np.uint64)
        compiled.sample_packed(ideal, keys, probs, bits.astype(np.int64), shots, out)
        return out

    shot_counts = []
    s = 2000
    while s < args.shots:
        shot_counts.append(s)
        s *= 10
    shot_counts.append(args.shots)

    header = f"{'shots':>9}  {'numpy':>12}  {'compiled':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for shots in shot_counts:
        ref, t_np = time_sampler(_flipcore.sample_packed_numpy,
                                 ideal, keys, probs, bits, shots, args.repeats)
        if compiled is None:
            print(f"{shots:>9}  {shots / t_np:>10.0f}/s  {'-':>12}  {'-':>8}")
            continue
        out, t_c = time_sampler(run_compiled,
                                ideal, keys, probs, bits, shots, args.repeats)
        if not np.array_equal(ref, out):
            print(f"{shots:>9}  KERNELS DISAGREE")
            return 1
        print(f"{shots:>9}  {shots / t_np:>10.0f}/s  {shots / t_c:>10.0f}/s  "
              f"{t_np / t_c:>7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
