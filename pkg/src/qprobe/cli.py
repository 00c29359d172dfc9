"""Command line front end.

Subcommands: identify, detect-sub, detect-fab, sweep, trace.  Experiments
are driven by a fleet config file and probe specs; reports are emitted as
JSON or CSV and contain no timestamps or environment state, so two runs
with identical flags produce byte-identical output.

Exit codes: 0 for honest / fully identified, 2 when fraud (or an identity
mismatch) is detected, 1 for configuration and I/O errors.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from .circuit import CircuitError, TranspiledCircuit, compose_probe
from .cloud import AttackConfig, QuantumCloud, load_fleet
from .detector import DEFAULT_THRESHOLD, detect, manhattan_avg, match_device
from .device import ProfileError, load_profile, topology_compatible
from .devicesim import TopologyError, survival_from_counts
from .estimator import estimate_fingerprint, trace_survival

__all__ = [
    "ProbeSpec",
    "ExperimentReport",
    "parse_probe_args",
    "parse_strategy",
    "run_identify",
    "run_detect_substitution",
    "run_detect_fabrication",
    "run_threshold_sweep",
    "main",
]

# Rows whose best and runner-up distances are closer than this are flagged
# as ambiguous identifications.
AMBIGUITY_MARGIN = 0.005


class CommandError(ValueError):
    """Bad experiment configuration; maps to exit code 1."""


@dataclass(frozen=True)
class ProbeSpec:
    """One probe: a list of (secret, mapping) subprobes composed on a device."""

    subprobes: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def label(self) -> str:
        return "+".join(f"bv:{secret}@{','.join(map(str, mapping))}"
                        for secret, mapping in self.subprobes)

    @property
    def size(self) -> int:
        return sum(len(secret) + 1 for secret, _ in self.subprobes)

    def build(self, cloud: QuantumCloud) -> tuple[TranspiledCircuit, str]:
        """Transpile against the first catalog device that accepts the probe."""
        failures = []
        for device_id in cloud.device_ids():
            topology = cloud.get_profile(device_id).topology
            try:
                return compose_probe(self.subprobes, topology), device_id
            except (CircuitError, KeyError) as exc:
                failures.append(f"{device_id}: {exc}")
        raise CommandError("probe fits no fleet device; " + "; ".join(failures))


def parse_probe_args(probes: tuple[str, ...], mappings: tuple[str, ...]) -> list[ProbeSpec]:
    """Pair up repeated --probe/--mapping flags into probe specs."""
    if not probes:
        raise CommandError("at least one --probe is required")
    if len(probes) != len(mappings):
        raise CommandError("--probe and --mapping must be given the same number of times")
    specs = []
    for probe, mapping in zip(probes, mappings):
        secrets = []
        for part in probe.split("+"):
            if not part.startswith("bv:"):
                raise CommandError(f"probe part {part!r} must look like bv:<secret>")
            secret = part[len("bv:"):]
            if not secret or any(c not in "01" for c in secret):
                raise CommandError(f"probe secret {secret!r} must be a bitstring")
            secrets.append(secret)
        groups = []
        for group in mapping.split(";"):
            try:
                groups.append(tuple(int(x) for x in group.split(",") if x != ""))
            except ValueError:
                raise CommandError(f"mapping group {group!r} must be comma-separated ints") from None
        if len(groups) != len(secrets):
            raise CommandError(f"probe {probe!r} has {len(secrets)} subprobes "
                               f"but mapping {mapping!r} has {len(groups)} groups")
        for secret, group in zip(secrets, groups):
            if len(group) != len(secret) + 1:
                raise CommandError(
                    f"secret {secret!r} needs {len(secret) + 1} mapped qubits, got {len(group)}")
        specs.append(ProbeSpec(tuple(zip(secrets, groups))))
    return specs


def _split_overrides(text: str) -> list[str]:
    """Split on commas, except inside parentheses (CNOT labels contain one)."""
    pieces: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in text:
        if ch == "," and depth == 0:
            pieces.append("".join(current))
            current = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        current.append(ch)
    pieces.append("".join(current))
    return pieces


def parse_strategy(text: str) -> dict:
    """Parse a fabrication strategy flag: scale:<f> or set:<Label=rate,...>."""
    if text.startswith("scale:"):
        try:
            return {"scale": float(text[len("scale:"):])}
        except ValueError:
            raise CommandError(f"bad scale factor in {text!r}") from None
    if text.startswith("set:"):
        body = text[len("set:"):]
        if not body:
            raise CommandError("set: strategy needs at least one override")
        overrides = {}
        for piece in _split_overrides(body):
            label, sep, value = piece.partition("=")
            if not sep:
                raise CommandError(f"override {piece!r} must look like Label=rate")
            try:
                overrides[label] = float(value)
            except ValueError:
                raise CommandError(f"bad rate in override {piece!r}") from None
        return {"overrides": overrides}
    raise CommandError(f"strategy {text!r} must start with scale: or set:")


@dataclass
class ExperimentReport:
    kind: str
    params: dict
    trials: list[dict]
    summary: dict

    def to_json(self) -> str:
        doc = {"kind": self.kind, "params": self.params,
               "trials": self.trials, "summary": self.summary}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        if self.kind == "identify":
            return self._matrix_csv()
        if not self.trials:
            return "\n"
        columns = sorted(self.trials[0])
        lines = [",".join(columns)]
        for trial in self.trials:
            lines.append(",".join(_csv_cell(trial.get(c)) for c in columns))
        return "\n".join(lines) + "\n"

    def _matrix_csv(self) -> str:
        candidates = self.params["candidates"]
        lines = [",".join(["device"] + list(candidates))]
        for trial in self.trials:
            distances = trial.get("distances") or {}
            row = [trial["device"]] + [_csv_cell(distances.get(c)) for c in candidates]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(report: ExperimentReport, out: str | None, fmt: str) -> None:
    text = report.to_json() if fmt == "json" else report.to_csv()
    if out is None:
        click.echo(text, nl=False)
    else:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / f"{report.kind}.{'json' if fmt == 'json' else 'csv'}"
        target.write_text(text)
        click.echo(f"wrote {target}")


# --- experiment drivers -------------------------------------------------------


def run_identify(cloud: QuantumCloud, probe: ProbeSpec, shots: int, rounds: int,
                 seed: int) -> tuple[ExperimentReport, int]:
    """Blind identification: probe every device, match against every candidate."""
    circuit, reference = probe.build(cloud)
    candidates = [d for d in cloud.device_ids()
                  if topology_compatible(circuit, cloud.get_profile(d).topology)]
    expected = {d: estimate_fingerprint(circuit, cloud.get_profile(d)) for d in candidates}

    trials = []
    correct = 0
    ambiguous = []
    for i, device_id in enumerate(cloud.device_ids()):
        row_seed = seed + i * rounds
        try:
            job = cloud.submit(device_id, circuit, shots, rounds, row_seed)
        except TopologyError:
            trials.append({"device": device_id, "seed": row_seed, "matched": None,
                           "correct": False, "margin": None, "distances": None})
            continue
        observed = survival_from_counts(job.counts, circuit.ideal_output)
        best, distances = match_device(expected, observed)
        ranked = sorted(distances.values())
        margin = ranked[1] - ranked[0] if len(ranked) > 1 else None
        if margin is not None and margin < AMBIGUITY_MARGIN:
            ambiguous.append(device_id)
        if best == device_id:
            correct += 1
        trials.append({"device": device_id, "seed": row_seed, "matched": best,
                       "correct": best == device_id, "margin": margin,
                       "distances": distances})

    rows = len(trials)
    report = ExperimentReport(
        kind="identify",
        params={"probe": probe.label, "shots": shots, "rounds": rounds, "seed": seed,
                "reference_device": reference, "candidates": candidates},
        trials=trials,
        summary={"rows": rows, "correct": correct,
                 "accuracy": correct / rows if rows else None,
                 "ambiguous": ambiguous},
    )
    return report, 0 if correct == rows else 2


def run_detect_substitution(cloud: QuantumCloud, victim: str, actual: str,
                            probe: ProbeSpec, shots: int, rounds: int, seed: int,
                            threshold: float) -> tuple[ExperimentReport, int]:
    """Mount a substitution attack and test whether probing catches it."""
    cloud.set_attack(AttackConfig.substitution(victim, actual))
    circuit, _ = probe.build(cloud)
    if not topology_compatible(circuit, cloud.get_profile(victim).topology):
        raise CommandError(f"probe does not fit victim device {victim!r}")
    expected = estimate_fingerprint(circuit, cloud.get_profile(victim))
    trial: dict = {"probe": probe.label, "victim": victim, "actual": actual,
                   "seed": seed, "threshold": threshold}
    try:
        job = cloud.submit(victim, circuit, shots, rounds, seed)
    except TopologyError:
        # The platform could not even run the probe on the stand-in machine;
        # that is caught immediately.
        trial.update({"topology_error": True, "distance": None,
                      "classification": "fraudulent"})
        code = 2
    else:
        observed = survival_from_counts(job.counts, circuit.ideal_output)
        verdict = detect(expected, observed, threshold)
        trial.update({"topology_error": False, "distance": verdict.distance,
                      "classification": verdict.classification})
        code = 2 if verdict.is_fraud else 0
    report = ExperimentReport(
        kind="detect-sub",
        params={"probe": probe.label, "victim": victim, "actual": actual,
                "shots": shots, "rounds": rounds, "seed": seed, "threshold": threshold},
        trials=[trial],
        summary={"classification": trial["classification"],
                 "distance": trial["distance"]},
    )
    return report, code


def run_detect_fabrication(cloud: QuantumCloud, device_id: str, strategy: dict,
                           probes: list[ProbeSpec], shots: int, rounds: int,
                           seed: int, threshold: float) -> tuple[ExperimentReport, int]:
    """Advertise a doctored profile and probe the device against it."""
    cloud.set_attack(AttackConfig.fabrication(device_id, scale=strategy.get("scale"),
                                              overrides=strategy.get("overrides")))
    trials = []
    n_fraud = 0
    for i, probe in enumerate(probes):
        circuit, _ = probe.build(cloud)
        if not topology_compatible(circuit, cloud.get_profile(device_id).topology):
            raise CommandError(f"probe {probe.label!r} does not fit device {device_id!r}")
        combo_seed = seed + i * rounds
        expected = estimate_fingerprint(circuit, cloud.get_profile(device_id))
        job = cloud.submit(device_id, circuit, shots, rounds, combo_seed)
        observed = survival_from_counts(job.counts, circuit.ideal_output)
        verdict = detect(expected, observed, threshold)
        n_fraud += verdict.is_fraud
        trials.append({"probe": probe.label, "device": device_id, "seed": combo_seed,
                       "distance": verdict.distance, "threshold": threshold,
                       "classification": verdict.classification})
    report = ExperimentReport(
        kind="detect-fab",
        params={"device": device_id, "strategy": strategy, "shots": shots,
                "rounds": rounds, "seed": seed, "threshold": threshold,
                "probes": [p.label for p in probes]},
        trials=trials,
        summary={"trials": len(trials), "fraudulent": n_fraud},
    )
    return report, 2 if n_fraud else 0


def run_threshold_sweep(cloud: QuantumCloud, probes: list[ProbeSpec], shots: int,
                        rounds: int, seed: int) -> tuple[ExperimentReport, int]:
    """Honest and cross-device distance distributions over a set of probes.

    The summary reports, per probe size and overall, the honest mean/max and
    the cross-pair minimum, plus the separating gap they leave around a
    usable decision threshold.
    """
    trials = []
    job_index = 0
    for probe in probes:
        circuit, _ = probe.build(cloud)
        compatible = [d for d in cloud.device_ids()
                      if topology_compatible(circuit, cloud.get_profile(d).topology)]
        expected = {d: estimate_fingerprint(circuit, cloud.get_profile(d))
                    for d in compatible}
        for device_id in compatible:
            job_seed = seed + job_index * rounds
            job_index += 1
            job = cloud.submit(device_id, circuit, shots, rounds, job_seed)
            observed = survival_from_counts(job.counts, circuit.ideal_output)
            for candidate in compatible:
                trials.append({
                    "probe": probe.label, "size": probe.size, "device": device_id,
                    "candidate": candidate, "seed": job_seed,
                    "pair": "honest" if candidate == device_id else "cross",
                    "distance": manhattan_avg(expected[candidate], observed),
                })

    def stats(rows: list[dict]) -> dict | None:
        if not rows:
            return None
        values = [t["distance"] for t in rows]
        return {"n": len(values), "mean": sum(values) / len(values),
                "min": min(values), "max": max(values)}

    honest = [t for t in trials if t["pair"] == "honest"]
    cross = [t for t in trials if t["pair"] == "cross"]
    by_size = {}
    for size in sorted({t["size"] for t in trials}):
        by_size[str(size)] = {
            "honest": stats([t for t in honest if t["size"] == size]),
            "cross": stats([t for t in cross if t["size"] == size]),
        }
    summary: dict = {"honest": stats(honest), "cross": stats(cross), "by_size": by_size}
    if honest and cross:
        gap = [summary["honest"]["max"], summary["cross"]["min"]]
        summary["gap"] = gap
        summary["gap_valid"] = gap[0] < gap[1]
        summary["threshold_in_gap"] = gap[0] <= DEFAULT_THRESHOLD < gap[1]
    else:
        summary["gap"] = None
        summary["note"] = "no cross pairs; gap not computable"
    report = ExperimentReport(
        kind="sweep",
        params={"probes": [p.label for p in probes], "shots": shots,
                "rounds": rounds, "seed": seed},
        trials=trials,
        summary=summary,
    )
    return report, 0


# --- click wiring ---------------------------------------------------------


@click.group()
def cli() -> None:
    """Fingerprint quantum cloud devices and catch dishonest providers."""


def _fleet_options(fn):
    fn = click.option("--fleet", "fleet_path", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="Fleet config JSON.")(fn)
    fn = click.option("--probe", "probes", multiple=True, required=True,
                      help="Probe spec bv:<secret>, '+'-joined for composites.")(fn)
    fn = click.option("--mapping", "mappings", multiple=True, required=True,
                      help="Initial mapping a,b,c (';'-separated per subprobe).")(fn)
    fn = click.option("--shots", default=4000, show_default=True, help="Shots per round.")(fn)
    fn = click.option("--rounds", default=3, show_default=True, help="Rounds to pool.")(fn)
    fn = click.option("--seed", default=0, show_default=True, help="Base RNG seed.")(fn)
    fn = click.option("--hidden-rate", default=None, type=float,
                      help="Override every device's hidden per-op flip rate.")(fn)
    fn = click.option("--out", default=None, type=click.Path(file_okay=False),
                      help="Directory for the report file (default: stdout).")(fn)
    fn = click.option("--format", "fmt", default="json", show_default=True,
                      type=click.Choice(["json", "csv"]), help="Report encoding.")(fn)
    return fn


def _single_probe(probes, mappings) -> ProbeSpec:
    specs = parse_probe_args(probes, mappings)
    if len(specs) != 1:
        raise CommandError("this command takes exactly one --probe/--mapping pair")
    return specs[0]


@cli.command()
@_fleet_options
def identify(fleet_path, probes, mappings, shots, rounds, seed, hidden_rate, out, fmt):
    """Match every fleet device against all advertised profiles."""
    cloud = load_fleet(fleet_path, hidden_rate=hidden_rate)
    report, code = run_identify(cloud, _single_probe(probes, mappings), shots, rounds, seed)
    _emit(report, out, fmt)
    click.echo(f"identify: {report.summary['correct']}/{report.summary['rows']} correct")
    sys.exit(code)


@cli.command("detect-sub")
@_fleet_options
@click.option("--victim", required=True, help="Device the user thinks they are renting.")
@click.option("--actual", required=True, help="Device the provider really uses.")
@click.option("--threshold", default=DEFAULT_THRESHOLD, show_default=True,
              help="Fraud decision threshold on fingerprint distance.")
def detect_sub(fleet_path, probes, mappings, shots, rounds, seed, hidden_rate, out, fmt,
               victim, actual, threshold):
    """Mount a machine-substitution attack and probe the victim device."""
    cloud = load_fleet(fleet_path, hidden_rate=hidden_rate)
    report, code = run_detect_substitution(
        cloud, victim, actual, _single_probe(probes, mappings), shots, rounds, seed, threshold)
    _emit(report, out, fmt)
    click.echo(f"detect-sub: {report.summary['classification']}")
    sys.exit(code)


@cli.command("detect-fab")
@_fleet_options
@click.option("--device", "device_id", required=True, help="Device whose profile is forged.")
@click.option("--fab", "strategy_text", required=True,
              help="Fabrication strategy: scale:<f> or set:<Label=rate,...>.")
@click.option("--threshold", default=DEFAULT_THRESHOLD, show_default=True,
              help="Fraud decision threshold on fingerprint distance.")
def detect_fab(fleet_path, probes, mappings, shots, rounds, seed, hidden_rate, out, fmt,
               device_id, strategy_text, threshold):
    """Advertise a forged calibration profile and probe against it."""
    cloud = load_fleet(fleet_path, hidden_rate=hidden_rate)
    report, code = run_detect_fabrication(
        cloud, device_id, parse_strategy(strategy_text),
        parse_probe_args(probes, mappings), shots, rounds, seed, threshold)
    _emit(report, out, fmt)
    click.echo(f"detect-fab: {report.summary['fraudulent']}/{report.summary['trials']} fraudulent")
    sys.exit(code)


@cli.command()
@_fleet_options
def sweep(fleet_path, probes, mappings, shots, rounds, seed, hidden_rate, out, fmt):
    """Measure honest and cross-device distance distributions."""
    cloud = load_fleet(fleet_path, hidden_rate=hidden_rate)
    report, code = run_threshold_sweep(
        cloud, parse_probe_args(probes, mappings), shots, rounds, seed)
    _emit(report, out, fmt)
    gap = report.summary.get("gap")
    click.echo(f"sweep: gap={gap}")
    sys.exit(code)


@cli.command()
@click.option("--profile", "profile_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Device profile JSON.")
@click.option("--probe", "probes", multiple=True, required=True)
@click.option("--mapping", "mappings", multiple=True, required=True)
def trace(profile_path, probes, mappings):
    """Print the survival walk of a probe under a published profile."""
    profile = load_profile(Path(profile_path).read_text())
    spec = _single_probe(probes, mappings)
    circuit = compose_probe(spec.subprobes, profile.topology)
    steps = trace_survival(circuit, profile)
    ops = circuit.ops
    for op_index, tracks in steps:
        if op_index < 0:
            head = f"{'init':<18}"
        else:
            op = ops[op_index]
            regs = ",".join(map(str, op.registers))
            head = f"op{op_index:<3} {op.gate.value:<8}({regs})"
            head = f"{head:<18}"
        body = "  ".join(f"q{t.logical}@{t.register} {t.survival:.6f}" for t in tracks)
        click.echo(f"{head} {body}")


def main(argv: list[str] | None = None) -> int:
    """Entry point with experiment-grade exit codes (0 clean, 2 fraud, 1 error)."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except SystemExit as exc:  # raised by commands to signal the verdict
        return int(exc.code or 0)
    except click.ClickException as exc:
        exc.show()
        return 1
    except (CommandError, ProfileError, CircuitError, TopologyError,
            KeyError, ValueError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
