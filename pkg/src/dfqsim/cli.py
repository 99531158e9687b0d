"""Command-line entry point.

Verbs: couplings, grape, protocol, schedule, sweep. Global flags --config,
--seed, --out, --threads sit before the verb. Exit codes: 0 ok, 2 config
parse error, 3 geometry/index error, 4 optimizer non-convergence (best
effort result still written), 5 missing input artifact.

All randomness derives from the single config/--seed value, so identical
inputs give byte-identical output files; wall-clock timings go to stderr
only.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, SceneConfig, load_scene_config
from .dynamics import noise_sweep
from .geometry import (
    CouplingSet,
    GeometryError,
    coupling_maps,
    couplings_for,
    two_qubit_profile,
)
from .grape import (
    GrapeError,
    GrapeResult,
    cnot_target,
    swap_target,
    synthesize_cnot,
    synthesize_swap,
)
from .logical import reduce_to_logical
from .protocols import (
    RFPulse,
    fully_mixed_pair,
    pair_spectrum_from_hamiltonian,
    rf_population_trace,
    run_initialization,
    run_readout,
)
from .hamiltonians import pair_hamiltonian
from .pulseio import (
    atomic_write_text,
    coupling_maps_csv_text,
    fidelity_table_csv_text,
    itinerary_jsonl_text,
    json_report_text,
    load_pulse_csv,
    profile_csv_text,
    pulse_csv_text,
    write_pulse_csv,
)
from .scheduler import (
    CircuitError,
    CircuitGate,
    LogicalCircuit,
    compile_circuit,
    time_budget,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GEOMETRY = 3
EXIT_OPTIMIZER = 4
EXIT_MISSING = 5


class MissingArtifactError(FileNotFoundError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfqsim",
        description="Coupling maps, GRAPE pulses, protocol reports and "
        "actuator schedules for DF-qubit scenes.",
    )
    parser.add_argument("--config", required=True, help="scene config (YAML)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="parallel GRAPE restarts")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("couplings", help="coupling constants, maps and B1/B2 profile")

    p_grape = sub.add_parser("grape", help="synthesize a SWAP or CNOT pulse sequence")
    p_grape.add_argument("--target", choices=("swap", "cnot"), default=None)

    p_proto = sub.add_parser("protocol", help="initialization / readout / RF reports")
    p_proto.add_argument("--which", choices=("init", "readout", "rf"), required=True)
    p_proto.add_argument("--pulse-file", default=None, help="optimized SWAP pulse CSV")

    p_sched = sub.add_parser("schedule", help="compile a circuit into an itinerary")
    p_sched.add_argument("--circuit", required=True, help="circuit JSON file")

    p_sweep = sub.add_parser("sweep", help="noise sweep of a pulse sequence")
    p_sweep.add_argument("--pulse-file", default=None, help="pulse CSV (else synthesized)")
    p_sweep.add_argument("--target", choices=("swap", "cnot"), default=None)
    return parser


def _first_pair_couplings(cfg: SceneConfig, with_neighbor: bool = True) -> CouplingSet:
    neighbor = 1 if with_neighbor and len(cfg.scene.pairs) > 1 else None
    return couplings_for(cfg.scene, 0, neighbor_index=neighbor, constants=cfg.constants)


def _swap_sequence(cfg: SceneConfig, seed: int, threads: int, pulse_file):
    if pulse_file is not None:
        path = Path(pulse_file)
        if not path.exists():
            raise MissingArtifactError(f"pulse file not found: {path}")
        return load_pulse_csv(path), None
    couplings = _first_pair_couplings(cfg, with_neighbor=False)
    result = synthesize_swap(
        couplings,
        seed=seed,
        robust_jitter_khz=cfg.grape.robust_jitter_khz,
        max_iters=cfg.grape.max_iters,
        restarts=cfg.grape.seeds,
        threads=threads,
    )
    return result.sequence, result


def cmd_couplings(cfg: SceneConfig, out: Path, seed: int) -> int:
    couplings = _first_pair_couplings(cfg)
    line = f"A = {couplings.A:.4f} kHz, B = {couplings.B:.4f} kHz"
    if couplings.B_prime is not None:
        line += f", B' = {couplings.B_prime:.4f} kHz"
    print(line)

    maps = coupling_maps(
        h_range_nm=(cfg.maps.h_min_nm, cfg.maps.h_max_nm),
        d_max_nm=cfg.maps.d_max_nm,
        orientation_samples=cfg.maps.orientation_samples,
        seed=seed,
        bin_width_khz=cfg.maps.bin_khz,
        constants=cfg.constants,
    )
    atomic_write_text(out / "coupling_maps.csv", coupling_maps_csv_text(maps))

    d_grid = np.round(np.arange(0.0, 2.0001, 0.05), 6)
    profile = two_qubit_profile(d_grid, constants=cfg.constants)
    atomic_write_text(out / "two_qubit_profile.csv", profile_csv_text(profile))
    print(f"wrote {out / 'coupling_maps.csv'} and {out / 'two_qubit_profile.csv'}")
    return EXIT_OK


def _grape_report(result: GrapeResult) -> dict:
    return {
        "fidelity": result.fidelity,
        "member_fidelities": list(result.member_fidelities),
        "fidelity_trace": [float(x) for x in result.fidelity_trace],
        "converged": result.converged,
        "iterations": result.iterations,
        "restart": result.seed,
        "message": result.message,
    }


def cmd_grape(cfg: SceneConfig, out: Path, seed: int, threads: int, target) -> int:
    target = target or cfg.grape.target
    if target == "swap":
        couplings = _first_pair_couplings(cfg, with_neighbor=False)
        result = synthesize_swap(
            couplings,
            seed=seed,
            robust_jitter_khz=cfg.grape.robust_jitter_khz,
            max_iters=cfg.grape.max_iters,
            restarts=cfg.grape.seeds,
            threads=threads,
        )
    else:
        if len(cfg.scene.pairs) < 2:
            raise GeometryError("cnot synthesis needs a two-pair scene")
        c1 = couplings_for(cfg.scene, 0, constants=cfg.constants)
        c2 = couplings_for(cfg.scene, 1, constants=cfg.constants)
        result = synthesize_cnot(
            c1,
            c2,
            seed=seed,
            max_iters=cfg.grape.max_iters,
            restarts=cfg.grape.seeds,
            threads=threads,
        )
    write_pulse_csv(out / f"pulses_{target}.csv", result.sequence)
    atomic_write_text(out / f"grape_{target}.json", json_report_text(_grape_report(result)))
    print(f"{target} fidelity {result.fidelity:.6f} ({result.message})")
    print(f"wall clock {result.wall_clock_s:.1f} s", file=sys.stderr)
    if not result.converged:
        return EXIT_OPTIMIZER
    return EXIT_OK


def cmd_protocol(cfg: SceneConfig, out: Path, seed: int, threads: int, which, pulse_file) -> int:
    couplings = _first_pair_couplings(cfg, with_neighbor=False)
    pair_h = pair_hamiltonian(cfg.scene, 0, cfg.constants)
    spectrum = pair_spectrum_from_hamiltonian(pair_h)

    if which == "rf":
        pulse = RFPulse.pi_pulse(spectrum.delta1_khz)
        _, pops_plus = rf_population_trace(pulse, spectrum, initial_index=2)
        _, pops_minus = rf_population_trace(pulse, spectrum, initial_index=3)
        report = {
            "delta1_khz": spectrum.delta1_khz,
            "delta2_khz": spectrum.delta2_khz,
            "splitting_minus_3A_khz": (spectrum.delta1_khz - spectrum.delta2_khz)
            - 3.0 * abs(couplings.A),
            "transfer_Tplus_to_T0": float(pops_plus[-1, 1]),
            "disturb_Tminus_to_T0": float(pops_minus[-1, 1]),
            "max_disturb_Tminus": float(pops_minus[:, 1].max()),
        }
        atomic_write_text(out / "protocol_rf.json", json_report_text(report))
        print(f"RF transfer {report['transfer_Tplus_to_T0']:.4f}, "
              f"selectivity leak {report['disturb_Tminus_to_T0']:.4f}")
        return EXIT_OK

    sequence, synth = _swap_sequence(cfg, seed, threads, pulse_file)
    if which == "init":
        report = run_initialization(couplings, sequence, spectrum=spectrum,
                                    constants=cfg.constants)
        payload = {
            "final_fidelity": report.fidelity,
            "step_fidelities": [[label, f] for label, f in report.step_fidelities],
        }
        if synth is not None:
            payload["swap_fidelity"] = synth.fidelity
        atomic_write_text(out / "protocol_init.json", json_report_text(payload))
        print(f"initialization fidelity {report.fidelity:.5f}")
        print(f"wall clock {report.wall_clock_s:.2f} s", file=sys.stderr)
        return EXIT_OK

    results = {}
    for label, column in (("0_L", 0), ("1_L", 1)):
        ket = np.zeros((4, 1), dtype=complex)
        ket[column] = 1.0
        res = run_readout(ket @ ket.conj().T, couplings, sequence)
        results[label] = {"p0": res.p0, "p1": res.p1}
    mixed = run_readout(fully_mixed_pair(), couplings, sequence)
    results["mixed"] = {"p0": mixed.p0, "p1": mixed.p1}
    results["contrast"] = abs(results["1_L"]["p1"] - results["0_L"]["p1"])
    atomic_write_text(out / "protocol_readout.json", json_report_text(results))
    print(f"readout contrast {results['contrast']:.5f}")
    return EXIT_OK


def _load_circuit(path: Path) -> LogicalCircuit:
    if not path.exists():
        raise MissingArtifactError(f"circuit file not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(payload, dict):
        qubit_count = payload.get("qubits")
        gate_list = payload.get("gates", [])
    else:
        qubit_count, gate_list = None, payload
    gates = []
    max_q = 0
    for entry in gate_list:
        kind = entry.get("gate")
        if kind == "cnot":
            g = CircuitGate.cnot(int(entry["control"]), int(entry["target"]))
        elif kind == "single":
            g = CircuitGate.single(int(entry["qubit"]), name=entry.get("name", "h"))
        else:
            raise ConfigError(f"unknown gate entry {entry!r}")
        gates.append(g)
        max_q = max(max_q, *g.qubits)
    if qubit_count is None:
        qubit_count = max_q + 1
    return LogicalCircuit(qubit_count=int(qubit_count), gates=tuple(gates))


def cmd_schedule(cfg: SceneConfig, out: Path, circuit_path: str) -> int:
    from .logical import rotation_axes

    circuit = _load_circuit(Path(circuit_path))
    couplings = _first_pair_couplings(cfg, with_neighbor=False)
    itinerary = compile_circuit(
        circuit,
        spacing_nm=cfg.scene.lattice_spacing_nm,
        axes=rotation_axes(couplings),
    )
    budget = time_budget(itinerary)
    atomic_write_text(out / "itinerary.jsonl", itinerary_jsonl_text(itinerary))
    atomic_write_text(
        out / "schedule.json",
        json_report_text(
            {
                "operation_count": budget.operation_count,
                "move_count": budget.move_count,
                "gate_time_us": budget.gate_time_us,
                "move_time_us": budget.move_time_us,
                "move_gate_ratio": budget.move_gate_ratio,
            }
        ),
    )
    print(
        f"{budget.operation_count} operations, move/gate time ratio "
        f"{budget.move_gate_ratio:.4f}"
    )
    return EXIT_OK


def cmd_sweep(cfg: SceneConfig, out: Path, seed: int, threads: int, pulse_file, target) -> int:
    target = target or cfg.grape.target
    if target == "cnot":
        raise ConfigError("sweep currently supports the swap target only")
    sequence, _ = _swap_sequence(cfg, seed, threads, pulse_file)
    couplings = _first_pair_couplings(cfg, with_neighbor=False)
    model = reduce_to_logical(couplings)
    table = noise_sweep(
        model,
        sequence,
        swap_target(),
        cfg.noise.delta1_grid,
        cfg.noise.jitter_grid_khz,
    )
    atomic_write_text(out / "sweep.csv", fidelity_table_csv_text(table))
    print(f"wrote {out / 'sweep.csv'} ({table.fidelity.size} points)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_scene_config(args.config)
        seed = cfg.seed if args.seed is None else args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "couplings":
            return cmd_couplings(cfg, out, seed)
        if args.command == "grape":
            return cmd_grape(cfg, out, seed, args.threads, args.target)
        if args.command == "protocol":
            return cmd_protocol(cfg, out, seed, args.threads, args.which, args.pulse_file)
        if args.command == "schedule":
            return cmd_schedule(cfg, out, args.circuit)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, seed, args.threads, args.pulse_file, args.target)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GeometryError, CircuitError) as exc:
        print(f"geometry/circuit error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except MissingArtifactError as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except GrapeError as exc:
        print(f"optimizer error: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
