import json

import numpy as np
import pytest

from dfqsim.cli import main
from dfqsim.config import ConfigError, parse_scene_config
from dfqsim.dynamics import alternating_xy_sequence, gate_fidelity, sequence_unitary
from dfqsim.geometry import couplings_for
from dfqsim.grape import swap_target
from dfqsim.logical import reduce_to_logical
from dfqsim.pulseio import load_pulse_csv, write_pulse_csv

CASE1_YAML = """
seed: 7
constants:
  d_ghz: 2.87
  b0_gauss: 500.0
pairs:
  - r_pq_nm: 0.1635
    theta_pq: 0.45pi
    phi_pq: 0.0
    r_pnv_nm: 1.3
    theta_pnv: 0.05pi
    phi_pnv: 0.2pi
noise:
  delta1_grid: [-0.02, 0.0, 0.02]
  jitter_grid_khz: [0.0, 0.2]
maps:
  orientation_samples: 2000
"""

TWO_PAIR_YAML = """
seed: 3
actuator:
  h_nm: 1.0
  d_nm: 0.85
pairs:
  - theta_pq: 0.45pi
    midpoint_nm: [0.0, 0.0, 0.0]
  - theta_pq: 0.35pi
    midpoint_nm: [2.0, 0.0, 0.0]
"""


def test_parse_case1_config():
    cfg = parse_scene_config(CASE1_YAML)
    assert cfg.seed == 7
    cs = couplings_for(cfg.scene)
    assert abs(cs.A - (-12.7)) < 0.1
    assert abs(cs.B - (-6.0)) < 0.2
    assert cfg.noise.jitter_grid_khz == (0.0, 0.2)


def test_parse_two_pair_config():
    cfg = parse_scene_config(TWO_PAIR_YAML)
    c1 = couplings_for(cfg.scene, 0)
    c2 = couplings_for(cfg.scene, 1)
    assert abs(c1.B - 8.0) < 0.3
    assert abs(c2.B - (-3.7)) < 0.3


def test_unknown_key_reports_location():
    bad = CASE1_YAML.replace("b0_gauss", "b0_gauus")
    with pytest.raises(ConfigError) as err:
        parse_scene_config(bad)
    assert "b0_gauus" in str(err.value)
    assert "line" in str(err.value) and "column" in str(err.value)


def test_angle_suffixes():
    cfg = parse_scene_config(CASE1_YAML.replace("0.45pi", "1.413716694115407rad"))
    cs = couplings_for(cfg.scene)
    assert abs(cs.A - (-12.7)) < 0.1
    with pytest.raises(ConfigError):
        parse_scene_config(CASE1_YAML.replace("0.45pi", "0.45turns"))


def test_missing_pairs_rejected():
    with pytest.raises(ConfigError):
        parse_scene_config("seed: 1\n")


def _write_config(tmp_path, text):
    path = tmp_path / "scene.yaml"
    path.write_text(text)
    return str(path)


def test_cli_couplings_prints_reference_values(tmp_path, capsys):
    cfg = _write_config(tmp_path, CASE1_YAML)
    code = main(["--config", cfg, "--out", str(tmp_path), "couplings"])
    out = capsys.readouterr().out
    assert code == 0
    assert "A = -12.7" in out
    assert "B = -6.0" in out
    assert (tmp_path / "coupling_maps.csv").exists()
    assert (tmp_path / "two_qubit_profile.csv").exists()


def test_cli_couplings_deterministic(tmp_path):
    cfg = _write_config(tmp_path, CASE1_YAML)
    main(["--config", cfg, "--out", str(tmp_path / "a"), "couplings"])
    main(["--config", cfg, "--out", str(tmp_path / "b"), "couplings"])
    for name in ("coupling_maps.csv", "two_qubit_profile.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_parse_error_exit_code(tmp_path):
    cfg = _write_config(tmp_path, CASE1_YAML + "\nbogus_key: 1\n")
    assert main(["--config", cfg, "--out", str(tmp_path), "couplings"]) == 2


def test_cli_geometry_error_exit_code(tmp_path):
    cfg = _write_config(tmp_path, CASE1_YAML)
    # cnot synthesis needs two pairs
    assert main(["--config", cfg, "--out", str(tmp_path), "grape", "--target", "cnot"]) == 3


def test_cli_missing_pulse_file_exit_code(tmp_path):
    cfg = _write_config(tmp_path, CASE1_YAML)
    code = main(
        ["--config", cfg, "--out", str(tmp_path), "protocol", "--which", "init",
         "--pulse-file", str(tmp_path / "nope.csv")]
    )
    assert code == 5


def test_cli_protocol_rf_report(tmp_path):
    cfg = _write_config(tmp_path, CASE1_YAML)
    code = main(["--config", cfg, "--out", str(tmp_path), "protocol", "--which", "rf"])
    assert code == 0
    report = json.loads((tmp_path / "protocol_rf.json").read_text())
    assert report["transfer_Tplus_to_T0"] >= 0.99
    assert report["disturb_Tminus_to_T0"] <= 0.01


def test_cli_schedule(tmp_path):
    cfg = _write_config(tmp_path, CASE1_YAML)
    circuit = [
        {"gate": "cnot", "control": 0, "target": 1},
        {"gate": "single", "qubit": 1, "name": "h"},
    ]
    cpath = tmp_path / "circuit.json"
    cpath.write_text(json.dumps(circuit))
    code = main(["--config", cfg, "--out", str(tmp_path), "schedule", "--circuit", str(cpath)])
    assert code == 0
    budget = json.loads((tmp_path / "schedule.json").read_text())
    assert budget["operation_count"] == 2
    lines = (tmp_path / "itinerary.jsonl").read_text().strip().splitlines()
    assert all("kind" in json.loads(line) for line in lines)


def test_cli_bad_circuit_indices(tmp_path):
    cfg = _write_config(tmp_path, CASE1_YAML)
    cpath = tmp_path / "circuit.json"
    cpath.write_text(json.dumps({"qubits": 2, "gates": [{"gate": "cnot", "control": 0, "target": 5}]}))
    assert main(["--config", cfg, "--out", str(tmp_path), "schedule", "--circuit", str(cpath)]) == 3


def test_pulse_csv_roundtrip_preserves_fidelity(tmp_path):
    rng = np.random.default_rng(13)
    seq = alternating_xy_sequence(rng.uniform(-300, 300, 40), 1.5)
    model = reduce_to_logical(couplings_for_case1())
    fid = gate_fidelity(sequence_unitary(model, seq), swap_target())
    path = tmp_path / "pulse.csv"
    write_pulse_csv(path, seq)
    reloaded = load_pulse_csv(path)
    fid2 = gate_fidelity(sequence_unitary(model, reloaded), swap_target())
    assert abs(fid - fid2) < 1e-9
    assert np.array_equal(seq.amplitudes_khz, reloaded.amplitudes_khz)


def couplings_for_case1():
    from dfqsim.geometry import standard_scene

    return couplings_for(standard_scene(1))
