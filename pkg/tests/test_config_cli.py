import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from jqfsim.cli import analytic_table, main
from jqfsim.config import ConfigError, loads, parse_config
from jqfsim.drives import GaussianRamp
from jqfsim.units import ghz, mhz

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
GOLDENS = Path(__file__).parent / "goldens"

BASE = """schema_version = 1
[qubits.dq]
freq_ghz = 5.0
alpha_mhz = -300.0
gamma_mhz = 0.002
phase_pi = {phase}
levels = 4
"""


def test_fig2_config():
    cfg = parse_config(CONFIGS / "fig2.cfg")
    assert cfg.jqf.gamma == pytest.approx(0.628319, abs=1e-6)
    assert cfg.jqf.phase == pytest.approx(math.pi)
    assert cfg.omega_d == pytest.approx(ghz(5.0017))
    assert cfg.experiment.name == "resonance"
    assert cfg.experiment.get("rabi") == pytest.approx(mhz(16.0))
    assert cfg.experiment.get("bracket_ghz") == (4.9995, 5.0035)


def test_phase_in_units_of_pi():
    cfg = loads(BASE.format(phase=0.5))
    assert cfg.dq.phase == pytest.approx(math.pi / 2)
    assert cfg.jqf is None


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="sgima"):
        loads(BASE.format(phase=0) + "[drive]\nshape = 'gaussian'\nsgima = 3\n")


@pytest.mark.parametrize("extra, msg", [
    ("", None),
    ("[drive]\nshape = 'gaussian'\nrabi_mhz = 5\n", "sigma_ns"),
    ("[sim]\nframe = 'moving'\n", "frame"),
    ("[sim]\ndt_ns = -1\n", "dt_ns"),
    ("[experiment]\nname = 'dance'\n", "dance"),
    ("[experiment]\nbracket_ghz = [5.1, 5.0]\n", "bracket_ghz"),
    ("[experiment]\nalphas_mhz = [0.0]\n", "alphas_mhz"),
    ("[drive]\nshape = 'triangle'\n", "triangle"),
])
def test_schema_errors(extra, msg):
    if msg is None:
        loads(BASE.format(phase=0) + extra)
        return
    with pytest.raises(ConfigError, match=msg):
        loads(BASE.format(phase=0) + extra)


def test_negative_gamma_and_version():
    with pytest.raises(ConfigError, match="gamma_mhz"):
        loads(BASE.format(phase=0).replace("0.002", "-1"))
    with pytest.raises(ConfigError, match="schema_version"):
        loads(BASE.format(phase=0).replace("schema_version = 1", "schema_version = 2"))


def test_toml_syntax_error_has_location():
    with pytest.raises(ConfigError, match="line"):
        loads("schema_version = 1\n[qubits.dq\n")


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        parse_config("/nonexistent/x.cfg")


def test_ramp_defaults_t0_to_two_sigma():
    cfg = loads(BASE.format(phase=0) + "[drive]\nshape='gaussian_ramp'\nrabi_mhz=16\nsigma_ns=10\n")
    assert isinstance(cfg.drive, GaussianRamp) and cfg.drive.t0 == 20.0


def test_all_shipped_configs_parse():
    names = {p.stem for p in CONFIGS.glob("*.cfg")}
    assert {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig9"} <= names
    for p in CONFIGS.glob("*.cfg"):
        parse_config(p)


def test_analytic_table_values():
    rows = dict(analytic_table(ghz(5), ghz(-0.3), ghz(0.016)))
    assert rows["shift_MHz"] == pytest.approx(1.707, abs=5e-4)
    assert rows["p1_max"] == pytest.approx(0.9943, abs=5e-5)
    assert {"E_plus_MHz", "E_minus_MHz", "sw_E_plus_MHz", "sw_E_minus_MHz", "p1_max_exact"} <= set(rows)


def test_cli_analytic(capsys):
    assert main(["analytic", "--omega", "5", "--alpha", "-0.3", "--rabi", "0.016"]) == 0
    out = capsys.readouterr().out
    assert "shift_MHz=1.707" in out and "p1_max=0.9943" in out


def test_cli_analytic_needs_inputs(capsys):
    assert main(["analytic", "--omega", "5"]) != 0
    assert "error kind=config" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["zero_drive", "fig4", "fig4_step"])
def test_simulate_matches_golden(tmp_path, capsys, name):
    assert main(["simulate", "--config", str(CONFIGS / f"{name}.cfg"), "--out", str(tmp_path)]) == 0
    produced = (tmp_path / "trajectory.csv").read_text()
    assert produced == (GOLDENS / f"{name}.csv").read_text()
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "jqfsim 0.1.0" in manifest and "wall_time_s" in manifest
    assert parse_config(CONFIGS / f"{name}.cfg").source.strip() in manifest


def test_zero_drive_p1_all_zero(tmp_path, capsys):
    main(["simulate", "--config", str(CONFIGS / "zero_drive.cfg"), "--out", str(tmp_path)])
    data = np.loadtxt(tmp_path / "trajectory.csv", delimiter=",", skiprows=1)
    assert np.all(data[:, 1] == 0.0)


def test_cli_error_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(BASE.format(phase=0) + "sgima = 1\n")
    proc = subprocess.run([sys.executable, "-m", "jqfsim", "simulate", "--config", str(bad)],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stderr.startswith("error kind=config") and "sgima" in proc.stderr


def _run_cli(args, log_level):
    env = {**os.environ, "JQF_SIM_LOG": log_level}
    return subprocess.run([sys.executable, "-m", "jqfsim", *args], capture_output=True,
                          text=True, env=env)


def test_log_env_var(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(BASE.format(phase=0) + "[qubits.jqf]\nfreq_ghz = 5.1\ngamma_mhz = 100\n"
                   "phase_pi = 1\n[sim]\nt_end_ns = 1.0\n")
    args = ["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]
    proc = _run_cli(args, "warn")
    assert proc.returncode == 0 and "frequencies differ" in proc.stderr
    assert "frequencies differ" not in _run_cli(args, "error").stderr
