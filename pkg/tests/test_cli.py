"""Config parsing, echo roundtrip, scenario runs, exit codes."""

import json
import math
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from cqdeph.cli import load_config, render_config, resolve_effective, run
from cqdeph.device import HBAR_SI, K_B_SI
from cqdeph.errors import ConfigError

DEVICE_BODY = """
scenario = device

[device]
E_C = 5 GHz_cyc
E_J_max = 10 GHz_cyc
omega_a = 6 GHz_cyc
omega_b = 6.5 GHz_cyc
L_a = 12 mm
L_b = 11 mm
c_cap = 170 pF_per_m
l_ind = 420 nH_per_m
C_g = 0.6 fF
C_a = 1.2 fF
V_g_dc = 0.267029439 mV
S_loop = 60 um2
d_dist = 2 um
tau = 160 ns

[effective]
chi = 360 MHz_rad
"""

SPECTRUM_BODY = """
scenario = spectrum

[effective]
omega_a = 1 Hz_rad
omega_a_prime = 0.9 Hz_rad
chi = 0.3 Hz_rad

[cutoff]
n_max_a = 2
n_max_b = 4

[spectrum]
ratio = 3
"""

DEPHASING_BODY = """
scenario = dephasing

[effective]
omega_a = 1 Hz_rad
omega_a_prime = 0.9 Hz_rad
chi = 0.3 Hz_rad

[cutoff]
n_max_a = 1
n_max_b = 3

[bath]
family = ohmic
coupling = 0.1
omega_c = 1 Hz_rad
beta = inf

[grid]
t_start = 0 s
t_stop = 20 s
t_count = 6
spacing = linear

[state]
kind = labels
amp_0 = 0 0 0 : 0.7071067811865476 0
amp_1 = 0 1 0 : 0 0.7071067811865476

[pairs]
pair_0 = 0 1 0 : 0 0 0
"""


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _cli(args, cwd=None):
    env = dict(os.environ, CQDEPH_NUMBA="0")
    return subprocess.run([sys.executable, "-m", "cqdeph", *args],
                          capture_output=True, text=True, env=env, cwd=cwd)


# ------------------------------------------------------------------ parsing

def test_unit_conversions(tmp_path):
    cfg = load_config(_write(tmp_path, DEVICE_BODY))
    over = dict(cfg.eff_overrides)
    assert over["chi"] == pytest.approx(3.6e8)
    assert cfg.tau == pytest.approx(1.6e-7)
    assert cfg.device.omega_a == pytest.approx(2 * math.pi * 6e9)
    # energies are entered as frequencies and converted through hbar
    assert cfg.device.E_C == pytest.approx(HBAR_SI * 2 * math.pi * 5e9)
    assert cfg.device.L_a == pytest.approx(0.012)
    assert cfg.device.C_g == pytest.approx(0.6e-15)


def test_empty_file_names_scenario(tmp_path):
    with pytest.raises(ConfigError, match="scenario"):
        load_config(_write(tmp_path, "\n"))


def test_missing_suffix_reports_key_and_line(tmp_path):
    body = "scenario = spectrum\n\n[effective]\nomega_a = 1\n"
    with pytest.raises(ConfigError, match=r"line 4: omega_a.*suffix"):
        load_config(_write(tmp_path, body))


def test_unknown_suffix_rejected(tmp_path):
    body = "scenario = spectrum\n\n[effective]\nomega_a = 1 THz_rad\n"
    with pytest.raises(ConfigError, match="THz_rad"):
        load_config(_write(tmp_path, body))


def test_unknown_key_reports_line(tmp_path):
    body = "scenario = spectrum\n[effective]\nomega_a = 1 Hz_rad\nzeta = 2\n"
    with pytest.raises(ConfigError, match=r"line 4: unknown key 'zeta'"):
        load_config(_write(tmp_path, body))


def test_unknown_section_rejected(tmp_path):
    body = "scenario = device\n[device]\n[plotting]\nstyle = fancy\n"
    with pytest.raises(ConfigError, match=r"\[plotting\]"):
        load_config(_write(tmp_path, body))


def test_section_not_allowed_for_scenario(tmp_path):
    body = "scenario = validate\n[cutoff]\nn_max_a = 2\nn_max_b = 2\n"
    with pytest.raises(ConfigError, match="validate"):
        load_config(_write(tmp_path, body))


def test_duplicate_key_rejected(tmp_path):
    body = ("scenario = spectrum\n[effective]\nomega_a = 1 Hz_rad\n"
            "omega_a = 2 Hz_rad\n")
    with pytest.raises(ConfigError, match="duplicate key"):
        load_config(_write(tmp_path, body))


def test_missing_required_device_key(tmp_path):
    body = "scenario = device\n\n[device]\nE_C = 5 GHz_cyc\n"
    with pytest.raises(ConfigError, match="E_J_max"):
        load_config(_write(tmp_path, body))


def test_bad_number_rejected(tmp_path):
    body = "scenario = spectrum\n[cutoff]\nn_max_a = two\nn_max_b = 2\n"
    with pytest.raises(ConfigError, match="not an integer"):
        load_config(_write(tmp_path, body))


def test_effective_without_device_needs_rates(tmp_path):
    body = ("scenario = spectrum\n[effective]\nomega_a = 1 Hz_rad\n"
            "[cutoff]\nn_max_a = 2\nn_max_b = 2\n")
    with pytest.raises(ConfigError, match="omega_a_prime"):
        load_config(_write(tmp_path, body))


def test_beta_and_temperature_conflict(tmp_path):
    body = (DEPHASING_BODY.replace("beta = inf",
                                   "beta = 2 s\ntemperature = 20 mK"))
    with pytest.raises(ConfigError, match="not both"):
        load_config(_write(tmp_path, body))


def test_temperature_converts_to_beta(tmp_path):
    body = DEPHASING_BODY.replace("beta = inf", "temperature = 20 mK")
    cfg = load_config(_write(tmp_path, body))
    assert cfg.beta == pytest.approx(HBAR_SI / (K_B_SI * 0.020))


def test_comments_and_blank_lines_ignored(tmp_path):
    body = "# top\nscenario = validate  # trailing\n\n# done\n"
    assert load_config(_write(tmp_path, body)).scenario == "validate"


def test_missing_table_file(tmp_path):
    body = DEPHASING_BODY.replace(
        "family = ohmic\ncoupling = 0.1\nomega_c = 1 Hz_rad",
        "family = tabulated\ntable = nope.txt")
    with pytest.raises(ConfigError, match="no such file"):
        load_config(_write(tmp_path, body))


def test_table_path_resolves_relative_to_config(tmp_path):
    w = np.linspace(0.01, 20.0, 200)
    np.savetxt(tmp_path / "dens.txt", np.column_stack([w, 0.1 * w * np.exp(-w)]))
    body = DEPHASING_BODY.replace(
        "family = ohmic\ncoupling = 0.1\nomega_c = 1 Hz_rad",
        "family = tabulated\ntable = dens.txt")
    cfg = load_config(_write(tmp_path, body))
    assert os.path.isabs(cfg.bath_table)
    assert os.path.isfile(cfg.bath_table)


# ------------------------------------------------------- echo and resolution

def test_echo_roundtrips_every_section(tmp_path):
    w = np.linspace(0.01, 20.0, 50)
    np.savetxt(tmp_path / "dens.txt", np.column_stack([w, 0.1 * w]))
    body = f"""
scenario = dephasing

[effective]
omega_a = 1.25 GHz_cyc
omega_a_prime = 1.1 GHz_cyc
chi = 360 MHz_rad
phi_b = 0.07

[cutoff]
n_max_a = 2
n_max_b = 2

[bath]
family = tabulated
table = dens.txt
beta = 0.3 ns

[grid]
t_start = 1 ns
t_stop = 400 ns
t_count = 7
spacing = log

[state]
kind = coherent
mode = A
alpha_re = 0.4
alpha_im = -0.2
qubit_level = 1
"""
    cfg = load_config(_write(tmp_path, body))
    echo_path = tmp_path / "echo.cfg"
    echo_path.write_text(render_config(cfg))
    assert load_config(str(echo_path)) == cfg


def test_echo_roundtrips_rational_ratio(tmp_path):
    body = SPECTRUM_BODY.replace("ratio = 3", "ratio = 3/2\ntol = 1e-10")
    cfg = load_config(_write(tmp_path, body))
    assert cfg.ratio == Fraction(3, 2)
    echo = tmp_path / "echo.cfg"
    echo.write_text(render_config(cfg))
    assert load_config(str(echo)) == cfg


def test_override_recomputes_derived_rates(tmp_path):
    base = load_config(_write(tmp_path, DEVICE_BODY, "a.cfg"))
    eff_base = resolve_effective(base)
    assert eff_base.chi == pytest.approx(3.6e8)  # explicit override wins

    body = DEVICE_BODY.replace("chi = 360 MHz_rad", "g_a = 100 MHz_rad")
    moved = load_config(_write(tmp_path, body, "b.cfg"))
    eff_moved = resolve_effective(moved)
    from cqdeph.device import cross_kerr
    assert eff_moved.chi == pytest.approx(cross_kerr(
        1e8, eff_moved.phi_b, moved.device.E_J_max, eff_moved.omega_a,
        moved.device.hbar))


# ------------------------------------------------------------ scenario runs

def test_run_device_report(tmp_path):
    cfg = load_config(_write(tmp_path, DEVICE_BODY))
    report = run(cfg, str(tmp_path / "out"))
    assert report["cross_phase"]["cycles"] == pytest.approx(9.1673, abs=1e-3)
    assert report["regime"]["worst_flag"] in ("pass", "warn")
    on_disk = json.loads((tmp_path / "out" / "report.json").read_text())
    assert on_disk == report


def test_run_spectrum_report(tmp_path):
    cfg = load_config(_write(tmp_path, SPECTRUM_BODY))
    report = run(cfg, str(tmp_path / "out"))
    assert report["exact"] is True
    zero = [c for c in report["classes"] if abs(c["energy"]) < 1e-30]
    assert len(zero) == 1
    assert [0, 3, 0] in zero[0]["members"]
    assert "Index convention" in report["index_convention_note"]
    levels_csv = (tmp_path / "out" / "levels.csv").read_text().splitlines()
    assert levels_csv[0] == "flat_index,m,n,i,energy"
    assert len(levels_csv) == 1 + 2 * 3 * 5


def test_run_dephasing_tables(tmp_path):
    cfg = load_config(_write(tmp_path, DEPHASING_BODY))
    report = run(cfg, str(tmp_path / "out"))
    traj = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()
    assert traj[0] == "t,abs_p0,arg_p0,gamma_p0,dphi_p0"
    assert len(traj) == 1 + 6
    # the tracked pair is protected (both energies are 0 at ratio 3)
    first = [float(x) for x in traj[1].split(",")]
    last = [float(x) for x in traj[-1].split(",")]
    assert first[1] == pytest.approx(0.5)
    assert last[1] == pytest.approx(0.5, abs=1e-12)
    obs = (tmp_path / "out" / "observables.csv").read_text().splitlines()
    assert obs[0] == ("t,purity,qubit_coherence_re,qubit_coherence_im,"
                      "fidelity_to_initial")
    assert report["pairs"][0]["delta_e"] == pytest.approx(0.0, abs=1e-15)


def test_run_validate_report(tmp_path):
    cfg = load_config(_write(tmp_path, "scenario = validate\n"))
    report = run(cfg, str(tmp_path / "out"))
    assert report["all_passed"] is True
    assert report["check_count"] == report["passed_count"]


# --------------------------------------------------------------- subprocess

def test_cli_spectrum_subprocess(tmp_path):
    cfg = _write(tmp_path, SPECTRUM_BODY)
    res = _cli(["spectrum", "--config", cfg, "--out", str(tmp_path / "o")])
    assert res.returncode == 0, res.stderr
    assert "degeneracy classes" in res.stdout
    assert (tmp_path / "o" / "report.json").is_file()
    assert (tmp_path / "o" / "config_echo.cfg").is_file()


def test_cli_config_error_exit_1(tmp_path):
    cfg = _write(tmp_path, "scenario = spectrum\n[effective]\nomega_a = 1\n")
    res = _cli(["spectrum", "--config", cfg, "--out", str(tmp_path / "o")])
    assert res.returncode == 1
    assert "config error" in res.stderr


def test_cli_scenario_mismatch_exit_1(tmp_path):
    cfg = _write(tmp_path, SPECTRUM_BODY)
    res = _cli(["device", "--config", cfg, "--out", str(tmp_path / "o")])
    assert res.returncode == 1


def test_cli_capacity_exit_2(tmp_path):
    body = DEPHASING_BODY.replace("n_max_a = 1", "n_max_a = 80").replace(
        "n_max_b = 3", "n_max_b = 80")
    cfg = _write(tmp_path, body)
    res = _cli(["dephasing", "--config", cfg, "--out", str(tmp_path / "o")])
    assert res.returncode == 2
    assert "numeric error" in res.stderr


def test_cli_validation_failure_exit_3(tmp_path):
    cfg = _write(tmp_path, "scenario = validate\n")
    res = _cli(["validate", "--config", cfg, "--out", str(tmp_path / "o"),
                "--tol", "1e-12"])
    assert res.returncode == 3
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["all_passed"] is False
