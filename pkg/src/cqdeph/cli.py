"""Config-driven command line front end.

Four subcommands, one per scenario:

    cqdeph device    --config run.cfg --out results/
    cqdeph spectrum  --config run.cfg --out results/
    cqdeph dephasing --config run.cfg --out results/
    cqdeph validate  --config run.cfg --out results/

The config is line-oriented ``key = value`` text with ``[section]`` headers.
Every dimensional value carries an explicit unit suffix (``omega_a = 6
GHz_cyc``, ``tau = 160 ns``); a bare number on a dimensional key is an
error, as is any unknown key or section.  All quantities are normalized to
SI at load time: angular frequencies in rad/s, times in seconds, energies in
Joules (entered as frequencies, i.e. E/hbar, or directly in J).

Every run writes ``report.json`` plus ``config_echo.cfg`` into the output
directory; the echo is normalized to base units and loads back into the
identical RunConfig.  Scenario payloads: ``device`` adds nothing else,
``spectrum`` adds ``levels.csv``, ``dephasing`` adds ``trajectory.csv`` and
``observables.csv``.  CSV cells are printed with 17 significant digits so
repeated runs are byte-identical.

Exit codes: 0 success, 1 config or argument error, 2 capacity or numeric
error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__, validation
from .bath import (
    DEFAULT_RTOL,
    BathState,
    OhmicSpectralDensity,
    TabulatedSpectralDensity,
)
from .device import (
    HBAR_SI,
    K_B_SI,
    PHI_0_SI,
    DeviceParams,
    EffectiveParams,
    cross_kerr,
    cross_phase,
    dressed_mode_frequency,
    effective_couplings,
    regime_report,
)
from .dynamics import evolve_reduced, observables
from .errors import (
    CapacityError,
    ConfigError,
    CqdephError,
    InvalidArgumentError,
    NumericsError,
    ValidationFailure,
)
from .hilbert import FockCutoff, StateVector, TensorBasisLabel, coherent_state
from .spectrum import TRUNCATION_NOTE, dfs_find, levels

__all__ = ["RunConfig", "load_config", "render_config", "run", "main"]

SCENARIOS = ("device", "spectrum", "dephasing", "validate")

_TWO_PI = 2.0 * math.pi

# unit suffix tables; every dimensional key names one of these kinds
_FREQ = {
    "Hz_rad": 1.0, "kHz_rad": 1e3, "MHz_rad": 1e6, "GHz_rad": 1e9,
    "Hz_cyc": _TWO_PI, "kHz_cyc": _TWO_PI * 1e3,
    "MHz_cyc": _TWO_PI * 1e6, "GHz_cyc": _TWO_PI * 1e9,
}
_ENERGY = {"J": 1.0}
_ENERGY.update({k: v * HBAR_SI for k, v in _FREQ.items()})
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12}
_LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_CAP = {"F": 1.0, "pF": 1e-12, "fF": 1e-15}
_CAP_PER_LEN = {"F_per_m": 1.0, "pF_per_m": 1e-12, "fF_per_m": 1e-15}
_IND_PER_LEN = {"H_per_m": 1.0, "uH_per_m": 1e-6, "nH_per_m": 1e-9}
_VOLT = {"V": 1.0, "mV": 1e-3, "uV": 1e-6}
_AREA = {"m2": 1.0, "mm2": 1e-6, "um2": 1e-12}
_FLUX = {"Wb": 1.0, "Phi0": PHI_0_SI}
_TEMPERATURE = {"K": 1.0, "mK": 1e-3, "uK": 1e-6}

_KINDS = {
    "frequency": _FREQ, "energy": _ENERGY, "time": _TIME, "length": _LENGTH,
    "capacitance": _CAP, "capacitance_per_length": _CAP_PER_LEN,
    "inductance_per_length": _IND_PER_LEN, "voltage": _VOLT, "area": _AREA,
    "flux": _FLUX, "temperature": _TEMPERATURE,
}

# (kind, required) per key; kind None means dimensionless
_DEVICE_KEYS = {
    "E_C": ("energy", True),
    "E_J_max": ("energy", True),
    "omega_a": ("frequency", True),
    "omega_b": ("frequency", True),
    "L_a": ("length", True),
    "L_b": ("length", True),
    "c_cap": ("capacitance_per_length", True),
    "l_ind": ("inductance_per_length", True),
    "C_g": ("capacitance", True),
    "C_a": ("capacitance", True),
    "V_g_dc": ("voltage", True),
    "S_loop": ("area", True),
    "d_dist": ("length", True),
    "Phi_e": ("flux", False),
    "tau": ("time", False),
}

_EFFECTIVE_KEYS = {
    "g_a": "frequency", "phi_b": None, "phi_e": None, "n_g_dc": None,
    "omega_a": "frequency", "omega_a_prime": "frequency", "chi": "frequency",
}

_SECTIONS_BY_SCENARIO = {
    "device": {"device", "effective"},
    "spectrum": {"device", "effective", "cutoff", "spectrum"},
    "dephasing": {"device", "effective", "cutoff", "bath", "grid", "state",
                  "pairs"},
    "validate": set(),
}


@dataclass(frozen=True)
class RunConfig:
    """A fully normalized run description; everything SI, everything frozen."""

    scenario: str
    device: DeviceParams | None = None
    tau: float | None = None
    eff_overrides: tuple[tuple[str, float], ...] = ()
    cutoff: FockCutoff | None = None
    bath_family: str | None = None
    bath_coupling: float | None = None
    bath_exponent: float = 1.0
    bath_omega_c: float | None = None
    bath_table: str | None = None
    beta: float = math.inf
    grid_start: float = 0.0
    grid_stop: float | None = None
    grid_count: int | None = None
    grid_spacing: str = "linear"
    state_kind: str | None = None
    state_labels: tuple[tuple[int, int, int, float, float], ...] = ()
    state_mode: str | None = None
    state_alpha: complex = 0j
    state_qubit: int = 0
    pairs: tuple[tuple[tuple[int, int, int], tuple[int, int, int]], ...] = ()
    ratio: Fraction | None = None
    cluster_tol: float | None = None


# ------------------------------------------------------------------ parsing

def _tokenize(path: str) -> tuple[dict, dict]:
    """Split the file into {(section, key): (value, line)} plus header lines."""
    try:
        with open(path, encoding="utf-8") as f:
            raw_lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    headers: dict[str, int] = {}
    section = ""
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError("empty section header", lineno)
            if section in headers:
                raise ConfigError(f"duplicate section [{section}]", lineno)
            headers[section] = lineno
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if (section, key) in entries:
            where = "top level" if not section else f"[{section}]"
            raise ConfigError(f"duplicate key {key!r} in {where}", lineno)
        entries[(section, key)] = (value, lineno)
    return entries, headers


def _number(raw: str, key: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw!r}", line) from None


def _integer(raw: str, key: str, line: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {raw!r}", line) from None


def _dimensional(raw: str, kind: str, key: str, line: int) -> float:
    parts = raw.split()
    if len(parts) == 1:
        raise ConfigError(
            f"{key}: unit suffix missing on a dimensional quantity "
            f"(expected one of {', '.join(sorted(_KINDS[kind]))})", line)
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected '<number> <suffix>', got {raw!r}", line)
    num, suffix = parts
    table = _KINDS[kind]
    if suffix not in table:
        raise ConfigError(
            f"{key}: unknown {kind} suffix {suffix!r} "
            f"(expected one of {', '.join(sorted(table))})", line)
    return _number(num, key, line) * table[suffix]


def _dimensionless(raw: str, key: str, line: int) -> float:
    if len(raw.split()) != 1:
        raise ConfigError(f"{key}: dimensionless quantity takes no suffix", line)
    return _number(raw, key, line)


def _word(raw: str, key: str, line: int, allowed: tuple[str, ...]) -> str:
    if raw not in allowed:
        raise ConfigError(
            f"{key}: expected one of {', '.join(allowed)}, got {raw!r}", line)
    return raw


def _label_triplet(raw: str, key: str, line: int) -> tuple[int, int, int]:
    parts = raw.split()
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 'm n i', got {raw!r}", line)
    m, n, i = (_integer(p, key, line) for p in parts)
    if m < 0 or n < 0 or i not in (0, 1):
        raise ConfigError(f"{key}: label out of range: {raw!r}", line)
    return m, n, i


def _take(entries: dict, section: str, key: str):
    return entries.pop((section, key), (None, None))


def _reject_leftovers(entries: dict, section: str, known: str) -> None:
    for (sec, key), (_, line) in entries.items():
        if sec == section:
            raise ConfigError(
                f"unknown key {key!r} in [{section}] (known: {known})", line)


def _indexed_lines(entries: dict, section: str, prefix: str):
    """Collect prefix_0, prefix_1, ... keys sorted by their integer index."""
    found = []
    for (sec, key), (value, line) in list(entries.items()):
        if sec != section:
            continue
        if key.startswith(prefix + "_") and key[len(prefix) + 1:].isdigit():
            found.append((int(key[len(prefix) + 1:]), key, value, line))
            del entries[(sec, key)]
    found.sort()
    return found


def _parse_device(entries: dict, headers: dict):
    if "device" not in headers:
        return None, None
    values = {}
    tau = None
    for key, (kind, required) in _DEVICE_KEYS.items():
        raw, line = _take(entries, "device", key)
        if raw is None:
            if required:
                raise ConfigError(
                    f"[device] is missing required key {key!r}",
                    headers["device"])
            continue
        val = _dimensional(raw, kind, key, line)
        if key == "tau":
            tau = val
        else:
            values[key] = val
    _reject_leftovers(entries, "device", ", ".join(sorted(_DEVICE_KEYS)))
    return DeviceParams(**values), tau


def _parse_effective(entries: dict, headers: dict):
    if "effective" not in headers:
        return ()
    overrides = []
    for key, kind in _EFFECTIVE_KEYS.items():
        raw, line = _take(entries, "effective", key)
        if raw is None:
            continue
        if kind is None:
            overrides.append((key, _dimensionless(raw, key, line)))
        else:
            overrides.append((key, _dimensional(raw, kind, key, line)))
    _reject_leftovers(entries, "effective", ", ".join(sorted(_EFFECTIVE_KEYS)))
    return tuple(sorted(overrides))


def _parse_cutoff(entries: dict, headers: dict):
    if "cutoff" not in headers:
        return None
    vals = {}
    for key in ("n_max_a", "n_max_b"):
        raw, line = _take(entries, "cutoff", key)
        if raw is None:
            raise ConfigError(f"[cutoff] is missing required key {key!r}",
                              headers["cutoff"])
        vals[key] = _integer(raw, key, line)
    _reject_leftovers(entries, "cutoff", "n_max_a, n_max_b")
    return FockCutoff(**vals)


def _parse_bath(entries: dict, headers: dict, config_dir: str):
    if "bath" not in headers:
        return {}
    out = {}
    raw, line = _take(entries, "bath", "family")
    if raw is None:
        raise ConfigError("[bath] is missing required key 'family'",
                          headers["bath"])
    out["bath_family"] = _word(raw, "family", line, ("ohmic", "tabulated"))

    raw, line = _take(entries, "bath", "coupling")
    if raw is not None:
        out["bath_coupling"] = _dimensionless(raw, "coupling", line)
    raw, line = _take(entries, "bath", "exponent")
    if raw is not None:
        out["bath_exponent"] = _dimensionless(raw, "exponent", line)
    raw, line = _take(entries, "bath", "omega_c")
    if raw is not None:
        out["bath_omega_c"] = _dimensional(raw, "frequency", "omega_c", line)
    raw, line = _take(entries, "bath", "table")
    if raw is not None:
        path = raw if os.path.isabs(raw) else os.path.join(config_dir, raw)
        path = os.path.abspath(path)
        if not os.path.isfile(path):
            raise ConfigError(f"table: no such file: {path}", line)
        out["bath_table"] = path

    raw_beta, line_beta = _take(entries, "bath", "beta")
    raw_temp, line_temp = _take(entries, "bath", "temperature")
    if raw_beta is not None and raw_temp is not None:
        raise ConfigError("give either 'beta' or 'temperature', not both",
                          line_temp)
    if raw_beta is not None:
        if raw_beta == "inf":
            out["beta"] = math.inf
        else:
            out["beta"] = _dimensional(raw_beta, "time", "beta", line_beta)
    elif raw_temp is not None:
        t_kelvin = _dimensional(raw_temp, "temperature", "temperature",
                                line_temp)
        if t_kelvin < 0:
            raise ConfigError("temperature must be >= 0", line_temp)
        # beta multiplies angular frequency, so it is hbar/(k_B T), seconds
        out["beta"] = math.inf if t_kelvin == 0 else HBAR_SI / (K_B_SI * t_kelvin)
    _reject_leftovers(entries, "bath",
                      "family, coupling, exponent, omega_c, beta, "
                      "temperature, table")

    if out["bath_family"] == "ohmic":
        for key in ("bath_coupling", "bath_omega_c"):
            if key not in out:
                raise ConfigError(
                    f"ohmic bath requires key {key.removeprefix('bath_')!r}",
                    headers["bath"])
    elif "bath_table" not in out:
        raise ConfigError("tabulated bath requires key 'table'",
                          headers["bath"])
    return out


def _parse_grid(entries: dict, headers: dict):
    if "grid" not in headers:
        return {}
    out = {}
    raw, line = _take(entries, "grid", "t_start")
    if raw is not None:
        out["grid_start"] = _dimensional(raw, "time", "t_start", line)
    for key, dest in (("t_stop", "grid_stop"), ("t_count", "grid_count")):
        raw, line = _take(entries, "grid", key)
        if raw is None:
            raise ConfigError(f"[grid] is missing required key {key!r}",
                              headers["grid"])
        out[dest] = (_dimensional(raw, "time", key, line) if key == "t_stop"
                     else _integer(raw, key, line))
    raw, line = _take(entries, "grid", "spacing")
    if raw is not None:
        out["grid_spacing"] = _word(raw, "spacing", line, ("linear", "log"))
    _reject_leftovers(entries, "grid", "t_start, t_stop, t_count, spacing")
    if out["grid_count"] < 1:
        raise ConfigError("t_count must be >= 1", headers["grid"])
    return out


def _parse_state(entries: dict, headers: dict):
    if "state" not in headers:
        return {}
    out = {}
    raw, line = _take(entries, "state", "kind")
    if raw is None:
        raise ConfigError("[state] is missing required key 'kind'",
                          headers["state"])
    kind = _word(raw, "kind", line, ("labels", "coherent"))
    out["state_kind"] = kind

    if kind == "labels":
        amps = []
        for _, key, value, line in _indexed_lines(entries, "state", "amp"):
            if ":" not in value:
                raise ConfigError(
                    f"{key}: expected 'm n i : re im', got {value!r}", line)
            left, right = value.split(":", 1)
            m, n, i = _label_triplet(left.strip(), key, line)
            parts = right.split()
            if len(parts) != 2:
                raise ConfigError(
                    f"{key}: expected two amplitude components, got {value!r}",
                    line)
            re_part = _number(parts[0], key, line)
            im_part = _number(parts[1], key, line)
            amps.append((m, n, i, re_part, im_part))
        if not amps:
            raise ConfigError(
                "state kind 'labels' needs at least one amp_<k> line",
                headers["state"])
        out["state_labels"] = tuple(amps)
    else:
        raw, line = _take(entries, "state", "mode")
        if raw is None:
            raise ConfigError("coherent state requires key 'mode'",
                              headers["state"])
        out["state_mode"] = _word(raw, "mode", line, ("A", "B"))
        re_part = im_part = 0.0
        raw, line = _take(entries, "state", "alpha_re")
        if raw is not None:
            re_part = _dimensionless(raw, "alpha_re", line)
        raw, line = _take(entries, "state", "alpha_im")
        if raw is not None:
            im_part = _dimensionless(raw, "alpha_im", line)
        out["state_alpha"] = complex(re_part, im_part)
        raw, line = _take(entries, "state", "qubit_level")
        if raw is not None:
            level = _integer(raw, "qubit_level", line)
            if level not in (0, 1):
                raise ConfigError(f"qubit_level must be 0 or 1, got {level}",
                                  line)
            out["state_qubit"] = level
    _reject_leftovers(entries, "state",
                      "kind, amp_<k>, mode, alpha_re, alpha_im, qubit_level")
    return out


def _parse_pairs(entries: dict, headers: dict):
    if "pairs" not in headers:
        return ()
    pairs = []
    for _, key, value, line in _indexed_lines(entries, "pairs", "pair"):
        if ":" not in value:
            raise ConfigError(
                f"{key}: expected 'm n i : m n i', got {value!r}", line)
        left, right = value.split(":", 1)
        pairs.append((_label_triplet(left.strip(), key, line),
                      _label_triplet(right.strip(), key, line)))
    _reject_leftovers(entries, "pairs", "pair_<k>")
    if not pairs:
        raise ConfigError("[pairs] needs at least one pair_<k> line",
                          headers["pairs"])
    return tuple(pairs)


def _parse_spectrum_opts(entries: dict, headers: dict):
    if "spectrum" not in headers:
        return {}
    out = {}
    raw, line = _take(entries, "spectrum", "ratio")
    if raw is not None:
        try:
            out["ratio"] = Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(
                f"ratio: not a rational number: {raw!r}", line) from None
    raw, line = _take(entries, "spectrum", "tol")
    if raw is not None:
        tol = _dimensionless(raw, "tol", line)
        if tol <= 0:
            raise ConfigError(f"tol must be > 0, got {tol}", line)
        out["cluster_tol"] = tol
    _reject_leftovers(entries, "spectrum", "ratio, tol")
    return out


def load_config(path: str) -> RunConfig:
    """Parse and normalize a config file; every problem is a ConfigError."""
    entries, headers = _tokenize(path)

    raw, line = _take(entries, "", "scenario")
    if raw is None:
        raise ConfigError("missing required key 'scenario'")
    scenario = _word(raw, "scenario", line, SCENARIOS)
    _reject_leftovers(entries, "", "scenario")

    allowed = _SECTIONS_BY_SCENARIO[scenario]
    for section, line in headers.items():
        if section not in allowed:
            raise ConfigError(
                f"section [{section}] is not used by scenario {scenario!r}"
                + (f" (allowed: {', '.join(sorted(allowed))})" if allowed
                   else " (it takes no sections)"), line)

    device, tau = _parse_device(entries, headers)
    fields: dict = {
        "scenario": scenario,
        "device": device,
        "tau": tau,
        "eff_overrides": _parse_effective(entries, headers),
        "cutoff": _parse_cutoff(entries, headers),
    }
    fields.update(_parse_bath(entries, headers, os.path.dirname(os.path.abspath(path))))
    fields.update(_parse_grid(entries, headers))
    fields.update(_parse_state(entries, headers))
    fields["pairs"] = _parse_pairs(entries, headers)
    fields.update(_parse_spectrum_opts(entries, headers))

    for (sec, key), (_, line) in entries.items():
        raise ConfigError(f"unknown key {key!r} in section [{sec}]", line)

    cfg = RunConfig(**fields)
    _require_scenario_inputs(cfg)
    return cfg


def _require_scenario_inputs(cfg: RunConfig) -> None:
    need = {
        "device": ("device",),
        "spectrum": ("cutoff",),
        "dephasing": ("cutoff", "bath_family", "grid_count", "state_kind"),
        "validate": (),
    }[cfg.scenario]
    missing_sections = {
        "device": "[device]", "cutoff": "[cutoff]", "bath_family": "[bath]",
        "grid_count": "[grid]", "state_kind": "[state]",
    }
    for attr in need:
        if getattr(cfg, attr) is None:
            raise ConfigError(
                f"scenario {cfg.scenario!r} requires section "
                f"{missing_sections[attr]}")
    if cfg.scenario in ("spectrum", "dephasing") and cfg.device is None:
        over = dict(cfg.eff_overrides)
        missing = [k for k in ("omega_a", "omega_a_prime", "chi")
                   if k not in over]
        if missing:
            raise ConfigError(
                "[effective] without [device] must supply "
                + ", ".join(missing))
    if cfg.grid_count is not None:
        if cfg.grid_spacing == "log" and cfg.grid_start <= 0:
            raise ConfigError("log spacing requires t_start > 0")
        if cfg.grid_stop is not None and cfg.grid_count > 1 \
                and cfg.grid_stop <= cfg.grid_start:
            raise ConfigError("t_stop must exceed t_start")


# --------------------------------------------------------------- rendering

def _g17(x: float) -> str:
    return f"{x:.17g}"


def render_config(cfg: RunConfig) -> str:
    """Echo a RunConfig as normalized config text; load_config inverts it."""
    lines = [f"scenario = {cfg.scenario}", ""]
    if cfg.device is not None:
        p = cfg.device
        lines.append("[device]")
        lines.append(f"E_C = {_g17(p.E_C)} J")
        lines.append(f"E_J_max = {_g17(p.E_J_max)} J")
        lines.append(f"omega_a = {_g17(p.omega_a)} Hz_rad")
        lines.append(f"omega_b = {_g17(p.omega_b)} Hz_rad")
        lines.append(f"L_a = {_g17(p.L_a)} m")
        lines.append(f"L_b = {_g17(p.L_b)} m")
        lines.append(f"c_cap = {_g17(p.c_cap)} F_per_m")
        lines.append(f"l_ind = {_g17(p.l_ind)} H_per_m")
        lines.append(f"C_g = {_g17(p.C_g)} F")
        lines.append(f"C_a = {_g17(p.C_a)} F")
        lines.append(f"V_g_dc = {_g17(p.V_g_dc)} V")
        lines.append(f"S_loop = {_g17(p.S_loop)} m2")
        lines.append(f"d_dist = {_g17(p.d_dist)} m")
        lines.append(f"Phi_e = {_g17(p.Phi_e)} Wb")
        if cfg.tau is not None:
            lines.append(f"tau = {_g17(cfg.tau)} s")
        lines.append("")
    if cfg.eff_overrides:
        lines.append("[effective]")
        for key, value in cfg.eff_overrides:
            if _EFFECTIVE_KEYS[key] is None:
                lines.append(f"{key} = {_g17(value)}")
            else:
                lines.append(f"{key} = {_g17(value)} Hz_rad")
        lines.append("")
    if cfg.cutoff is not None:
        lines.append("[cutoff]")
        lines.append(f"n_max_a = {cfg.cutoff.n_max_a}")
        lines.append(f"n_max_b = {cfg.cutoff.n_max_b}")
        lines.append("")
    if cfg.bath_family is not None:
        lines.append("[bath]")
        lines.append(f"family = {cfg.bath_family}")
        if cfg.bath_coupling is not None:
            lines.append(f"coupling = {_g17(cfg.bath_coupling)}")
        if cfg.bath_family == "ohmic":
            lines.append(f"exponent = {_g17(cfg.bath_exponent)}")
            lines.append(f"omega_c = {_g17(cfg.bath_omega_c)} Hz_rad")
        if cfg.bath_table is not None:
            lines.append(f"table = {cfg.bath_table}")
        if math.isinf(cfg.beta):
            lines.append("beta = inf")
        else:
            lines.append(f"beta = {_g17(cfg.beta)} s")
        lines.append("")
    if cfg.grid_count is not None:
        lines.append("[grid]")
        lines.append(f"t_start = {_g17(cfg.grid_start)} s")
        lines.append(f"t_stop = {_g17(cfg.grid_stop)} s")
        lines.append(f"t_count = {cfg.grid_count}")
        lines.append(f"spacing = {cfg.grid_spacing}")
        lines.append("")
    if cfg.state_kind is not None:
        lines.append("[state]")
        lines.append(f"kind = {cfg.state_kind}")
        if cfg.state_kind == "labels":
            for k, (m, n, i, re_part, im_part) in enumerate(cfg.state_labels):
                lines.append(
                    f"amp_{k} = {m} {n} {i} : {_g17(re_part)} {_g17(im_part)}")
        else:
            lines.append(f"mode = {cfg.state_mode}")
            lines.append(f"alpha_re = {_g17(cfg.state_alpha.real)}")
            lines.append(f"alpha_im = {_g17(cfg.state_alpha.imag)}")
            lines.append(f"qubit_level = {cfg.state_qubit}")
        lines.append("")
    if cfg.pairs:
        lines.append("[pairs]")
        for k, (hi, lo) in enumerate(cfg.pairs):
            lines.append(
                f"pair_{k} = {hi[0]} {hi[1]} {hi[2]} : {lo[0]} {lo[1]} {lo[2]}")
        lines.append("")
    if cfg.ratio is not None or cfg.cluster_tol is not None:
        lines.append("[spectrum]")
        if cfg.ratio is not None:
            lines.append(f"ratio = {cfg.ratio}")
        if cfg.cluster_tol is not None:
            lines.append(f"tol = {_g17(cfg.cluster_tol)}")
        lines.append("")
    return "\n".join(lines)


# --------------------------------------------------------------- execution

_EFF_FIELDS = ("g_a", "phi_b", "phi_e", "n_g_dc", "omega_a", "omega_a_prime",
               "chi")


def resolve_effective(cfg: RunConfig) -> EffectiveParams:
    """Device map plus overrides, or pure effective parameters.

    Overriding g_a, phi_b, or omega_a with a device present recomputes
    omega_a_prime and chi unless those are overridden too.
    """
    over = dict(cfg.eff_overrides)
    if cfg.device is not None:
        base = effective_couplings(cfg.device)
        vals = {name: getattr(base, name) for name in _EFF_FIELDS}
        vals.update(over)
        if {"g_a", "phi_b", "omega_a"} & over.keys():
            if "chi" not in over:
                vals["chi"] = cross_kerr(vals["g_a"], vals["phi_b"],
                                         cfg.device.E_J_max, vals["omega_a"],
                                         cfg.device.hbar)
            if "omega_a_prime" not in over:
                vals["omega_a_prime"] = dressed_mode_frequency(
                    vals["g_a"], vals["phi_b"], cfg.device.E_J_max,
                    vals["omega_a"], cfg.device.hbar)
        return EffectiveParams(**vals)
    vals = {"g_a": 0.0, "phi_b": 0.0, "phi_e": 0.0, "n_g_dc": 0.5}
    vals.update(over)
    return EffectiveParams(**vals)


def _time_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.grid_spacing == "log":
        return np.geomspace(cfg.grid_start, cfg.grid_stop, cfg.grid_count)
    return np.linspace(cfg.grid_start, cfg.grid_stop, cfg.grid_count)


def _bath_model(cfg: RunConfig):
    if cfg.bath_family == "ohmic":
        return OhmicSpectralDensity(coupling=cfg.bath_coupling,
                                    exponent=cfg.bath_exponent,
                                    omega_c=cfg.bath_omega_c)
    table = np.loadtxt(cfg.bath_table, ndmin=2)
    if table.shape[1] != 2:
        raise ConfigError(
            f"bath table {cfg.bath_table} must have two columns "
            "(omega rad/s, density rad/s)")
    return TabulatedSpectralDensity(table[:, 0], table[:, 1])


def _initial_state(cfg: RunConfig) -> StateVector:
    cut = cfg.cutoff
    if cfg.state_kind == "coherent":
        return coherent_state(cfg.state_mode, cfg.state_alpha, cut,
                              cfg.state_qubit)
    amp = np.zeros(cut.dim, dtype=complex)
    for m, n, i, re_part, im_part in cfg.state_labels:
        lab = TensorBasisLabel(m, n, i)
        amp[lab.flat_index(cut)] += complex(re_part, im_part)
    try:
        return StateVector.normalized(amp, cut)
    except InvalidArgumentError as exc:
        raise ConfigError(f"initial state is not normalizable: {exc}") from exc


def _json_float(x: float):
    return float(x) if math.isfinite(x) else None


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _write_csv(path: str, header: list[str], columns: list) -> None:
    rows = len(columns[0]) if columns else 0
    lines = [",".join(header)]
    for k in range(rows):
        cells = []
        for col in columns:
            v = col[k]
            cells.append(str(v) if isinstance(v, (int, np.integer))
                         else _g17(float(v)))
        lines.append(",".join(cells))
    _write_text(path, "\n".join(lines) + "\n")


def _run_device(cfg: RunConfig, out_dir: str) -> dict:
    eff = resolve_effective(cfg)
    rep = regime_report(cfg.device, eff)
    payload = {
        "effective": {name: getattr(eff, name) for name in _EFF_FIELDS},
        "regime": {
            "phi_b": rep.phi_b,
            "phi_b_flag": rep.phi_b_flag,
            "thresholds": rep.thresholds,
            "worst_flag": rep.worst_flag(),
            "rows": [
                {
                    "n_b": r.n_b,
                    "omega_q": r.omega_q,
                    "detuning": r.detuning,
                    "g_over_delta": _json_float(r.g_over_delta),
                    "rwa_ratio": _json_float(r.rwa_ratio),
                    "dispersive_flag": r.dispersive_flag,
                    "rwa_flag": r.rwa_flag,
                }
                for r in rep.rows
            ],
        },
    }
    if cfg.tau is not None:
        ph = cross_phase(eff.chi, cfg.tau)
        payload["cross_phase"] = {
            "chi_rad_per_s": eff.chi,
            "tau_s": cfg.tau,
            "radians": ph.radians,
            "cycles": ph.cycles,
        }
    return payload


def _run_spectrum(cfg: RunConfig, out_dir: str, tol) -> dict:
    eff = resolve_effective(cfg)
    cluster_tol = tol if tol is not None else cfg.cluster_tol
    res = dfs_find(eff, cfg.cutoff, cluster_tol, ratio=cfg.ratio)

    table = levels(eff, cfg.cutoff)
    _write_csv(
        os.path.join(out_dir, "levels.csv"),
        ["flat_index", "m", "n", "i", "energy"],
        [
            [lv.label.flat_index(cfg.cutoff) for lv in table],
            [lv.label.m for lv in table],
            [lv.label.n for lv in table],
            [lv.label.i for lv in table],
            [lv.energy for lv in table],
        ],
    )
    return {
        "ratio": _json_float(res.ratio),
        "exact": res.exact,
        "cluster_tolerance": res.tolerance,
        "class_count": len(res),
        "protected_class_count": len(res.multi_member()),
        "classes": [
            {
                "energy": c.energy,
                "size": len(c),
                "members": [[lab.m, lab.n, lab.i] for lab in c.members],
            }
            for c in res
        ],
        "index_convention_note": res.note,
        "truncation_note": TRUNCATION_NOTE,
        "tables": {"levels": "levels.csv"},
    }


def _run_dephasing(cfg: RunConfig, out_dir: str, tol) -> dict:
    eff = resolve_effective(cfg)
    # refuse before materializing a dim x dim density matrix
    if cfg.grid_count * cfg.cutoff.dim ** 2 > 50_000_000:
        raise CapacityError(
            f"trajectory would hold {cfg.grid_count} snapshots of a "
            f"{cfg.cutoff.dim}x{cfg.cutoff.dim} matrix; shrink the grid "
            "or cutoff")
    rho0 = _initial_state(cfg).density()
    model = _bath_model(cfg)
    state = BathState(beta=cfg.beta)
    grid = _time_grid(cfg)
    rtol = tol if tol is not None else DEFAULT_RTOL
    pairs = [
        (TensorBasisLabel(*hi), TensorBasisLabel(*lo))
        for hi, lo in cfg.pairs
    ] or None
    traj = evolve_reduced(rho0, eff, model, state, grid, rtol=rtol,
                          pairs=pairs)

    header = ["t"]
    columns: list = [traj.t_grid]
    legend = []
    for k, rec in enumerate(traj.pairs):
        name = f"p{k}"
        element = traj.snapshots[:, rec.row, rec.col]
        header += [f"abs_{name}", f"arg_{name}", f"gamma_{name}",
                   f"dphi_{name}"]
        columns += [np.abs(element), np.angle(element), rec.damping,
                    rec.phase]
        legend.append({
            "column": name,
            "row_label": [rec.label_row.m, rec.label_row.n, rec.label_row.i],
            "col_label": [rec.label_col.m, rec.label_col.n, rec.label_col.i],
            "delta_e": rec.delta_e,
            "square_diff": rec.square_diff,
        })
    _write_csv(os.path.join(out_dir, "trajectory.csv"), header, columns)

    coherence = observables(traj, "qubit_coherence")
    _write_csv(
        os.path.join(out_dir, "observables.csv"),
        ["t", "purity", "qubit_coherence_re", "qubit_coherence_im",
         "fidelity_to_initial"],
        [traj.t_grid, observables(traj, "purity"), coherence.real,
         coherence.imag, observables(traj, "fidelity_to_initial")],
    )
    return {
        "pairs": legend,
        "grid": {
            "t_start": cfg.grid_start,
            "t_stop": cfg.grid_stop,
            "count": cfg.grid_count,
            "spacing": cfg.grid_spacing,
        },
        "bath": {
            "family": cfg.bath_family,
            "coupling": cfg.bath_coupling,
            "exponent": (cfg.bath_exponent
                         if cfg.bath_family == "ohmic" else None),
            "omega_c": cfg.bath_omega_c,
            "table": cfg.bath_table,
            "beta": _json_float(cfg.beta),
            "zero_temperature": math.isinf(cfg.beta),
        },
        "quadrature_rtol": rtol,
        "tables": {"trajectory": "trajectory.csv",
                   "observables": "observables.csv"},
    }


def _run_validate(cfg: RunConfig, out_dir: str, tol) -> tuple[dict, list]:
    results = validation.run_all(tol_scale=tol if tol is not None else 1.0)
    payload = {
        "checks": [
            {
                "name": r.name,
                "residual": _json_float(r.residual),
                "tolerance": r.tolerance,
                "passed": r.passed,
                "detail": r.detail,
            }
            for r in results
        ],
        "passed_count": sum(r.passed for r in results),
        "check_count": len(results),
        "all_passed": all(r.passed for r in results),
    }
    return payload, results


def run(cfg: RunConfig, out_dir: str, tol: float | None = None) -> dict:
    """Execute one scenario, writing report.json and config_echo.cfg.

    Returns the report tree.  A failed validate scenario raises
    ValidationFailure after all files are written.
    """
    os.makedirs(out_dir, exist_ok=True)
    _write_text(os.path.join(out_dir, "config_echo.cfg"), render_config(cfg))

    if cfg.scenario == "device":
        payload = _run_device(cfg, out_dir)
    elif cfg.scenario == "spectrum":
        payload = _run_spectrum(cfg, out_dir, tol)
    elif cfg.scenario == "dephasing":
        payload = _run_dephasing(cfg, out_dir, tol)
    else:
        payload, _ = _run_validate(cfg, out_dir, tol)

    report = {
        "scenario": cfg.scenario,
        "version": __version__,
        "provenance": {"config_echo": "config_echo.cfg"},
    }
    report.update(payload)
    _write_text(
        os.path.join(out_dir, "report.json"),
        json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n",
    )
    return report


def _summary_line(report: dict) -> str:
    scenario = report["scenario"]
    if scenario == "device":
        parts = [f"regime worst flag: {report['regime']['worst_flag']}"]
        if "cross_phase" in report:
            parts.append(f"cross-phase {report['cross_phase']['cycles']:.4f} cycles")
        return "; ".join(parts)
    if scenario == "spectrum":
        return (f"{report['class_count']} degeneracy classes, "
                f"{report['protected_class_count']} protected")
    if scenario == "dephasing":
        return (f"{len(report['pairs'])} tracked pairs over "
                f"{report['grid']['count']} grid points")
    return f"{report['passed_count']}/{report['check_count']} checks passed"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cqdeph",
        description="charge-qubit cross-Kerr dephasing toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("device", "effective couplings and regime diagnostics"),
        ("spectrum", "level table and degeneracy classes"),
        ("dephasing", "reduced-density-matrix trajectories"),
        ("validate", "run the cross-module invariant suite"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", required=True, help="path to the run config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance override: quadrature rtol (dephasing), "
                            "clustering tol (spectrum), tolerance scale "
                            "(validate)")
        p.add_argument("--workers", type=int, default=1,
                       help="reserved; evaluation is single-threaded at the "
                            "problem sizes this package supports")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if cfg.scenario != args.command:
            raise ConfigError(
                f"config declares scenario {cfg.scenario!r} but subcommand "
                f"{args.command!r} was invoked")
        report = run(cfg, args.out, tol=args.tol)
        print(f"{args.command}: {_summary_line(report)}")
        print(f"report: {os.path.join(args.out, 'report.json')}")
        if cfg.scenario == "validate" and not report["all_passed"]:
            bad = [c["name"] for c in report["checks"] if not c["passed"]]
            print(f"cqdeph: validation failed: {', '.join(bad)}",
                  file=sys.stderr)
            return 3
        return 0
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"cqdeph: config error: {exc}", file=sys.stderr)
        return 1
    except (CapacityError, NumericsError) as exc:
        print(f"cqdeph: numeric error: {exc}", file=sys.stderr)
        return 2
    except ValidationFailure as exc:
        print(f"cqdeph: validation failure: {exc}", file=sys.stderr)
        return 3
    except CqdephError as exc:  # pragma: no cover - safety net
        print(f"cqdeph: error: {exc}", file=sys.stderr)
        return 2
