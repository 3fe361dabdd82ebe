"""Scenario library, flat-text run configs, CSV emission and comparisons.

Config files are UTF-8 ``key = value`` lines; ``#`` starts a comment.  Every
physical key is optional and defaults to the red-detuned pump reproduction
set (the built-in "fig2" scenario).  Unknown keys are rejected.  CSV output
uses 17-significant-digit scientific notation so doubles round-trip exactly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import ObservableSeries, analytic_observables, jc_exact_pe
from .model import (
    CoherentCavity,
    FockCavity,
    InitialState,
    Scenario,
    SystemParams,
    TimeGrid,
    TruncationSpec,
    validate_scenario,
)
from .oracle import observables_numeric, propagate

OBS_ORDER = ("pe", "photon_n", "photon_n2", "phonon_n", "mandel_q")

MODES = ("analytic", "numeric", "compare")

#: default per-observable pass thresholds for compare mode (max-abs error)
DEFAULT_THRESHOLDS = {
    "pe": 0.05,
    "photon_n": 0.05,
    "photon_n2": 0.5,
    "phonon_n": 0.05,
    "mandel_q": 0.25,
}

_FMT = "%.16e"


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


# ---------------------------------------------------------------------------
# built-in scenarios

_BASE_PARAMS = dict(omega_m=0.016, omega_a=0.95, omega_L=0.5,
                    g_om=0.00032, lambda_jc=0.0125, pump_amp=0.01)


def _scenario(label, *, alpha=2.0, gamma=1.0, t_end=500.0, n_cav=30, n_mech=25,
              **overrides) -> Scenario:
    params = SystemParams(**{**_BASE_PARAMS, **overrides})
    return Scenario(
        params=params,
        initial=InitialState(cavity=CoherentCavity(alpha), mech_gamma=gamma),
        grid=TimeGrid(t_end=t_end, n_samples=2000),
        cutoffs=TruncationSpec(n_cav=n_cav, n_mech=n_mech),
        label=label,
    )


def builtin_scenario(name: str) -> Scenario:
    """Named reproduction scenarios; see ``builtin_names()``."""
    if name == "fig1":
        # collapse/revival of P_e under the pump, vs the bare exchange
        return _scenario("fig1")
    if name == "fig2":
        # photon (first quarter) and phonon (full span) evolution
        return _scenario("fig2", t_end=2000.0)
    if name == "fig3":
        # excitation exchange: photon number up while P_e drops
        return _scenario("fig3")
    if name == "fig4a":
        # near-resonant red-detuned pump cooling the mirror, alpha = 2
        return _scenario("fig4a", omega_L=0.9, gamma=2.0, t_end=2000.0, n_mech=30)
    if name == "fig4b":
        # same, alpha = 3: deeper per-period phonon dips
        return _scenario("fig4b", omega_L=0.9, alpha=3.0, gamma=2.0, t_end=2000.0,
                         n_cav=43, n_mech=30)
    if name == "fig5":
        # Mandel Q alternating between sub- and super-Poissonian
        return _scenario("fig5")
    if name == "jc_limit":
        # pump and mechanics switched off: exact exchange oracle applies
        return _scenario("jc_limit", pump_amp=0.0, g_om=0.0, n_mech=19)
    raise KeyError(f"unknown scenario {name!r}; known: {', '.join(builtin_names())}")


def builtin_names() -> tuple[str, ...]:
    return ("fig1", "fig2", "fig3", "fig4a", "fig4b", "fig5", "jc_limit")


# ---------------------------------------------------------------------------
# run configuration

@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    mode: str = "analytic"
    emit_jc_reference: bool = False
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))


def _default_config_fields():
    return {
        "params.omega_c": 1.0,
        "params.omega_m": _BASE_PARAMS["omega_m"],
        "params.omega_a": _BASE_PARAMS["omega_a"],
        "params.omega_L": _BASE_PARAMS["omega_L"],
        "params.g_om": _BASE_PARAMS["g_om"],
        "params.lambda_jc": _BASE_PARAMS["lambda_jc"],
        "params.pump_amp": _BASE_PARAMS["pump_amp"],
        "initial.cavity": "coherent",
        "initial.alpha": 2.0 + 0.0j,
        "initial.fock_n": 0,
        "initial.atom": "excited",
        "initial.gamma": 1.0 + 0.0j,
        "grid.t_end": 2000.0,
        "grid.n_samples": 2000,
        "grid.dt": None,
        "cutoffs.n_cav": 30,
        "cutoffs.n_mech": 25,
        "mode": "analytic",
        "label": "run",
        "emit_jc_reference": False,
        "compare.tol.pe": DEFAULT_THRESHOLDS["pe"],
        "compare.tol.photon_n": DEFAULT_THRESHOLDS["photon_n"],
        "compare.tol.photon_n2": DEFAULT_THRESHOLDS["photon_n2"],
        "compare.tol.phonon_n": DEFAULT_THRESHOLDS["phonon_n"],
        "compare.tol.mandel_q": DEFAULT_THRESHOLDS["mandel_q"],
    }


def _parse_value(key: str, raw: str, errors: list):
    try:
        if key in ("initial.alpha", "initial.gamma"):
            return complex(raw)
        if key in ("initial.fock_n", "grid.n_samples", "cutoffs.n_cav", "cutoffs.n_mech"):
            return int(raw)
        if key == "grid.dt":
            return float(raw)
        if key.startswith(("params.", "compare.tol.")) or key == "grid.t_end":
            return float(raw)
        if key == "emit_jc_reference":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if key == "mode":
            if raw not in MODES:
                raise ValueError(f"mode must be one of {MODES}, got {raw!r}")
            return raw
        if key == "initial.cavity":
            if raw not in ("coherent", "fock"):
                raise ValueError(f"initial.cavity must be coherent or fock, got {raw!r}")
            return raw
        if key == "initial.atom":
            low = raw.lower()
            if low in ("excited", "e"):
                return "excited"
            if low in ("ground", "g"):
                return "ground"
            raise ValueError(f"initial.atom must be excited or ground, got {raw!r}")
        return raw  # label
    except ValueError as exc:
        errors.append(f"{key}: {exc}")
        return None


def parse_config(text: str) -> RunConfig:
    """Parse flat ``key = value`` text into a RunConfig.

    Collects every problem (unknown key, bad value, violated invariant) into
    one ConfigError.
    """
    fields = _default_config_fields()
    errors: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            errors.append(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
            continue
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in fields:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        val = _parse_value(key, raw, errors)
        if val is not None:
            fields[key] = val
    if errors:
        raise ConfigError(errors)
    return build_config(fields)


def build_config(fields: dict) -> RunConfig:
    errors: list[str] = []
    if fields["params.omega_c"] != 1.0:
        errors.append("params.omega_c: the cavity frequency is the unit and must be 1.0")
    try:
        params = SystemParams(
            omega_m=fields["params.omega_m"], omega_a=fields["params.omega_a"],
            omega_L=fields["params.omega_L"], g_om=fields["params.g_om"],
            lambda_jc=fields["params.lambda_jc"], pump_amp=fields["params.pump_amp"],
        )
    except ValueError as exc:
        errors.append(str(exc))
        params = None
    if fields["initial.cavity"] == "coherent":
        cavity = CoherentCavity(fields["initial.alpha"])
    else:
        cavity = FockCavity(fields["initial.fock_n"])
    initial = InitialState(cavity=cavity,
                           atom="e" if fields["initial.atom"] == "excited" else "g",
                           mech_gamma=fields["initial.gamma"])
    grid = TimeGrid(t_end=fields["grid.t_end"], n_samples=fields["grid.n_samples"],
                    integrator_dt=fields["grid.dt"])
    cutoffs = TruncationSpec(n_cav=fields["cutoffs.n_cav"],
                             n_mech=fields["cutoffs.n_mech"])
    if params is not None:
        scenario = Scenario(params=params, initial=initial, grid=grid,
                            cutoffs=cutoffs, label=fields["label"])
        try:
            scenario = validate_scenario(scenario)
        except ValueError as exc:
            errors.append(str(exc))
    if errors:
        raise ConfigError(errors)
    thresholds = {kind: fields[f"compare.tol.{kind}"] for kind in OBS_ORDER}
    return RunConfig(scenario=scenario, mode=fields["mode"],
                     emit_jc_reference=fields["emit_jc_reference"],
                     thresholds=thresholds)


# ---------------------------------------------------------------------------
# comparison

@dataclass(frozen=True)
class ComparisonEntry:
    observable: str
    max_abs: float
    rms: float
    t_max_abs: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_abs <= self.threshold


@dataclass(frozen=True)
class ComparisonReport:
    entries: list[ComparisonEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def text(self) -> str:
        lines = ["observable        max_abs          rms              t(max)       threshold  status"]
        for e in self.entries:
            lines.append(
                f"{e.observable:<16} {e.max_abs:<16.8e} {e.rms:<16.8e} "
                f"{e.t_max_abs:<12.6g} {e.threshold:<10.3g} "
                f"{'PASS' if e.passed else 'FAIL'}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def compare_series(a: ObservableSeries, b: ObservableSeries,
                   threshold: float = math.inf) -> ComparisonEntry:
    """Max-abs and RMS error between two series on the identical grid."""
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise ValueError("series grids differ; comparisons never interpolate")
    diff = np.abs(a.values - b.values)
    k = int(np.argmax(diff))
    return ComparisonEntry(
        observable=a.kind,
        max_abs=float(diff[k]),
        rms=float(np.sqrt(np.mean(diff**2))),
        t_max_abs=float(a.times[k]),
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# CSV emission

def _write_lines(path: str, lines: list[str]):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_series_csv(path: str, series: ObservableSeries):
    lines = ["t,value"]
    lines += [f"{_FMT % t},{_FMT % v}" for t, v in zip(series.times, series.values)]
    _write_lines(path, lines)


def write_compare_csv(path: str, analytic: ObservableSeries, numeric: ObservableSeries):
    lines = ["t,analytic,numeric,abs_err"]
    lines += [
        f"{_FMT % t},{_FMT % a},{_FMT % b},{_FMT % abs(a - b)}"
        for t, a, b in zip(analytic.times, analytic.values, numeric.values)
    ]
    _write_lines(path, lines)


def read_series_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


# ---------------------------------------------------------------------------
# run driver

def run(config: RunConfig, out_prefix: str) -> dict:
    """Execute a config and write its CSV files (and report in compare mode).

    Everything is computed before anything is written, so failures leave no
    partial files.  Returns {"paths": [...], "report": ComparisonReport|None}.
    """
    scenario = config.scenario
    pending: list[tuple[str, str, tuple]] = []
    report = None
    if config.mode == "analytic":
        obs = analytic_observables(scenario)
        for kind in OBS_ORDER:
            pending.append((f"{out_prefix}{kind}.csv", "series", (obs[kind],)))
    elif config.mode == "numeric":
        obs = observables_numeric(propagate(scenario))
        for kind in OBS_ORDER:
            pending.append((f"{out_prefix}{kind}.csv", "series", (obs[kind],)))
    elif config.mode == "compare":
        obs_a = analytic_observables(scenario)
        obs_n = observables_numeric(propagate(scenario))
        entries = []
        for kind in OBS_ORDER:
            entries.append(compare_series(obs_a[kind], obs_n[kind],
                                          threshold=config.thresholds[kind]))
            pending.append((f"{out_prefix}{kind}.csv", "compare",
                            (obs_a[kind], obs_n[kind])))
        report = ComparisonReport(entries=entries)
    else:
        raise ConfigError([f"mode must be one of {MODES}, got {config.mode!r}"])
    if config.emit_jc_reference and config.mode in ("analytic", "compare"):
        ref = jc_exact_pe(scenario.params, scenario.initial.cavity, scenario.grid)
        pending.append((f"{out_prefix}pe_jc.csv", "series", (ref,)))

    paths = []
    for path, style, payload in pending:
        if style == "series":
            write_series_csv(path, *payload)
        else:
            write_compare_csv(path, *payload)
        paths.append(path)
    if report is not None:
        path = f"{out_prefix}report.txt"
        _write_lines(path, report.text().splitlines())
        paths.append(path)
    return {"paths": paths, "report": report}
