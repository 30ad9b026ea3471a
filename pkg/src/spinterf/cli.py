"""Scenario runner: ``spinterf --config scenario.json [--seed N] [--out DIR] [--quiet]``.

Exit codes: 0 success, 2 config error, 3 physics/domain error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import dynamics, metrology, quasiprob, sensors
from .errors import SpinSimError, UndefinedSensitivity
from .spin import CollectiveSpinState, load_state, make_css, make_dicke, moments, twin_fock

log = logging.getLogger("spinterf")

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_IO = 0, 2, 3, 4

SCENARIOS = (
    "fringe-scan",
    "sensitivity-scan",
    "clock",
    "accel",
    "gyro",
    "qnd-demo",
    "oat-scan",
    "wigner",
)
TOP_KEYS = {"scenario", "state", "sequence", "measurement", "scan", "seed", "output"}
# scenario -> (required extra block, allowed scan parameters, needs a state)
BLOCKS = {
    "fringe-scan": (None, {"phi"}, True),
    "sensitivity-scan": (None, {"phi", "sigma_det"}, True),
    "clock": ("clock", {"omega0", "T", "T_C", "tau", "n_atoms", "xi"}, False),
    "accel": ("accel", {"k_parallel", "T", "n_atoms", "xi"}, False),
    "gyro": ("gyro", {"atom_mass", "area_parallel", "n_atoms", "xi"}, False),
    "qnd-demo": ("qnd", set(), True),
    "oat-scan": (None, {"mu"}, True),
    "wigner": ("grid", set(), True),
}
SENSOR_TYPES = {
    "clock": sensors.ClockConfig,
    "accel": sensors.AccelerometerConfig,
    "gyro": sensors.GyroConfig,
}
STATE_FIELDS = {
    "css": {"n_atoms", "polar", "azimuth"},
    "dicke": {"n_atoms", "m"},
    "twin_fock": {"n_atoms"},
    "checkpoint": {"path"},
}
SCAN_FIELDS = {"parameter", "start", "stop", "points"}
MEASUREMENT_FIELDS = {"observable", "sigma_det", "shots", "seed"}
QND_FIELDS = {"sigma", "trials"}
GRID_FIELDS = {"kernel", "n_polar", "n_azimuth"}
SCAN_REQUIRED = {"fringe-scan", "sensitivity-scan", "oat-scan"}


@dataclass
class ScanSpec:
    parameter: str
    start: float
    stop: float
    points: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class ScenarioConfig:
    scenario: str
    state: Optional[dict] = None
    sequence: list = field(default_factory=list)
    measurement: Optional[dynamics.MeasurementModel] = None
    scan: Optional[ScanSpec] = None
    seed: int = 0
    output: Optional[str] = None
    block: Optional[dict] = None  # the scenario-specific section

    def to_dict(self) -> dict:
        out = {"scenario": self.scenario, "seed": self.seed}
        if self.state is not None:
            out["state"] = dict(self.state)
        if self.sequence:
            out["sequence"] = [dynamics.element_to_record(el) for el in self.sequence]
        if self.measurement is not None:
            m = self.measurement
            out["measurement"] = {
                "observable": m.observable,
                "sigma_det": m.sigma_det,
                "shots": m.shots,
                "seed": m.seed,
            }
        if self.scan is not None:
            s = self.scan
            out["scan"] = {"parameter": s.parameter, "start": s.start, "stop": s.stop, "points": s.points}
        if self.output is not None:
            out["output"] = self.output
        name = BLOCKS[self.scenario][0]
        if name is not None:
            out[name] = dict(self.block)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# -- validation ----------------------------------------------------------------


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_count(x, minimum=1) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x >= minimum


def _keys(where, rec, required, optional, diags) -> bool:
    if not isinstance(rec, dict):
        diags.append(f"{where}: expected an object")
        return False
    ok = True
    for k in sorted(set(required) - set(rec)):
        diags.append(f"{where}.{k}: missing")
        ok = False
    for k in sorted(set(rec) - set(required) - set(optional)):
        diags.append(f"{where}.{k}: unknown key")
        ok = False
    return ok


def _check_state(rec, diags):
    if not isinstance(rec, dict):
        diags.append("state: expected an object")
        return
    kind = rec.get("constructor")
    if kind not in STATE_FIELDS:
        diags.append(f"state.constructor: must be one of {sorted(STATE_FIELDS)}, got {kind!r}")
        return
    if not _keys("state", rec, STATE_FIELDS[kind] | {"constructor"}, set(), diags):
        return
    if "n_atoms" in rec and not _is_count(rec["n_atoms"]):
        diags.append(f"state.n_atoms: must be a positive integer, got {rec['n_atoms']!r}")
        return
    for k in ("polar", "azimuth", "m"):
        if k in rec and not _is_number(rec[k]):
            diags.append(f"state.{k}: must be a finite number")
            return
    try:
        build_state(rec)
    except SpinSimError as exc:
        diags.append(f"state: {exc}")
    except OSError as exc:
        diags.append(f"state.path: cannot read checkpoint ({exc})")


def validate_config(raw: str):
    """Parse and validate a scenario config.

    Returns ``(config, diagnostics)``; ``config`` is None whenever any
    diagnostic was produced. All problems found are reported together.
    """
    diags: list = []
    if not raw.strip():
        data = {}
    else:
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            return None, [f"line {exc.lineno} column {exc.colno}: {exc.msg}"]
    if not isinstance(data, dict):
        return None, ["config: top level must be an object"]

    scenario = data.get("scenario")
    if scenario is None:
        diags.append("scenario missing")
    elif scenario not in SCENARIOS:
        diags.append(f"scenario: must be one of {list(SCENARIOS)}, got {scenario!r}")
        scenario = None

    block_name, scan_params, needs_state = BLOCKS.get(scenario, (None, set(), False))
    allowed = TOP_KEYS | ({block_name} if block_name else set())
    for k in sorted(set(data) - allowed):
        diags.append(f"{k}: unknown key" + (f" for scenario {scenario}" if scenario else ""))

    cfg = ScenarioConfig(scenario=scenario or "")

    seed = data.get("seed", 0)
    if not (_is_count(seed, 0) and seed < 2**64):
        diags.append(f"seed: must be an unsigned 64-bit integer, got {seed!r}")
    else:
        cfg.seed = seed

    if "output" in data:
        if not isinstance(data["output"], str):
            diags.append("output: must be a path string")
        else:
            cfg.output = data["output"]

    if "state" in data:
        _check_state(data["state"], diags)
        cfg.state = data["state"]
    elif scenario and needs_state:
        diags.append("state: missing")

    seq = data.get("sequence", [])
    if not isinstance(seq, list):
        diags.append("sequence: expected a list")
    else:
        for i, rec in enumerate(seq):
            if not isinstance(rec, dict):
                diags.append(f"sequence[{i}]: expected an object")
                continue
            try:
                cfg.sequence.append(dynamics.element_from_record(rec))
            except (SpinSimError, TypeError) as exc:
                diags.append(f"sequence[{i}]: {exc}")
        try:
            dynamics.validate_sequence(cfg.sequence)
        except SpinSimError as exc:
            diags.append(f"sequence[{exc.index}]: {exc.cause}")

    if "measurement" in data:
        rec = data["measurement"]
        if _keys("measurement", rec, {"observable"}, MEASUREMENT_FIELDS, diags):
            try:
                for k in ("sigma_det",):
                    if k in rec and not _is_number(rec[k]):
                        raise TypeError(f"{k} must be a number")
                if "shots" in rec and not _is_count(rec["shots"]):
                    raise TypeError("shots must be a positive integer")
                if "seed" in rec and not (_is_count(rec["seed"], 0) and rec["seed"] < 2**64):
                    raise TypeError("seed must be an unsigned 64-bit integer")
                cfg.measurement = dynamics.MeasurementModel(
                    observable=rec["observable"],
                    sigma_det=rec.get("sigma_det", 0.0),
                    shots=rec.get("shots", 1),
                    seed=rec.get("seed", cfg.seed),
                )
            except (SpinSimError, TypeError) as exc:
                diags.append(f"measurement: {exc}")

    if "scan" in data:
        rec = data["scan"]
        if _keys("scan", rec, SCAN_FIELDS, set(), diags):
            bad = False
            if scenario and rec["parameter"] not in scan_params:
                diags.append(
                    f"scan.parameter: {rec['parameter']!r} is not a parameter of {scenario}"
                    f" (expected one of {sorted(scan_params)})"
                )
                bad = True
            for k in ("start", "stop"):
                if not _is_number(rec[k]):
                    diags.append(f"scan.{k}: must be a finite number")
                    bad = True
            if not _is_count(rec["points"], 2):
                diags.append(f"scan.points: must be an integer >= 2, got {rec['points']!r}")
                bad = True
            if not bad:
                cfg.scan = ScanSpec(rec["parameter"], rec["start"], rec["stop"], rec["points"])
    elif scenario in SCAN_REQUIRED:
        diags.append(f"scan: missing (required for {scenario})")

    if block_name:
        if block_name not in data:
            diags.append(f"{block_name}: missing (required for {scenario})")
        else:
            rec = data[block_name]
            cfg.block = rec
            _check_block(scenario, block_name, rec, diags)

    if diags:
        return None, diags
    return cfg, []


def _check_block(scenario, name, rec, diags):
    if scenario in SENSOR_TYPES:
        cls = SENSOR_TYPES[scenario]
        fields = set(cls.__dataclass_fields__) - {"hbar"}
        if not _keys(name, rec, fields, set(), diags):
            return
        for k, v in rec.items():
            if not _is_number(v):
                diags.append(f"{name}.{k}: must be a finite number, got {v!r}")
                return
        try:
            cls(**rec)
        except SpinSimError as exc:
            diags.append(f"{name}: {exc}")
    elif scenario == "qnd-demo":
        if not _keys(name, rec, QND_FIELDS, set(), diags):
            return
        if not (_is_number(rec["sigma"]) and rec["sigma"] > 0):
            diags.append(f"qnd.sigma: must be > 0, got {rec['sigma']!r}")
        if not _is_count(rec["trials"]):
            diags.append(f"qnd.trials: must be a positive integer, got {rec['trials']!r}")
    elif scenario == "wigner":
        if not _keys(name, rec, GRID_FIELDS, set(), diags):
            return
        if rec["kernel"] not in quasiprob.KERNELS:
            diags.append(f"grid.kernel: must be one of {list(quasiprob.KERNELS)}")
        for k in ("n_polar", "n_azimuth"):
            if not _is_count(rec[k], 8):
                diags.append(f"grid.{k}: must be an integer >= 8, got {rec[k]!r}")


# -- running -------------------------------------------------------------------


def build_state(spec: dict) -> CollectiveSpinState:
    kind = spec["constructor"]
    if kind == "css":
        return make_css(spec["n_atoms"], spec["polar"], spec["azimuth"])
    if kind == "dicke":
        return make_dicke(spec["n_atoms"], spec["m"])
    if kind == "twin_fock":
        return twin_fock(spec["n_atoms"])
    return load_state(spec["path"])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def write_table(path: Path, columns, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _substream_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def _prepared(cfg):
    state = build_state(cfg.state)
    state, outcomes = dynamics.apply_sequence(state, cfg.sequence, cfg.seed)
    return state, outcomes


def _readout(cfg):
    model = cfg.measurement or dynamics.MeasurementModel(seed=cfg.seed)
    sigma = math.hypot(model.sigma_det, dynamics.readout_noise(cfg.sequence))
    return model, sigma


def _run_fringe(cfg, out):
    state, _ = _prepared(cfg)
    model, sigma = _readout(cfg)
    rows, samples = [], []
    for i, phi in enumerate(cfg.scan.values()):
        mean, var = metrology.fringe(state, phi, model.observable, sigma)
        try:
            dphi = metrology.phase_sensitivity(state, phi, model.observable, sigma).delta_phi
        except UndefinedSensitivity:
            dphi = math.nan
        rows.append((phi, mean, math.sqrt(var), dphi))
        if cfg.measurement is not None:
            shot_model = dynamics.MeasurementModel(
                model.observable, sigma, model.shots, _substream_seed(model.seed, i)
            )
            draws = dynamics.sample_measurement(dynamics.mach_zehnder(state, phi), shot_model)
            samples.append((phi, model.shots, draws.mean(), draws.std(ddof=1) if draws.size > 1 else 0.0))
    paths = [write_table(out / "fringe-scan.csv", ["phi", "mean_signal", "std_signal", "delta_phi"], rows)]
    if samples:
        paths.append(
            write_table(out / "fringe-scan-samples.csv", ["phi", "shots", "sample_mean", "sample_std"], samples)
        )
    return paths


# Fock-like inputs at large N have their optimum at phi ~ 1/N or below
BEST_PHI_BOUNDS = (1e-7, math.pi - 1e-3)
REPORT_COLUMNS = ["delta_phi", "xi", "snl", "heisenberg", "gain_db_variance", "gain_db_amplitude", "qfi"]


def _run_sensitivity(cfg, out):
    state, _ = _prepared(cfg)
    model, sigma = _readout(cfg)
    rows = []
    for value in cfg.scan.values():
        if cfg.scan.parameter == "phi":
            phi = float(value)
            report = metrology.phase_sensitivity(state, phi, model.observable, sigma)
        else:
            noise = math.hypot(sigma, value)
            phi, report = metrology.best_operating_point(
                state, model.observable, noise, bounds=BEST_PHI_BOUNDS, grid=96, spacing="log"
            )
        rec = report.to_record()
        lead = [value] if cfg.scan.parameter == "phi" else [value, phi]
        rows.append(lead + [rec[c] for c in REPORT_COLUMNS])
    columns = ["phi"] if cfg.scan.parameter == "phi" else [cfg.scan.parameter, "phi"]
    return [write_table(out / "sensitivity-scan.csv", columns + REPORT_COLUMNS, rows)]


SENSOR_RESULT = {
    "clock": ("sigma_clock", sensors.clock_stability),
    "accel": ("delta_a", sensors.accel_sensitivity),
    "gyro": ("delta_omega", sensors.gyro_sensitivity),
}


def _run_sensor(cfg, out):
    cls = SENSOR_TYPES[cfg.scenario]
    name, fn = SENSOR_RESULT[cfg.scenario]
    base = dict(cfg.block)
    if cfg.scan is not None:
        values = cfg.scan.values()
        if cfg.scan.parameter == "n_atoms":
            values = np.round(values).astype(int)
        variants = [dict(base, **{cfg.scan.parameter: v.item()}) for v in values]
    else:
        variants = [base]
    columns = [k for k in cls.__dataclass_fields__ if k != "hbar"]
    rows = []
    for params in variants:
        sensor = cls(**params)
        rows.append([getattr(sensor, k) for k in columns] + [fn(sensor)])
    return [write_table(out / f"{cfg.scenario}.csv", columns + [name], rows)]


def _run_qnd(cfg, out):
    state, _ = _prepared(cfg)
    sigma, trials = cfg.block["sigma"], cfg.block["trials"]
    prior = moments(state).covariance[2, 2]
    rows, cond_vars, xis = [], [], []
    for t in range(trials):
        post, r = dynamics.qnd_measure(state, sigma, rng=dynamics.element_rng(cfg.seed, t))
        mo = moments(post)
        xi = metrology.wineland_xi(post)
        rows.append((t, r, mo.mean[2], mo.covariance[2, 2], xi))
        cond_vars.append(mo.covariance[2, 2])
        if xi is not None:
            xis.append(xi)
    cond_vars = np.array(cond_vars)
    summary = [(
        trials,
        sigma,
        prior,
        cond_vars.mean(),
        cond_vars.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0,
        prior * sigma**2 / (prior + sigma**2),
        np.mean(xis) if xis else None,
    )]
    return [
        write_table(out / "qnd-demo.csv", ["trial", "outcome", "mean_jz", "var_jz", "wineland_xi"], rows),
        write_table(
            out / "qnd-demo-summary.csv",
            ["trials", "sigma", "prior_var_jz", "mean_cond_var_jz", "stderr", "gaussian_prediction", "mean_wineland_xi"],
            summary,
        ),
    ]


def _run_oat(cfg, out):
    state, _ = _prepared(cfg)
    rows = []
    for mu in cfg.scan.values():
        oriented, _ = metrology.optimally_orient(dynamics.one_axis_twist(state, mu))
        xi = metrology.wineland_xi(oriented)
        if xi is None:
            raise UndefinedSensitivity("wineland_xi: undefined after orientation")
        report = metrology.phase_sensitivity(metrology.to_interferometer_input(oriented), math.pi / 2)
        rows.append((mu, xi, metrology.gain_db(xi), metrology.gain_db(xi, "amplitude"), report.delta_phi, report.qfi))
    return [
        write_table(
            out / "oat-scan.csv",
            ["mu", "xi", "gain_db_variance", "gain_db_amplitude", "delta_phi", "qfi"],
            rows,
        )
    ]


def _run_grid(cfg, out):
    state, _ = _prepared(cfg)
    g = cfg.block
    fn = quasiprob.wigner_grid if g["kernel"] == "Wigner" else quasiprob.husimi_grid
    grid = fn(state, g["n_polar"], g["n_azimuth"])
    path = out / f"{g['kernel'].lower()}.csv"
    grid.write_csv(path)
    return [path]


RUNNERS = {
    "fringe-scan": _run_fringe,
    "sensitivity-scan": _run_sensitivity,
    "clock": _run_sensor,
    "accel": _run_sensor,
    "gyro": _run_sensor,
    "qnd-demo": _run_qnd,
    "oat-scan": _run_oat,
    "wigner": _run_grid,
}


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> list:
    """Run a validated scenario and return the written file paths."""
    out = Path(out_dir if out_dir is not None else (cfg.output or "."))
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.scenario](cfg, out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="spinterf", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="scenario config (JSON)")
    ap.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    ap.add_argument("--out", help="output directory (overrides config 'output')")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")

    try:
        raw = Path(args.config).read_text()
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    cfg, diags = validate_config(raw)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        diags = diags + [f"--seed: must be an unsigned 64-bit integer, got {args.seed}"]
        cfg = None
    if cfg is None:
        for d in diags:
            log.error("%s: %s", args.config, d)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.seed = args.seed
        if cfg.measurement is not None:
            m = cfg.measurement
            cfg.measurement = dynamics.MeasurementModel(m.observable, m.sigma_det, m.shots, args.seed)

    try:
        paths = run_scenario(cfg, args.out)
    except SpinSimError as exc:
        log.error("%s failed: %s", cfg.scenario, exc)
        return EXIT_PHYSICS
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
