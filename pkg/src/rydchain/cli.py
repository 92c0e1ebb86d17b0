"""Batch front-end: config-driven runs, seeded ensembles, manifests.

Every subcommand reads a JSON config, writes CSV/JSON artifacts into an
output directory, and drops a manifest recording the config hash, the
seed, and the library versions, so a run is reproducible from the
manifest alone.  Identical (config, seed, threads) give byte-identical
outputs.
"""

import argparse
import hashlib
import json
import os
import platform
import sys
from dataclasses import asdict

OUTPUT_ENV_VAR = "RYDCHAIN_OUT"
MANIFEST_NAME = "manifest.json"

PAIR_TABLE_COLUMNS = (
    "d_um", "J_Hz", "Jz_Hz", "dzeta_Hz", "dE_Hz", "tau_ex_s",
    "Jz_over_J", "dzeta_over_J", "error",
)
GAP_SCAN_COLUMNS_BASE = ("omega_over_J", "omega_Hz")
CURVE_COLUMNS = ("L_um", "N_mean", "N_var")


class ConfigError(Exception):
    """Configuration problem, anchored to a line of the config file."""

    def __init__(self, message, line=1):
        super().__init__(message)
        self.line = line


def _key_line(text, key):
    """First line of the config text mentioning the key (1-based)."""
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return 1


class Config:
    """Parsed JSON config plus the raw text for line-anchored errors."""

    def __init__(self, data, text=""):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        self.data = data
        self.text = text

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            text = fh.read()
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as err:
            raise ConfigError(f"invalid JSON: {err.msg}", line=err.lineno) from err
        return cls(data, text)

    def line(self, key):
        return _key_line(self.text, key)

    def get(self, key, default=None, kind=None):
        value = self.data.get(key, default)
        if kind is not None and value is not None and not isinstance(value, kind):
            names = kind if isinstance(kind, tuple) else (kind,)
            raise ConfigError(
                f"'{key}' must be {'/'.join(t.__name__ for t in names)}",
                line=self.line(key),
            )
        return value

    def require(self, key, kind=None):
        if key not in self.data:
            raise ConfigError(f"missing required key '{key}'")
        return self.get(key, kind=kind)

    def grid(self, key, default=None):
        """Numeric grid: an explicit list or {min, max, num}."""
        raw = self.data.get(key, default)
        if raw is None:
            raise ConfigError(f"missing required grid '{key}'")
        line = self.line(key)
        if isinstance(raw, dict):
            try:
                lo, hi, num = float(raw["min"]), float(raw["max"]), int(raw["num"])
            except KeyError as err:
                raise ConfigError(
                    f"grid '{key}' needs min, max, num", line=line) from err
            if num < 1:
                raise ConfigError(f"grid '{key}' is empty", line=line)
            import numpy as np

            return [float(v) for v in np.linspace(lo, hi, num)]
        if not isinstance(raw, list) or not raw:
            raise ConfigError(f"grid '{key}' is empty", line=line)
        return [float(v) for v in raw]


def _write_rows(path, columns, rows):
    """CSV with repr-formatted floats for byte-stable output."""
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for v in row:
                cells.append(repr(float(v)) if isinstance(v, float) else str(v))
            fh.write(",".join(cells) + "\n")


def _grid_map(points, fn, threads):
    """fn over grid points in deterministic order; exceptions captured."""

    def run(item):
        idx, point = item
        try:
            return idx, fn(idx, point), None
        except Exception as err:  # noqa: BLE001 - converted to an error row
            return idx, None, f"{type(err).__name__}: {err}"

    if threads <= 1:
        results = [run(item) for item in enumerate(points)]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, enumerate(points)))
        results.sort(key=lambda t: t[0])
    return results


# ---------------------------------------------------------------- subcommands


def cmd_pair_coeffs(cfg, args, out_dir):
    from .couplings import COUPLINGS_48_50, CouplingSet, exchange_time, spin_couplings

    block = cfg.get("coefficients", kind=dict)
    coeffs = CouplingSet(**block) if block else COUPLINGS_48_50
    distances = cfg.grid("distances_um", default=[5.0, 7.0, 9.0])

    rows, warnings = [], 0
    for d in distances:
        try:
            sc = spin_couplings(coeffs, d)
            rows.append((
                float(d), sc.j_hz, sc.jz_hz, sc.dzeta_hz, sc.de_hz,
                exchange_time(sc.j_hz), sc.jz_over_j, sc.dzeta_over_j, "",
            ))
        except ValueError as err:
            nan = float("nan")
            rows.append((float(d), nan, nan, nan, nan, nan, nan, nan, str(err)))
            warnings += 1
    path = os.path.join(out_dir, "pair_couplings.csv")
    _write_rows(path, PAIR_TABLE_COLUMNS, rows)
    return ["pair_couplings.csv"], warnings


def cmd_phase_diagram(cfg, args, out_dir):
    from .mps import PHASE_SCAN_COLUMNS, phase_point, write_phase_csv

    n = cfg.get("n", 12, kind=int)
    chi = cfg.get("chi", 64, kind=int)
    sweeps = cfg.get("sweeps", 24, kind=int)
    j_hz = float(cfg.get("j_hz", 1.0, kind=(int, float)))
    jz_values = cfg.grid("jz_over_j")
    omega_values = cfg.grid("omega_over_4j")
    points = [(jz, om) for jz in jz_values for om in omega_values]

    def run(idx, point):
        jz, om = point
        return phase_point(jz, om, n, chi, j_hz=j_hz, seed=args.seed + idx,
                           sweeps=sweeps)

    nan = float("nan")
    rows, warnings = [], 0
    for idx, row, err in _grid_map(points, run, args.threads):
        if err is not None:
            jz, om = points[idx]
            row = {
                "omega_over_4J": om, "Jz_over_J": jz, "Mx": nan, "Oy": nan,
                "Oz": nan, "SvN": nan, "energy_Hz": nan,
                "converged": False, "chi_used": 0,
            }
            warnings += 1
        rows.append(row)
    path = os.path.join(out_dir, "phase_diagram.csv")
    write_phase_csv(rows, path)
    return ["phase_diagram.csv"], warnings


def cmd_gaps(cfg, args, out_dir):
    from . import ed
    from .model import build_chain
    from .ramps import static_chain, sweep_spec

    n = cfg.get("n", 10, kind=int)
    d_um = float(cfg.get("d_um", 7.0, kind=(int, float)))
    k = cfg.get("k", 3, kind=int)
    omegas = cfg.grid("omega_over_j")
    spec = sweep_spec(n, d_um=d_um)

    def run(idx, w_over_j):
        op = build_chain(static_chain(spec, w_over_j * spec.j_hz))
        return ed.gaps(op, k=k)

    columns = GAP_SCAN_COLUMNS_BASE + tuple(f"gap{i}_Hz" for i in range(1, k))
    nan = float("nan")
    rows, warnings = [], 0
    for idx, gap, err in _grid_map(omegas, run, args.threads):
        w = omegas[idx]
        if err is not None:
            rows.append((w, w * spec.j_hz) + (nan,) * (k - 1))
            warnings += 1
        else:
            rows.append((w, w * spec.j_hz) + tuple(float(g) for g in gap))
    path = os.path.join(out_dir, "gaps.csv")
    _write_rows(path, columns, rows)
    return ["gaps.csv"], warnings


def cmd_sweep(cfg, args, out_dir):
    from .ramps import generate_ramp, run_sweep, sweep_spec, write_sweep_csv

    n = cfg.get("n", 10, kind=int)
    d_um = float(cfg.get("d_um", 7.0, kind=(int, float)))
    jt = float(cfg.get("jt", 180.0, kind=(int, float)))
    omega_max_over_j = float(cfg.get("omega_max_over_j", 24.0, kind=(int, float)))
    mode = cfg.get("mode", "fixed", kind=str)
    direction = cfg.get("direction", "cycle", kind=str)
    probe_n = cfg.get("probe_n", min(n, 10), kind=int)
    checkpoints = cfg.get("checkpoints", 64, kind=int)
    constant_velocity = cfg.get("constant_velocity", False, kind=bool)
    if mode not in ("fixed", "ideal", "motional"):
        raise ConfigError(f"unknown sweep mode '{mode}'", line=cfg.line("mode"))
    if direction not in ("up", "cycle"):
        raise ConfigError(
            f"direction must be 'up' or 'cycle', got '{direction}'",
            line=cfg.line("direction"),
        )
    if jt <= 0.0:
        raise ConfigError("'jt' must be positive", line=cfg.line("jt"))

    spec = sweep_spec(n, d_um=d_um)
    duration = jt / spec.j_hz
    ramp = generate_ramp(
        spec, omega_max_over_j * spec.j_hz, 1.0, probe_n=probe_n,
        constant_velocity=constant_velocity,
    )
    if direction == "cycle":
        ramp = ramp.cycle()
    ramp = ramp.rescaled(duration)

    if mode == "motional":
        from .evaporation import prepared_chain_trajectories

        realizations = args.realizations or 4
        trajectories = prepared_chain_trajectories(
            n, 1.05 * duration, realizations, seed=args.seed, d_um=d_um,
            record_interval_s=float(
                cfg.get("record_interval_s", 5e-6, kind=(int, float))),
        )
        result = run_sweep(spec, ramp, trajectories, d_um=d_um,
                           checkpoints=checkpoints)
    else:
        result = run_sweep(spec, ramp, mode, checkpoints=checkpoints)
    path = os.path.join(out_dir, "sweep.csv")
    write_sweep_csv(path, result)
    return ["sweep.csv"], 0


def _schedule_from_config(cfg):
    from .evaporation import Schedule

    block = cfg.get("schedule", kind=dict)
    if block is None:
        return None
    try:
        return Schedule(**{k: tuple(v) if isinstance(v, list) else v
                           for k, v in block.items()})
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad schedule: {err}", line=cfg.line("schedule")) from err


def cmd_evaporate(cfg, args, out_dir):
    from dataclasses import replace

    from .evaporation import (
        EvaporationConfig,
        evaporation_curve,
        integrate,
        paper_config,
        reduced_config,
        write_trajectory_csv,
    )

    profile = cfg.get("profile", "reduced", kind=str)
    if profile not in ("reduced", "paper"):
        raise ConfigError(
            f"profile must be 'reduced' or 'paper', got '{profile}'",
            line=cfg.line("profile"),
        )
    schedule = _schedule_from_config(cfg)
    if profile == "paper":
        ev_cfg = paper_config(seed=args.seed)
    else:
        ev_cfg = reduced_config(
            seed=args.seed,
            target_n=cfg.get("target_n", 10, kind=int),
            d_um=float(cfg.get("d_um", 5.0, kind=(int, float))),
        )
    if schedule is not None:
        ev_cfg = replace(ev_cfg, schedule=schedule)
    n_atoms = cfg.get("n_atoms", kind=int)
    if n_atoms is not None:
        ev_cfg = replace(ev_cfg, n_atoms=n_atoms)

    outputs, warnings = [], 0
    realizations = args.realizations or 10
    if cfg.get("curve", True, kind=bool):
        if realizations < 2:
            raise ConfigError("the evaporation curve needs realizations >= 2")
        curve = evaporation_curve(ev_cfg, realizations)
        rows = [
            (float(l), float(m), float(v))
            for l, m, v in zip(curve.l_um, curve.n_mean, curve.n_var)
        ]
        path = os.path.join(out_dir, "evaporation_curve.csv")
        _write_rows(path, CURVE_COLUMNS, rows)
        outputs.append("evaporation_curve.csv")
    if cfg.get("trajectory", False, kind=bool):
        ens = integrate(ev_cfg)
        path = os.path.join(out_dir, "trajectory.csv")
        write_trajectory_csv(path, ens, ens.realization_indices[0])
        outputs.append("trajectory.csv")
    if not outputs:
        raise ConfigError("nothing to do: enable 'curve' or 'trajectory'")
    return outputs, warnings


def cmd_trap(cfg, args, out_dir):
    from .couplings import COUPLINGS_48_50, spin_couplings
    from .trap import paper_beams, trap_profile, write_potential_map

    d_um = float(cfg.get("d_um", 5.0, kind=(int, float)))
    beams = paper_beams(d_um=d_um)
    j_hz = spin_couplings(COUPLINGS_48_50, d_um).j_hz
    report = trap_profile(beams, j_hz=j_hz)
    report_path = os.path.join(out_dir, "trap_report.json")
    with open(report_path, "w") as fh:
        json.dump(asdict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs = ["trap_report.json"]
    if cfg.get("map", True, kind=bool):
        map_kwargs = {}
        for key in ("x_span_um", "z_span_um"):
            if cfg.get(key) is not None:
                map_kwargs[key] = float(cfg.get(key, kind=(int, float)))
        for key in ("nx", "nz"):
            if cfg.get(key) is not None:
                map_kwargs[key] = cfg.get(key, kind=int)
        path = os.path.join(out_dir, "trap_map.csv")
        write_potential_map(path, beams, **map_kwargs)
        outputs.append("trap_map.csv")
    return outputs, 0


def cmd_lifetime(cfg, args, out_dir):
    from .lifetime import LossChannel, budget_table, combine, reference_channels

    block = cfg.get("channels", kind=list)
    if block is None:
        channels = reference_channels()
    else:
        try:
            channels = [LossChannel(**entry) for entry in block]
        except (TypeError, ValueError) as err:
            raise ConfigError(
                f"bad channel: {err}", line=cfg.line("channels")) from err
    n_atoms = cfg.get("n_atoms", 40, kind=int)
    budget = combine(channels, n_atoms=n_atoms)
    path = os.path.join(out_dir, "lifetime_budget.csv")
    with open(path, "w") as fh:
        fh.write(budget_table(budget))
    return ["lifetime_budget.csv"], 0


COMMANDS = {
    "pair-coeffs": cmd_pair_coeffs,
    "phase-diagram": cmd_phase_diagram,
    "gaps": cmd_gaps,
    "sweep": cmd_sweep,
    "evaporate": cmd_evaporate,
    "trap": cmd_trap,
    "lifetime": cmd_lifetime,
}


def _versions():
    import numpy
    import scipy

    from . import __version__

    return {
        "rydchain": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _write_manifest(out_dir, subcommand, config_text, args, outputs, warnings):
    manifest = {
        "subcommand": subcommand,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "seed": args.seed,
        "realizations": args.realizations,
        "threads": args.threads,
        "versions": _versions(),
        "outputs": sorted(outputs),
        "warnings": warnings,
    }
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rydchain",
        description="circular-Rydberg spin-chain simulations: batch runs",
    )
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("config", nargs="?", default=None,
                        help="JSON config file (defaults apply if omitted)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--realizations", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default=None,
                        help=f"output directory (or ${OUTPUT_ENV_VAR})")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    config_path = args.config
    try:
        if config_path is None:
            cfg = Config({}, "")
        else:
            cfg = Config.load(config_path)
        # precedence: flag, then environment, then config, then cwd
        out_dir = (args.out or os.environ.get(OUTPUT_ENV_VAR)
                   or cfg.get("out", ".", kind=str))
        if args.seed == 0 and "seed" in cfg.data:
            args.seed = cfg.require("seed", kind=int)
        if args.realizations is None and "realizations" in cfg.data:
            args.realizations = cfg.require("realizations", kind=int)
        os.makedirs(out_dir, exist_ok=True)
        outputs, warnings = COMMANDS[args.subcommand](cfg, args, out_dir)
    except ConfigError as err:
        where = config_path if config_path is not None else "<defaults>"
        print(f"{where}:{err.line}: {err}", file=sys.stderr)
        return 2
    _write_manifest(out_dir, args.subcommand, cfg.text, args, outputs, warnings)
    if warnings:
        print(f"{args.subcommand}: {warnings} grid point(s) failed", file=sys.stderr)
    print(f"{args.subcommand}: wrote {', '.join(sorted(outputs))} -> {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
