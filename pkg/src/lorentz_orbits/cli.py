"""Command-line front end.

Every subcommand reads a JSON run config (``--config``) and writes its report
under ``--out``. Reports are deterministic for a given config and seed; the
wall-clock timestamp goes to a separate ``<name>.meta.json`` file.

Exit codes: 0 success, 2 config error, 3 singular evaluation, 4 pair not
admissible, 5 certificate or optimizer failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import action as act
from . import catalog, dynamics, optimizer, potentials, witness
from .errors import (
    ConfigError,
    LorentzOrbitsError,
    NonFinite,
    NotAdmissible,
    SingularEncounter,
    SingularPoint,
    SingularTrajectory,
    UnboundedAbove,
)
from .serialization import dumps, rows_to_csv
from .trajectory import PeriodicTrajectory

EXIT_OK, EXIT_CONFIG, EXIT_SINGULAR, EXIT_ADMISSIBLE, EXIT_FAILURE = 0, 2, 3, 4, 5

TOL_PROFILES = {
    "default": {"grad_tol": 1e-9, "residual_tol": 1e-3, "tol_zero": 1e-10, "field_tol": 1e-8},
    "strict": {"grad_tol": 1e-11, "residual_tol": 1e-4, "tol_zero": 1e-12, "field_tol": 1e-10},
}


@dataclass
class RunConfig:
    potential: dict
    period: float = 1.0
    grid_size: int = 256
    box: tuple = ((-4.0, 4.0),) * 3
    box_grid: tuple = (21, 21, 21, 16)
    optimizer: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)
    normalize_phi: bool = False
    seed: int = 0
    out: str = "out"

    def __post_init__(self):
        if not isinstance(self.potential, dict):
            raise ConfigError("'potential' must be an object")
        if not (isinstance(self.grid_size, int) and self.grid_size >= 8 and self.grid_size % 2 == 0):
            raise ConfigError(f"grid_size must be an even integer >= 8, got {self.grid_size!r}")
        try:
            self.period = float(self.period)
            self.box = tuple((float(lo), float(hi)) for lo, hi in self.box)
            self.box_grid = tuple(int(g) for g in self.box_grid)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad numeric field in config: {exc}") from exc
        if not self.period > 0:
            raise ConfigError("period must be positive")
        if len(self.box) != 3 or len(self.box_grid) != 4:
            raise ConfigError("box needs three [lo, hi] pairs and box_grid four counts")

    @classmethod
    def from_dict(cls, data):
        """Validate keys and build the config; raises ConfigError."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dc_fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        if "potential" not in data:
            raise ConfigError("config needs a 'potential' entry")
        return cls(**data)


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data), hashlib.sha256(text.encode("utf-8")).hexdigest()


def build_pair(cfg):
    try:
        pair = catalog.pair_from_spec(cfg.potential, cfg.period)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad potential spec: {exc}") from exc
    if cfg.normalize_phi:
        pair = potentials.normalize_phi(pair, cfg.box)
    return pair


class Run:
    """Per-invocation context: config, output directory and metadata header."""

    def __init__(self, args):
        self.args = args
        self.cfg, self.config_hash = load_config(args.config)
        if args.grid is not None:
            if args.grid < 8 or args.grid % 2:
                raise ConfigError("--grid must be an even integer >= 8")
            self.cfg.grid_size = args.grid
        if args.seed is not None:
            self.cfg.seed = args.seed
        self.tol = dict(TOL_PROFILES[args.tol_profile])
        self.out = Path(args.out if args.out is not None else self.cfg.out)
        self.pair = build_pair(self.cfg)

    def metadata(self, **extra):
        return {
            "command": self.args.command,
            "config_hash": self.config_hash,
            "period": self.cfg.period,
            "grid_size": self.cfg.grid_size,
            "box": self.cfg.box,
            "box_grid": self.cfg.box_grid,
            "seed": self.cfg.seed,
            "tol_profile": self.args.tol_profile,
            "tolerances": self.tol,
            **extra,
        }

    def write(self, name, payload, **meta):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(dumps({"metadata": self.metadata(**meta), "result": payload}) + "\n", encoding="utf-8")
        stamp = {"file": name, "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
        (self.out / (Path(name).stem + ".meta.json")).write_text(json.dumps(stamp) + "\n", encoding="utf-8")
        return path

    def write_text(self, name, text):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        return path


def _load_trajectory(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {path}: {exc}") from exc
    try:
        if str(path).endswith(".csv"):
            return PeriodicTrajectory.from_csv(text)
        data = json.loads(text)
        if isinstance(data, dict) and "result" in data:
            data = data["result"]
        if isinstance(data, dict) and "trajectory" in data:
            data = data["trajectory"]
        return PeriodicTrajectory.from_dict(data)
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise ConfigError(f"cannot parse trajectory {path}: {exc}") from exc


# -- subcommands -------------------------------------------------------------------

def cmd_fields(run):
    x = np.asarray(run.args.x, dtype=float)
    s = potentials.eval_fields(run.pair, float(run.args.t), x)
    out = {"t": float(run.args.t), "x": x, "E": np.asarray(s.electric).reshape(3),
           "B": np.asarray(s.magnetic).reshape(3)}
    print(dumps(out, indent=0))
    return EXIT_OK


def cmd_admissible(run):
    rep = potentials.admissibility_report(run.pair, tol_zero=run.tol["tol_zero"])
    payload = {**potentials_report_dict(rep), "admissible": rep.admissible}
    run.write("admissibility.json", payload)
    return EXIT_OK


def potentials_report_dict(rep):
    from .serialization import to_plain
    return to_plain(rep)


def _require_admissible(run):
    rep = potentials.admissibility_report(run.pair, tol_zero=run.tol["tol_zero"])
    if not rep.nonzero_electric_field:
        raise NotAdmissible("pair not admissible: zero electric field")
    if not all(rep.coulomb_minorant_ok):
        raise NotAdmissible("pair not admissible: Coulomb minorant fails near a singular ball")
    return rep


def cmd_witness(run):
    mode = run.args.mode
    wcfg = run.cfg.witness
    N = int(wcfg.get("N", 1024))
    if mode == "phi_zero":
        cert = witness.certify_lemma_negative(run.pair, N=N)
        run.write("witness.json", cert, N=N, mode=mode)
    elif mode == "theorem2":
        seq = wcfg.get("base_sequence")
        if not seq:
            raise ConfigError("theorem2 needs witness.base_sequence in the config")
        rows, cert, trend_ok = witness.certify_theorem2(run.pair, seq, N=N)
        run.write("witness.json", {"certificate": cert, "trend_ok": trend_ok, "ratios": rows}, N=N, mode=mode)
        run.write_text("ratios.csv", rows_to_csv(["n", "radius", "r1", "r2"],
                                                 [[r.n, r.radius, r.r1, r.r2] for r in rows]))
        if not cert.negative:
            return EXIT_FAILURE
    elif mode == "theorem3_flow":
        b0 = wcfg.get("b0", [0.0, 0.0, 0.0])
        n_flow = int(wcfg.get("N", 64))
        cert = witness.certify_theorem3_flow(run.pair, b0, N=n_flow, tol_zero=run.tol.get("flow_tol", 1e-8))
        run.write("witness.json", cert, N=n_flow, mode=mode)
    else:
        pts = wcfg.get("approach_points")
        if not pts:
            raise ConfigError("divergence mode needs witness.approach_points in the config")
        rows, monotone = witness.divergence_probe(run.pair, pts, N=N, M=float(wcfg.get("M", 0.0)))
        run.write("divergence.json", {"rows": rows, "monotone": monotone}, N=N, mode=mode)
        run.write_text("divergence.csv", rows_to_csv(
            ["radius", "g_dot_L2_sq", "g_dot_sup", "ratio", "epsilon", "action"],
            [[r.radius, r.g_dot_L2_sq, r.g_dot_sup, r.ratio, r.epsilon, r.action_value] for r in rows]))
    return EXIT_OK


def _minimize_config(run):
    opts = dict(run.cfg.optimizer)
    opts.setdefault("grad_tol", run.tol["grad_tol"])
    opts.setdefault("residual_tol", run.tol["residual_tol"])
    opts.setdefault("tol_zero", run.tol["tol_zero"])
    opts["grid_size"] = run.cfg.grid_size
    opts.setdefault("box", run.cfg.box)
    opts.setdefault("box_grid", run.cfg.box_grid)
    if run.args.seed is not None or "multistart_seeds" not in opts:
        opts["multistart_seeds"] = (run.cfg.seed,)
    try:
        return optimizer.MinimizeConfig(**opts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad optimizer settings: {exc}") from exc


def cmd_minimize(run):
    _require_admissible(run)
    mcfg = _minimize_config(run)
    custom = _load_trajectory(run.args.start) if run.args.start else None
    res = optimizer.minimize(run.pair, mcfg, custom_start=custom)
    try:
        residual = dynamics.periodicity_residual(run.pair, res.trajectory)
    except SingularEncounter as exc:
        residual = None
        res.details["periodicity_error"] = str(exc)
    res.details["periodicity_residual"] = residual
    run.write("minimize.json", res, optimizer=mcfg.to_dict())
    run.write_text("iterates.csv", rows_to_csv(["iter", "I", "grad_norm", "sup_speed"],
                                               [list(r) for r in res.iterates_summary]))
    run.write_text("trajectory.csv", res.trajectory.to_csv())
    flags = ("non_constant", "negative_action", "el_residual_ok", "speed_below_rho")
    return EXIT_OK if all(res.certification[k] for k in flags) else EXIT_FAILURE


def cmd_simulate(run):
    q = _load_trajectory(run.args.trajectory)
    res, orbit = dynamics.periodicity_residual(run.pair, q, return_orbit=True)
    stride = max(1, int(run.args.stride))
    run.write_text("orbit.csv", dynamics.orbit_to_csv(orbit, stride))
    run.write("simulate.json", {"periodicity_residual": res, "steps": len(orbit) - 1, "N": q.N,
                                "period": q.period}, csv_stride=stride)
    return EXIT_OK


def cmd_verify(run):
    q = _load_trajectory(run.args.trajectory)
    rep = act.action(q, run.pair, with_residual=True)
    run.write("verify.json", rep, N=q.N, rho_cap=act.RHO_CAP)
    return EXIT_OK


def cmd_gauge(run):
    f = catalog.gauge_from_expression(run.args.gauge, run.cfg.period)
    pts = potentials.box_grid(run.cfg.box, 5)
    if not potentials.check_gauge_periodic(f, run.cfg.period, pts):
        raise ConfigError("gauge function is not T-periodic in time")
    new = potentials.gauge_transform(run.pair, f)
    rng = np.random.default_rng(run.cfg.seed)
    n = int(run.args.probes)
    ts = rng.uniform(0.0, run.cfg.period, n)
    lo = np.array([b[0] for b in run.cfg.box])
    hi = np.array([b[1] for b in run.cfg.box])
    xs = rng.uniform(lo, hi, (n, 3))
    keep = run.pair.distance_to_singular(xs) > 1e-3
    E0, B0 = potentials.fields(run.pair, ts[keep], xs[keep])
    E1, B1 = potentials.fields(new, ts[keep], xs[keep])
    dE = float(np.max(np.abs(E0 - E1))) if keep.any() else 0.0
    dB = float(np.max(np.abs(B0 - B1))) if keep.any() else 0.0
    tol = run.tol["field_tol"]
    new_cfg = {
        "potential": {"gauge": {"base": run.cfg.potential, "f": run.args.gauge}},
        "period": run.cfg.period, "grid_size": run.cfg.grid_size, "box": run.cfg.box,
        "box_grid": run.cfg.box_grid, "optimizer": run.cfg.optimizer, "witness": run.cfg.witness,
        "normalize_phi": run.cfg.normalize_phi, "seed": run.cfg.seed,
    }
    run.write_text("gauge_config.json", dumps(new_cfg) + "\n")
    agree = dE <= tol and dB <= tol
    run.write("gauge_report.json", {"gauge": run.args.gauge, "probes": int(keep.sum()), "max_dE": dE,
                                    "max_dB": dB, "tolerance": tol, "fields_agree": agree})
    return EXIT_OK if agree else EXIT_FAILURE


COMMANDS = {
    "fields": cmd_fields,
    "admissible": cmd_admissible,
    "witness": cmd_witness,
    "minimize": cmd_minimize,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "gauge": cmd_gauge,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config")
    common.add_argument("--out", default=None, help="output directory (default: config 'out')")
    common.add_argument("--seed", type=int, default=None, help="seed for random starts and probes")
    common.add_argument("--grid", type=int, default=None, help="number of time nodes N")
    common.add_argument("--tol-profile", choices=sorted(TOL_PROFILES), default="default")

    parser = argparse.ArgumentParser(prog="lorentz-orbits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("fields", parents=[common], help="print E and B at one point")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--x", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    sub.add_parser("admissible", parents=[common], help="audit the admissibility conditions")
    p = sub.add_parser("witness", parents=[common], help="build a negative-action witness")
    p.add_argument("--mode", choices=list(witness.MODES) + ["divergence"], default="phi_zero")
    p = sub.add_parser("minimize", parents=[common], help="minimize the action and certify the result")
    p.add_argument("--start", default=None, help="trajectory file for start_mode 'custom'")
    p = sub.add_parser("simulate", parents=[common], help="integrate one period from a trajectory's initial state")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--stride", type=int, default=64, help="keep every k-th RK4 state in orbit.csv")
    p = sub.add_parser("verify", parents=[common], help="action report and EL residual of a trajectory")
    p.add_argument("--trajectory", required=True)
    p = sub.add_parser("gauge", parents=[common], help="gauge-transform the pair and compare fields")
    p.add_argument("--gauge", required=True, help="expression for f(t, x1, x2, x3)")
    p.add_argument("--probes", type=int, default=100)
    return parser


def _exit_code(exc):
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (SingularPoint, SingularEncounter, SingularTrajectory, NonFinite)):
        return EXIT_SINGULAR
    if isinstance(exc, (NotAdmissible, UnboundedAbove)):
        return EXIT_ADMISSIBLE
    return EXIT_FAILURE


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run = Run(args)
        return COMMANDS[args.command](run)
    except LorentzOrbitsError as exc:
        code = _exit_code(exc)
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        ball = getattr(exc, "ball", None)
        if ball is not None:
            err["ball"] = {"center": list(ball.center), "radius": ball.radius}
        print(json.dumps(err), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
