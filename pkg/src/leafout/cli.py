"""Batch command line: one task per invocation, driven by a JSON config.

Subcommands mirror the task names; `--config` supplies a nested JSON
file, individual keys can be overridden with `--set a.b.c=value`, and
`--out` overrides the output directory.  Angles in configs are degrees;
everything internal is radians.  Exit codes: 0 success, 2 invalid
configuration, 3 numerical failure (partial outputs are flagged in the
manifest).
"""
import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .droptest import DropScenario, trigger_map
from .energy import (SpringModel, characterize_bistability,
                     landscape_over_psi, path_energies, ratio_surface)
from .explore import GraspProgram, run_program
from .geometry import build_geometry, geometry_to_json, mesh_to_obj, reconstruct_mesh
from .kinematics import FoldState, LockedConfiguration, StepFailure
from .uniform import OutOfRangeError, uniform_path, uniform_state
from . import io as lio

TASKS = ("uniform-path", "energy-landscape", "ratio-surface", "drop-test",
         "multi-grasp", "export-mesh")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _deg(x):
    return np.radians(float(x))


def _require(cfg, key, kind=None):
    if key not in cfg:
        raise ConfigError(f"missing config key: {key}")
    v = cfg[key]
    if kind is not None:
        try:
            v = kind(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {v!r}") from exc
    return v


def build_geometry_from_config(cfg):
    g = _require(cfg, "geometry")
    try:
        return build_geometry(_require(g, "n_cell", int),
                              _require(g, "L1", float),
                              _require(g, "L2", float))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_springs_from_config(geom, cfg):
    s = cfg.get("springs")
    if s is None:
        raise ConfigError("missing config key: springs")
    rest = s.get("rest_deg", {})
    rho_m = _deg(_require(rest, "rho_m"))
    rho_b = _deg(_require(rest, "rho_b"))
    rho_s = _deg(rest["rho_s"]) if "rho_s" in rest else None
    try:
        if "kappa" in s:
            return SpringModel.uniform(geom, float(s["kappa"]), rho_m, rho_b, rho_s)
        return SpringModel.per_kind(geom, float(s.get("kappa_m", 0.0)),
                                    float(s.get("kappa_s", 0.0)),
                                    float(s.get("kappa_b", 0.0)),
                                    rho_m, rho_b, rho_s)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def apply_overrides(cfg, pairs):
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key.path=value, got {pair!r}")
        dotted, raw = pair.split("=", 1)
        keys = dotted.split(".")
        node = cfg
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override through non-object {k!r}")
        try:
            node[keys[-1]] = json.loads(raw)
        except json.JSONDecodeError:
            node[keys[-1]] = raw
    return cfg


def validate_config(cfg):
    task = cfg.get("task")
    if not isinstance(task, dict) or "name" not in task:
        raise ConfigError("config needs a task object with a name")
    if task["name"] not in TASKS:
        raise ConfigError(f"unknown task {task['name']!r}; expected one of {TASKS}")
    geom = build_geometry_from_config(cfg)
    name = task["name"]
    if name in ("energy-landscape", "multi-grasp"):
        build_springs_from_config(geom, cfg)
    if name == "uniform-path" and "springs" in cfg:
        build_springs_from_config(geom, cfg)
    if name == "multi-grasp":
        progs = task.get("programs")
        if not isinstance(progs, list) or not progs:
            raise ConfigError("multi-grasp task needs a non-empty programs list")
        for p in progs:
            if not isinstance(p, list) or not p:
                raise ConfigError("each program is a non-empty list of unit indices")
            if any(not isinstance(u, int) or u < 1 or u > geom.n_cell for u in p):
                raise ConfigError(f"program {p} has unit indices outside 1..n_cell")
    if name == "drop-test":
        d = task.get("drop", {})
        for key in ("m_ball_g", "R_ball_mm"):
            if key in d and float(d[key]) <= 0:
                raise ConfigError(f"{key} must be positive")
    return geom


def _outdir(cfg, args):
    out = args.out or cfg.get("output", {}).get("dir") \
        or os.environ.get("LEAFOUT_OUTDIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _psi_range(task, default=(-60.0, 60.0)):
    rng = task.get("psi_range_deg", list(default))
    if len(rng) != 2:
        raise ConfigError("psi_range_deg must be [lo, hi]")
    return _deg(rng[0]), _deg(rng[1])


def run_task(cfg, args):
    geom = validate_config(cfg)
    task = cfg["task"]
    name = task["name"]
    outdir = _outdir(cfg, args)
    outputs = []
    terminations = {}
    try:
        _run_task_body(cfg, args, geom, task, name, outdir, outputs,
                       terminations)
        status, error = "ok", None
    except (StepFailure, LockedConfiguration, OutOfRangeError) as exc:
        status, error = "partial", f"{type(exc).__name__}: {exc}"
    manifest = lio.manifest_dict(cfg, [os.path.basename(o) for o in outputs],
                                 status=status, terminations=terminations,
                                 threads=args.threads, seed=args.seed)
    if error is not None:
        manifest["error"] = error
    lio.write_json(manifest, os.path.join(outdir, "manifest.json"))
    if error is not None:
        print(_error_report("numerical", error), file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _run_task_body(cfg, args, geom, task, name, outdir, outputs, terminations):
    if name == "uniform-path":
        n_samples = int(task.get("n_samples", 241))
        path = uniform_path(geom, _psi_range(task), n_samples)
        energies = None
        if "springs" in cfg:
            energies = path_energies(geom, build_springs_from_config(geom, cfg), path)
        f = os.path.join(outdir, "uniform_path.csv")
        lio.write_path_csv(geom, path, f, energies)
        outputs.append(f)
        terminations["uniform-path"] = path.termination
        fj = os.path.join(outdir, "uniform_path.json")
        lio.write_json(lio.path_to_json_dict(geom, path, energies), fj)
        outputs.append(fj)

    elif name == "energy-landscape":
        springs = build_springs_from_config(geom, cfg)
        curve = landscape_over_psi(geom, springs, _psi_range(task),
                                   task.get("n_samples"))
        report = characterize_bistability(curve)
        f = os.path.join(outdir, "landscape.csv")
        lio.write_csv(lio.landscape_rows(curve), f)
        outputs.append(f)
        fj = os.path.join(outdir, "bistability.json")
        lio.write_json(report.to_dict(), fj)
        outputs.append(fj)
        terminations["landscape"] = "truncated" if curve.truncated else "completed"

    elif name == "ratio-surface":
        step = _deg(task.get("grid_step_deg", 2.0))
        m_rng = task.get("rest_main_range_deg", [2.0, 178.0])
        b_rng = task.get("rest_boundary_range_deg", [-178.0, -2.0])
        # endpoint included only when it sits on the grid
        gm = np.arange(_deg(m_rng[0]), _deg(m_rng[1]) + 1e-9, step)
        gb = np.arange(_deg(b_rng[0]), _deg(b_rng[1]) + 1e-9, step)
        surface = ratio_surface(geom, gm, gb)
        f = os.path.join(outdir, "ratio_surface.csv")
        lio.write_csv(lio.surface_rows(surface), f)
        outputs.append(f)
        fj = os.path.join(outdir, "xi_zero_contour.json")
        lio.write_json(lio.contours_to_json_dict(surface), fj)
        outputs.append(fj)

    elif name == "drop-test":
        d = task.get("drop", {})
        scenario = DropScenario(
            m_ball=float(d.get("m_ball_g", 22.3)) * 1e-3,
            R_ball=float(d.get("R_ball_mm", 35.0)) * 1e-3,
            h=float(d.get("h_mm", 360.0)) * 1e-3,
            g=float(d.get("g", 9.81)),
            kappa_pet=float(d.get("kappa_pet", 0.76)),
            kappa_pet_unit=d.get("kappa_pet_unit", "N*mm/rad/mm"),
            effective_width_mm=(float(d["effective_width_mm"])
                                if "effective_width_mm" in d else None),
            rest_angle=_deg(d.get("rest_angle_deg", 71.8)))
        h_rng = [x * 1e-3 for x in task.get("h_range_mm", [50.0, 800.0])]
        r_rng = [_deg(x) for x in task.get("rest_range_deg", [40.0, 100.0])]
        obs = None
        if task.get("observations_csv"):
            obs = lio.read_observations_csv(task["observations_csv"])
        tmap = trigger_map(geom, scenario, h_rng, r_rng,
                           n_h=int(task.get("n_h", 25)),
                           n_rest=int(task.get("n_rest", 25)),
                           observations=obs)
        f = os.path.join(outdir, "trigger_map.csv")
        lio.write_csv(lio.trigger_map_rows(tmap), f)
        outputs.append(f)
        fj = os.path.join(outdir, "egap_zero_contour.json")
        lio.write_json(lio.trigger_contour_json_dict(tmap), fj)
        outputs.append(fj)

    elif name == "multi-grasp":
        springs = build_springs_from_config(geom, cfg)
        bundle = {"geometry": geom.to_dict(), "programs": []}
        for units in task["programs"]:
            prog = GraspProgram(tuple(units),
                                delta_rho_c=_deg(task.get("delta_rho_c_deg", 0.5)),
                                max_steps=int(task.get("max_steps", 400)))
            res = run_program(geom, prog, springs=springs)
            f = os.path.join(outdir, f"trace_{prog.label()}.csv")
            lio.write_path_csv(geom, res.path, f, res.trace.energy)
            outputs.append(f)
            terminations[prog.label()] = res.path.termination
            bundle["programs"].append(lio.path_to_json_dict(
                geom, res.path, res.trace.energy,
                extra={"label": prog.label(),
                       "controlled_units": list(prog.controlled_units),
                       "config_space": {
                           "x": [float(v) for v in res.trace.x],
                           "y": [float(v) for v in res.trace.y],
                           "z": [float(v) for v in res.trace.z]}}))
        fj = os.path.join(outdir, "multigrasp_bundle.json")
        lio.write_json(bundle, fj)
        outputs.append(fj)

    elif name == "export-mesh":
        state_spec = task.get("state", {"type": "flat"})
        tilt = 0.0
        if state_spec.get("type") == "flat":
            state = FoldState.flat(geom)
        elif state_spec.get("type") == "uniform":
            psi = _deg(_require(state_spec, "psi_deg"))
            try:
                state = uniform_state(geom, psi)
            except OutOfRangeError as exc:
                raise ConfigError(str(exc)) from exc
            tilt = psi
        elif state_spec.get("type") == "angles":
            rho = np.radians(np.asarray(_require(state_spec, "rho_o_deg"),
                                        dtype=float))
            state = FoldState.from_angles(geom, rho)
        else:
            raise ConfigError("state.type must be flat | uniform | angles")
        if "tilt_deg" in state_spec:
            tilt = _deg(state_spec["tilt_deg"])
        mesh = reconstruct_mesh(geom, state, tilt=tilt)
        f = os.path.join(outdir, "mesh.obj")
        with open(f, "w") as fh:
            fh.write(mesh_to_obj(mesh))
        outputs.append(f)
        fj = os.path.join(outdir, "geometry.json")
        with open(fj, "w") as fh:
            fh.write(geometry_to_json(geom) + "\n")
        outputs.append(fj)


def _error_report(kind, message):
    return json.dumps({"error": {"kind": kind, "message": message}},
                      sort_keys=True)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="leafout",
        description="Leaf-out origami grasping simulations (batch).")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in TASKS + ("validate",):
        p = sub.add_parser(name, help=f"{name} task")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="sweep parallelism hint (vectorized sweeps ignore it)")
        p.add_argument("--seed", type=int, default=None,
                       help="reserved; all current algorithms are deterministic")
        p.add_argument("--set", action="append", dest="overrides", default=[],
                       metavar="KEY.PATH=VALUE", help="override a config key")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.overrides)
        if args.command == "validate":
            validate_config(cfg)
            print(json.dumps({"valid": True, "config_sha256":
                              lio.config_hash(cfg)}, sort_keys=True))
            return EXIT_OK
        if cfg.get("task", {}).get("name") != args.command:
            raise ConfigError(
                f"config task {cfg.get('task', {}).get('name')!r} does not "
                f"match subcommand {args.command!r}")
        return run_task(cfg, args)
    except ConfigError as exc:
        print(_error_report("config", str(exc)), file=sys.stderr)
        return EXIT_CONFIG
    except (StepFailure, LockedConfiguration, OutOfRangeError) as exc:
        print(_error_report("numerical", str(exc)), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
