"""Command-line interface: JSON configs in, JSON reports and CSV samples out.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
or configuration errors.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import errors
from .errors import ConfigError, GeometryError
from .grouppaths import S3Quadrature, lift_deformation
from .liealg import defect_aut1, defect_autH, defect_autXi, defect_sdiff, reconstruct_f
from .quantomorph import (
    DEFAULT_BASE,
    ComposedFiberMap,
    LeftMultiplication,
    Quantomorphism,
    export_samples,
    fiber_rigidity_defect,
    path_independence_defect,
    projection_defect,
    pullback_defect,
    unitary_deviation,
    volume_defect,
)
from .s2maps import (
    Circle,
    Concatenation,
    Geodesic,
    Identity,
    MappedCurve,
    Rotation,
    RotationFamily,
    area_defect,
    loop_area,
)
from .s3core import ONE, frame_identity_residuals, hopf_projection, named_field, random_s3
from .specs import VEC3, parse_deformation, parse_field, parse_loop, parse_map, validate
from .transport import holonomy, wrap_angle

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

POS_INT = {"type": "integer", "minimum": 1}
POS_NUM = {"type": "number", "exclusiveMinimum": 0}


class Checks:
    """Accumulates ``{name, value, tolerance, pass}`` records."""

    def __init__(self, scale=1.0):
        self.scale = scale
        self.items = []

    def le(self, name, value, tolerance, detail=None):
        tol = tolerance * self.scale
        ok = value is not None and math.isfinite(value) and value <= tol
        self._add(name, value, tol, ok, detail)
        return ok

    def ge(self, name, value, threshold, detail=None):
        ok = value is not None and math.isfinite(value) and value >= threshold
        self._add(name, value, threshold, ok, detail)
        return ok

    def error(self, name, exc):
        self._add(name, None, None, False, f"{type(exc).__name__}: {exc}")

    def _add(self, name, value, tol, ok, detail):
        rec = {"name": name, "value": None if value is None else float(value), "tolerance": tol, "pass": bool(ok)}
        if detail:
            rec["detail"] = detail
        self.items.append(rec)

    @property
    def passed(self):
        return all(c["pass"] for c in self.items)


# -- commands ------------------------------------------------------------------

def cmd_verify_frame(cfg, args, checks, out):
    schema = {
        "type": "object",
        "properties": {"h": POS_NUM, "h_nested": POS_NUM, "points": POS_INT,
                       "fields": {"type": "array", "items": {"type": "string"}, "minItems": 1}},
        "additionalProperties": False,
    }
    validate(cfg, schema)
    cfg.setdefault("h", 1e-4)
    cfg.setdefault("h_nested", 1e-3)
    cfg.setdefault("points", args.samples or 200)
    fields = None
    if "fields" in cfg:
        try:
            fields = [named_field(s) for s in cfg["fields"]]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    pts = random_s3(cfg["points"], np.random.default_rng(args.seed))
    res = frame_identity_residuals(pts, fields, h=cfg["h"], h_nested=cfg["h_nested"])
    tol = {"bracket": 1e-5, "curl": 1e-6, "dalpha": 1e-5, "orthonormality": 1e-12, "alpha": 1e-12}
    for name, value in res.items():
        key = next(k for k in tol if name.startswith(k))
        checks.le(name, value, tol[key])
    return {}


def cmd_holonomy(cfg, args, checks, out):
    if isinstance(cfg, dict) and "type" in cfg:
        cfg = {"loop": cfg}
    schema = {"type": "object", "properties": {"loop": {"type": "object"}, "dt": POS_NUM},
              "required": ["loop"], "additionalProperties": False}
    validate(cfg, schema)
    cfg.setdefault("dt", 1e-3)
    loop = parse_loop(cfg["loop"], seed=args.seed)
    theta = holonomy(loop, dt=cfg["dt"])
    area = loop_area(loop)
    checks.le("holonomy_area_law", abs(float(wrap_angle(theta - 0.5 * area))), 1e-4)
    if isinstance(loop, Circle):
        cap = np.pi * (1 - np.cos(loop.colatitude))
        checks.le("cap_formula", abs(float(wrap_angle(theta - cap))), 1e-5)
    return {"theta": theta, "unit_area": area}


def _waypoint(rng):
    while True:
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        if abs(v @ DEFAULT_BASE) < 0.9:
            return v


def cmd_lift_diffeo(cfg, args, checks, out):
    schema = {
        "type": "object",
        "properties": {"map": {"type": "object"}, "y0": VEC3, "gauge": {"type": "number"},
                       "samples": POS_INT, "via": VEC3, "lift_steps": POS_INT},
        "required": ["map"],
        "additionalProperties": False,
    }
    validate(cfg, schema)
    f = parse_map(cfg["map"])
    rng = np.random.default_rng(args.seed)
    cfg.setdefault("y0", DEFAULT_BASE.tolist())
    cfg.setdefault("gauge", 0.0)
    cfg.setdefault("samples", args.samples or 20)
    cfg.setdefault("lift_steps", 200)
    if "via" not in cfg:
        cfg["via"] = _waypoint(rng).tolist()
    y0 = np.asarray(cfg["y0"], dtype=float)
    y0 = y0 / np.linalg.norm(y0)
    n = cfg["samples"]
    pts = random_s3(n, rng)
    quantities = {}

    area = area_defect(f, 64)
    ok_area = checks.le("area_defect", area, 1e-5)
    if not ok_area or not f.area_preserving:
        # negative control: measure how path dependence tracks the area change
        via = np.asarray(cfg["via"], dtype=float)
        pts = pts[np.abs(hopf_projection(pts) @ y0) < 0.95]
        defect = path_independence_defect(f, pts, via, y0, cfg["lift_steps"])
        checks.le("path_independence", float(np.max(np.abs(defect))), 1e-6)
        pred = []
        for y in hopf_projection(pts):
            sigma = Concatenation([Geodesic(y0, via), Geodesic(via, y), Geodesic(y, y0)])
            pred.append(0.5 * (loop_area(MappedCurve(f, sigma)) - loop_area(sigma)))
        quantities["path_defect_vs_area_prediction"] = float(np.max(np.abs(wrap_angle(defect - np.array(pred)))))
        return quantities

    try:
        F = Quantomorphism(f, y0, cfg["gauge"], lift_steps=cfg["lift_steps"])
    except GeometryError as exc:
        checks.error("lift", exc)
        return quantities
    checks.le("pullback_defect", pullback_defect(F, points=pts), 1e-4)
    checks.le("volume_defect", volume_defect(F, points=pts), 1e-4)
    rigid = Quantomorphism(f, y0, cfg["gauge"], lift_steps=cfg["lift_steps"], memoize=False, certify=False)
    checks.le("fiber_rigidity", fiber_rigidity_defect(rigid, points=pts[:10], rng=rng), 1e-8)
    checks.le("projection", projection_defect(F, f, points=pts), 1e-6)
    try:
        defect = path_independence_defect(f, pts[:10], np.asarray(cfg["via"]), y0, cfg["lift_steps"])
        checks.le("path_independence", float(np.max(np.abs(defect))), 1e-6)
    except GeometryError as exc:
        checks.error("path_independence", exc)
    if isinstance(f, Rotation):
        ode = Quantomorphism(f, y0, cfg["gauge"], lift_steps=cfg["lift_steps"], isometry_shortcut=False)
        dev, phase = unitary_deviation(ode, f.quaternion, points=pts)
        checks.le("unitary_cross_check", dev, 1e-6)
        quantities["unitary_phase"] = phase
    if out is not None:
        export_samples(F, pts, out / "lift-diffeo_samples.csv")
    return quantities


ALGEBRAS = {"aut1": defect_aut1, "autH": defect_autH, "autXi": defect_autXi, "sdiff": defect_sdiff}


def cmd_lie(cfg, args, checks, out):
    schema = {
        "type": "object",
        "properties": {"field": {"type": "object"}, "algebra": {"enum": sorted(ALGEBRAS)},
                       "samples": POS_INT, "reconstruct": {"type": "boolean"}},
        "required": ["field"],
        "additionalProperties": False,
    }
    validate(cfg, schema)
    cfg.setdefault("algebra", "aut1")
    cfg.setdefault("samples", args.samples or 100)
    cfg.setdefault("reconstruct", False)
    X, generator = parse_field(cfg["field"])
    rng = np.random.default_rng(args.seed)
    try:
        report = ALGEBRAS[cfg["algebra"]](X, cfg["samples"], rng)
    except GeometryError as exc:
        checks.error(cfg["algebra"], exc)
        return {}
    for name, value in report.sup_residuals.items():
        checks.le(name, value, 1e-5)
    if cfg["reconstruct"]:
        try:
            rec = reconstruct_f(X.horizontal_part(), rng=rng)
        except GeometryError as exc:
            checks.error("reconstruct", exc)
            return {}
        checks.le("curl_residual", rec.curl_residual, 1e-4)
        checks.le("path_residual", rec.path_residual, 1e-5)
        if generator is not None:
            p = random_s3(30, rng)
            err = np.max(np.abs(rec(p) - (generator(p) - generator(ONE))))
            checks.le("round_trip", float(err), 1e-5)
    return {}


def cmd_lift_path(cfg, args, checks, out):
    schema = {
        "type": "object",
        "properties": {
            "deformation": {"type": "object"},
            "start": {"type": "object"},
            "start_gauge": {"type": "number"},
            "n": POS_INT,
            "lift_steps": POS_INT,
            "quadrature": {
                "type": "object",
                "properties": {"n_eta": POS_INT, "n_theta1": POS_INT, "n_theta2": POS_INT},
                "additionalProperties": False,
            },
        },
        "required": ["deformation"],
        "additionalProperties": False,
    }
    validate(cfg, schema)
    cfg.setdefault("n", 64)
    cfg.setdefault("start_gauge", 0.0)
    cfg.setdefault("lift_steps", 200)
    q = {"n_eta": 16, "n_theta1": 32, "n_theta2": 32}
    q.update(cfg.get("quadrature", {}))
    cfg["quadrature"] = q
    deformation = parse_deformation(cfg["deformation"])
    f0 = parse_map(cfg["start"]) if "start" in cfg else Identity()
    try:
        start = Quantomorphism(f0, gauge=cfg["start_gauge"], lift_steps=cfg["lift_steps"])
        path = lift_deformation(deformation, start, n=cfg["n"], quad=S3Quadrature.hopf_product(**q),
                                lift_steps=cfg["lift_steps"])
    except GeometryError as exc:
        checks.error("lift", exc)
        if isinstance(exc, errors.ChartExit):
            return {"chart_exit_t": exc.t}
        return {}
    checks.le("horizontality", float(np.max(path.horizontality_residual)), 1e-5)
    checks.le("projection", float(np.max(path.projection_residual)), 1e-5)
    checks.le("theta_continuity", float(np.max(np.abs(np.diff(path.theta)), initial=0.0)), np.pi / 4)
    if isinstance(deformation, RotationFamily):
        u = deformation(1.0).quaternion
        exact = ComposedFiberMap((LeftMultiplication(u), start))
        pts = random_s3(20, np.random.default_rng(args.seed))
        dev = float(np.max(np.linalg.norm(path.end(pts) - exact(pts), axis=-1)))
        checks.le("endpoint_unitary", dev, 1e-5)
    if out is not None:
        path.to_csv(out / "lift-path.csv")
    return {"theta_end": float(path.theta[-1]), "anchor_switches": int(
        sum(not np.allclose(a, b) for a, b in zip(path.anchors[:-1], path.anchors[1:])))}


COMMANDS = {
    "verify-frame": cmd_verify_frame,
    "holonomy": cmd_holonomy,
    "lift-diffeo": cmd_lift_diffeo,
    "lie": cmd_lie,
    "lift-path": cmd_lift_path,
}


# -- plumbing ------------------------------------------------------------------

def _global_options(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="random seed (default 0)")
    parser.add_argument("--samples", type=int, default=default(None), help="override sample counts")
    parser.add_argument("--tol-scale", type=float, default=default(1.0), help="multiply all tolerances")
    parser.add_argument("--out", type=Path, default=default(None), help="directory for report and CSV files")


def build_parser():
    parser = argparse.ArgumentParser(prog="hopfcontact", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _global_options(p, suppress=True)
        p.add_argument("config", nargs="?", help="JSON config file ('-' for stdin; default {})")
    p = sub.add_parser("report-merge")
    _global_options(p, suppress=True)
    p.add_argument("reports", nargs="+", help="report JSON files")
    return parser


def _load_config(path):
    if path is None:
        return {}
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None


def _emit(report, args):
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{report['command']}_report.json").write_text(text + "\n")


def _merge(args):
    reports, merged = [], []
    for path in args.reports:
        try:
            rep = json.loads(Path(path).read_text())
            cmd = rep["command"]
            checks = rep["checks"]
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot merge {path}: {exc}") from None
        reports.append(rep)
        merged.extend(dict(c, name=f"{cmd}:{c['name']}") for c in checks)
    return {"command": "report-merge", "config": {"reports": list(args.reports)}, "checks": merged,
            "pass": all(c["pass"] for c in merged), "seed": args.seed, "reports": reports}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    started = time.perf_counter()
    try:
        if args.tol_scale <= 0:
            raise ConfigError("--tol-scale must be positive")
        if args.samples is not None and args.samples < 1:
            raise ConfigError("--samples must be positive")
        if args.command == "report-merge":
            report = _merge(args)
        else:
            cfg = _load_config(args.config)
            if not isinstance(cfg, dict):
                raise ConfigError("config must be a JSON object")
            if args.out is not None:
                args.out.mkdir(parents=True, exist_ok=True)
            checks = Checks(args.tol_scale)
            quantities = COMMANDS[args.command](cfg, args, checks, args.out)
            report = {"command": args.command, "config": cfg, "checks": checks.items,
                      "pass": checks.passed, "seed": args.seed}
            if quantities:
                report["quantities"] = quantities
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report["wall_time"] = time.perf_counter() - started
    _emit(report, args)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
