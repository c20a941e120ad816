"""Command-line front end.

    python -m singular_elliptic eval --kind q1 --pole 1,1,1 --point 2,2,2
    python -m singular_elliptic grid --x 0.5,1.5,11 --y 0.5,1.5,11 --z 0.5,1.5,11 -o field.csv
    python -m singular_elliptic verify --suites gamma,gauss
    python -m singular_elliptic scan --direction 1,1,1 --radii 1e-1,1e-2,1e-3,1e-4

Exit codes: 0 success, 1 usage or domain error, 2 non-convergence,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DomainError, NonConvergent
from .fundamental_solutions import (
    NormalizationConstants,
    Pole,
    SingularParams,
    SolutionKind,
    evaluate,
    geometry,
    singular_limit_constant,
)
from .operator_verify import FDConfig
from .special_functions import SeriesControl
from .verification import SUITES, run_suites

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONVERGENT = 2
EXIT_VERIFY_FAILED = 3

CONFIG_KEYS = {
    "alpha", "beta", "gamma", "pole", "abs_tol", "rel_tol", "max_terms", "format",
    "fd_h", "richardson", *(f"k{i}" for i in range(1, 9)),
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: SingularParams
    pole: Pole
    constants: NormalizationConstants
    series: SeriesControl
    fd: FDConfig
    output_format: str = "json"
    timestamp: bool = True


@dataclass(frozen=True)
class AxisSpec:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if not self.lo > 0:
            raise UsageError(f"grid minimum must be positive, got {self.lo}")
        if self.hi < self.lo:
            raise UsageError(f"grid maximum {self.hi} is below minimum {self.lo}")
        if self.count < 1:
            raise UsageError(f"grid count must be at least 1, got {self.count}")

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class GridSpec:
    x: AxisSpec
    y: AxisSpec
    z: AxisSpec
    exclusion_radius: float = 0.05

    def __post_init__(self):
        if self.exclusion_radius < 0:
            raise UsageError("exclusion radius must be nonnegative")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _triple(text: str, what: str) -> tuple[float, float, float]:
    try:
        parts = [float(v) for v in str(text).split(",")]
    except ValueError:
        raise UsageError(f"{what} must be three comma-separated numbers, got {text!r}") from None
    if len(parts) != 3:
        raise UsageError(f"{what} must be three comma-separated numbers, got {text!r}")
    return tuple(parts)


def _axis(text: str, name: str) -> AxisSpec:
    parts = str(text).split(",")
    if len(parts) != 3:
        raise UsageError(f"--{name} expects min,max,count, got {text!r}")
    try:
        return AxisSpec(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        raise UsageError(f"--{name} expects min,max,count, got {text!r}") from None


def load_config_file(path: str) -> dict:
    """Flat JSON object; unknown keys are rejected."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a single JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides built-in defaults."""
    values = {
        "alpha": 0.25, "beta": 0.25, "gamma": 0.25, "pole": (1.0, 1.0, 1.0),
        "abs_tol": 1e-14, "rel_tol": 1e-12, "max_terms": 500, "format": "json",
        "fd_h": 1e-4, "richardson": True, **{f"k{i}": 1.0 for i in range(1, 9)},
    }
    if args.config:
        values.update(load_config_file(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    pole = values["pole"]
    pole = _triple(pole, "pole") if isinstance(pole, str) else tuple(float(v) for v in pole)
    if values["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {values['format']!r}")
    try:
        return RunConfig(
            params=SingularParams(float(values["alpha"]), float(values["beta"]), float(values["gamma"])),
            pole=Pole(*pole),
            constants=NormalizationConstants(tuple(float(values[f"k{i}"]) for i in range(1, 9))),
            series=SeriesControl(float(values["abs_tol"]), float(values["rel_tol"]), int(values["max_terms"])),
            fd=FDConfig(float(values["fd_h"]), bool(values["richardson"])),
            output_format=values["format"],
            timestamp=not args.no_timestamp,
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _kind(text: str) -> SolutionKind:
    try:
        return SolutionKind.parse(text)
    except (KeyError, ValueError):
        raise UsageError(f"unknown kind {text!r}; expected q1..q8") from None


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _num(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, (float, int, np.floating)) and not isinstance(v, bool) else v
                    for v in row])
    return buf.getvalue()


def _json_text(obj, cfg: RunConfig) -> str:
    if cfg.timestamp and isinstance(obj, dict):
        obj = {**obj, "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_eval(cfg: RunConfig, kind: SolutionKind, point) -> tuple[str, int]:
    res = evaluate(kind, cfg.params, point, cfg.pole, cfg.constants.of(kind), cfg.series)
    record = {
        "kind": kind.name.lower(),
        "point": list(point),
        "pole": list(cfg.pole.as_tuple()),
        "value": res.value,
        "error_estimate": res.error_estimate,
        "route": res.route,
        "terms_used": res.terms_used,
        "converged": res.converged,
    }
    code = EXIT_OK if res.converged else EXIT_NONCONVERGENT
    if cfg.output_format == "csv":
        header = ["kind", "x", "y", "z", "x0", "y0", "z0", "value", "error_estimate", "route",
                  "terms_used", "converged"]
        row = [record["kind"], *point, *cfg.pole.as_tuple(), res.value, res.error_estimate, res.route,
               str(res.terms_used), str(res.converged).lower()]
        return _csv_text(header, [row]), code
    return _json_text(record, cfg), code


def _grid_point(job):
    kind, sp, pole, k, ctrl, p = job
    try:
        res = evaluate(kind, sp, p, pole, k, ctrl)
    except NonConvergent as exc:
        partial = exc.partial
        err = partial.error_estimate if partial is not None else math.inf
        return ("nonconvergent", err, "failed")
    return (res.value, res.error_estimate, res.route if res.converged else res.route + ":unconverged")


def grid_rows(cfg: RunConfig, kind: SolutionKind, spec: GridSpec, workers: int = 1) -> list[list]:
    """Rows x, y, z, value, error_estimate, route in x-major, z-fastest order."""
    pole = np.array(cfg.pole.as_tuple())
    pts, excluded = [], []
    for x in spec.x.points():
        for y in spec.y.points():
            for z in spec.z.points():
                p = (float(x), float(y), float(z))
                d = float(np.linalg.norm(np.array(p) - pole))
                pts.append(p)
                excluded.append(d == 0.0 or d <= spec.exclusion_radius)
    jobs = [(kind, cfg.params, cfg.pole, cfg.constants.of(kind), cfg.series, p)
            for p, ex in zip(pts, excluded) if not ex]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = iter(list(pool.map(_grid_point, jobs, chunksize=16)))
    else:
        results = iter([_grid_point(j) for j in jobs])
    rows = []
    for p, ex in zip(pts, excluded):
        if ex:
            rows.append([*p, "excluded", "", "excluded"])
        else:
            rows.append([*p, *next(results)])
    return rows


def cmd_grid(cfg: RunConfig, kind: SolutionKind, spec: GridSpec, workers: int = 1) -> tuple[str, int]:
    rows = grid_rows(cfg, kind, spec, workers)
    code = EXIT_NONCONVERGENT if any(r[3] == "nonconvergent" for r in rows) else EXIT_OK
    header = ["x", "y", "z", "value", "error_estimate", "route"]
    if cfg.output_format == "csv":
        return _csv_text(header, rows), code
    doc = {
        "kind": kind.name.lower(),
        "params": list(cfg.params.as_tuple()),
        "pole": list(cfg.pole.as_tuple()),
        "exclusion_radius": spec.exclusion_radius,
        "rows": [dict(zip(header, r)) for r in rows],
    }
    return _json_text(doc, cfg), code


def cmd_verify(cfg: RunConfig, suites: list[str]) -> tuple[str, int]:
    records = run_suites(suites, cfg.params, fd=cfg.fd, ctrl=cfg.series)
    ok = all(r.passed for r in records)
    code = EXIT_OK if ok else EXIT_VERIFY_FAILED
    if cfg.output_format == "csv":
        rows = [[r.suite, r.case, r.measured, r.tolerance, str(r.passed).lower()] for r in records]
        return _csv_text(["suite", "case", "measured", "tolerance", "pass"], rows), code
    doc = {"passed": ok, "records": [r.to_dict() for r in records]}
    return _json_text(doc, cfg), code


def scan_rows(cfg: RunConfig, direction, radii) -> list[list[float]]:
    d = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise UsageError("scan direction must be nonzero")
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        raise UsageError("radii must be positive and strictly decreasing")
    d = d / norm
    sp = cfg.params
    k1 = cfg.constants.of(SolutionKind.Q1)
    target = singular_limit_constant(sp)
    pole = np.array(cfg.pole.as_tuple())
    rows = []
    for r in radii:
        pt = tuple(float(v) for v in pole + r * d)
        q1 = evaluate(SolutionKind.Q1, sp, pt, cfg.pole, k1, cfg.series).value
        fr = geometry(pt, cfg.pole)
        a, b, g = sp.as_tuple()
        comp = math.sqrt(fr.r2) * fr.r1_2 ** a * fr.r2_2 ** b * fr.r3_2 ** g * q1 / k1
        rows.append([r, q1, comp, target, abs(comp - target) / target])
    return rows


def cmd_singularity_scan(cfg: RunConfig, direction, radii) -> tuple[str, int]:
    rows = scan_rows(cfg, direction, radii)
    header = ["r", "q1", "compensated", "limit_constant", "relative_gap"]
    if cfg.output_format == "csv":
        return _csv_text(header, rows), EXIT_OK
    doc = {
        "params": list(cfg.params.as_tuple()),
        "pole": list(cfg.pole.as_tuple()),
        "direction": list(direction),
        "rows": [dict(zip(header, r)) for r in rows],
    }
    return _json_text(doc, cfg), EXIT_OK


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--pole", help="x0,y0,z0")
    for i in range(1, 9):
        g.add_argument(f"--k{i}", type=float, help=f"normalisation constant of q{i}")
    g.add_argument("--abs-tol", dest="abs_tol", type=float)
    g.add_argument("--rel-tol", dest="rel_tol", type=float)
    g.add_argument("--max-terms", dest="max_terms", type=int)
    g.add_argument("--fd-h", dest="fd_h", type=float, help="relative finite-difference step")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--config", help="flat JSON file of option values")
    g.add_argument("--no-timestamp", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = _Parser(prog="singular-elliptic",
                 description="Fundamental solutions of an elliptic operator with three singular coefficients.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pe = sub.add_parser("eval", parents=[common], help="evaluate one fundamental solution at a point")
    pe.add_argument("--kind", default="q1")
    pe.add_argument("--point", required=True, help="x,y,z")

    pg = sub.add_parser("grid", parents=[common], help="evaluate on a tensor grid")
    pg.add_argument("--kind", default="q1")
    for ax in "xyz":
        pg.add_argument(f"--{ax}", required=True, help="min,max,count")
    pg.add_argument("--exclusion-radius", type=float, default=0.05)
    pg.add_argument("--workers", type=int, default=1)
    pg.add_argument("-o", "--output", help="output file (default stdout)")

    pv = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    pv.add_argument("--suites", default=",".join(SUITES), help="comma-separated subset of " + ",".join(SUITES))

    ps = sub.add_parser("scan", parents=[common], help="approach the pole along a ray")
    ps.add_argument("--direction", default="1,1,1")
    ps.add_argument("--radii", default="1e-1,1e-2,1e-3,1e-4")
    return ap


def _run(args) -> tuple[str, int]:
    cfg = build_config(args)
    if args.command == "eval":
        return cmd_eval(cfg, _kind(args.kind), _triple(args.point, "--point"))
    if args.command == "grid":
        spec = GridSpec(_axis(args.x, "x"), _axis(args.y, "y"), _axis(args.z, "z"), args.exclusion_radius)
        text, code = cmd_grid(cfg, _kind(args.kind), spec, max(1, args.workers))
        if args.output:
            try:
                Path(args.output).write_text(text, encoding="utf-8", newline="\n")
            except OSError as exc:
                raise UsageError(f"cannot write {args.output}: {exc.strerror}") from None
            return "", code
        return text, code
    if args.command == "verify":
        suites = [s.strip() for s in args.suites.split(",") if s.strip()]
        unknown = [s for s in suites if s not in SUITES]
        if unknown:
            raise UsageError(f"unknown suites: {', '.join(unknown)}")
        return cmd_verify(cfg, suites)
    try:
        radii = [float(v) for v in args.radii.split(",")]
    except ValueError:
        raise UsageError(f"--radii must be comma-separated numbers, got {args.radii!r}") from None
    return cmd_singularity_scan(cfg, _triple(args.direction, "--direction"), radii)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = _run(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergent as exc:
        print(f"error: not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
