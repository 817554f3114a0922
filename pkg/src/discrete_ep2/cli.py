"""Command-line interface: ``ep2 {solve,conditions,enumerate,sweep,continuum}``.

Every subcommand reads one JSON config (``--config``) and writes a JSON or
CSV report to ``--out`` (default stdout).  Exit codes: 0 success, 1 config or
hypothesis violation, 2 solver failure.

Config keys may sit at the top level or inside ``problem`` / ``boundary``
sections::

    {"problem": {"a": 1, "b": 0, "c": -1, "N": 4},
     "boundary": {"dirichlet": [1, 1]},
     "method": "auto", "solver": {"tol_residual": 1e-12}}

Robin data: ``"robin": {"f0": {"terms": [[p, e], ...], "monotonicity": ...},
"fN": ...}`` (a bare number is a constant function).  Continuous problems use
``A, B, C`` plus ``y0, y1`` (or ``dirichlet``) and ``Ns``.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, fields
import io
import itertools
import json
import logging
import math
import os
import sys

import numpy as np

from . import analysis, continuum, solvers
from .model import Dirichlet, DomainError, Parameters, Robin, RobinFunction, residual_inf

__all__ = ["JobConfig", "ConfigError", "load_config", "parse_config", "applicable_conditions",
           "run_solve", "run_conditions", "run_enumerate", "run_sweep", "run_continuum",
           "main", "SWEEP_KEYS", "SWEEP_MAX_POINTS"]

log = logging.getLogger("discrete_ep2")

SWEEP_KEYS = ("a", "b", "c", "D0", "DN")
SWEEP_MAX_POINTS = 10_000
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass
class JobConfig:
    params: Parameters = None
    boundary: object = None
    continuous: continuum.ContinuousParameters = None
    ns: list = field(default_factory=list)
    method: str = "auto"
    solver: solvers.SolverConfig = field(default_factory=solvers.SolverConfig)
    scan: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output_path: str = None
    output_format: str = None


# -- config -------------------------------------------------------------------

def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    return parse_config(data)


def _flatten(data):
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    flat = {k: v for k, v in data.items() if k not in ("problem", "boundary")}
    for section in ("problem", "boundary"):
        sub = data.get(section, {})
        if not isinstance(sub, dict):
            raise ConfigError(f"section {section!r} must be an object")
        for key, value in sub.items():
            if key in flat:
                raise ConfigError(f"key {key!r} given twice")
            flat[key] = value
    return flat


def _boundary(flat):
    if "dirichlet" in flat and "robin" in flat:
        raise ConfigError("give either dirichlet or robin data, not both")
    if "robin" in flat:
        spec = flat["robin"]
        try:
            return Robin(RobinFunction.from_dict(spec["f0"]), RobinFunction.from_dict(spec["fN"]))
        except KeyError as err:
            raise ConfigError(f"robin section needs key {err.args[0]!r}") from err
    if "dirichlet" in flat:
        d = flat["dirichlet"]
        if isinstance(d, dict):
            d = [d.get("D0"), d.get("DN")]
        if len(d) != 2:
            raise ConfigError("dirichlet needs exactly two values [D0, DN]")
        return Dirichlet(float(d[0]), float(d[1]))
    return None


def parse_config(data):
    """Build a :class:`JobConfig` from a parsed JSON object."""
    flat = _flatten(data)
    job = JobConfig()
    discrete = [k for k in ("a", "b", "c", "N") if k in flat]
    cont = [k for k in ("A", "B", "C") if k in flat]
    if discrete and cont:
        raise ConfigError("give either discrete (a, b, c, N) or continuous (A, B, C) parameters")
    try:
        if cont:
            if len(cont) != 3:
                raise ConfigError("continuous problem needs A, B and C")
            y0, y1 = flat.get("y0", 0.0), flat.get("y1", 0.0)
            if "dirichlet" in flat:
                y0, y1 = flat["dirichlet"]
            job.continuous = continuum.ContinuousParameters(
                flat["A"], flat["B"], flat["C"], y0, y1)
            job.ns = [int(n) for n in flat.get("Ns", [])]
            if "N" in flat:
                job.ns = job.ns or [int(flat["N"])]
        else:
            if len(discrete) != 4:
                missing = [k for k in ("a", "b", "c", "N") if k not in flat]
                raise ConfigError(f"missing problem keys: {', '.join(missing)}")
            if float(flat["N"]) != int(flat["N"]):
                raise ConfigError("N must be an integer")
            job.params = Parameters(flat["a"], flat["b"], flat["c"], int(flat["N"]))
            job.boundary = _boundary(flat)
        job.method = flat.get("method", "auto")
        if job.method != "auto" and job.method not in solvers.METHODS:
            raise ConfigError(f"unknown method {job.method!r}")
        overrides = flat.get("solver", {})
        known = {f.name for f in fields(solvers.SolverConfig)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown solver keys: {', '.join(sorted(unknown))}")
        job.solver = solvers.SolverConfig(**overrides)
        job.scan = dict(flat.get("scan", {}))
        job.sweep = dict(flat.get("sweep", {}))
        out = flat.get("output", {})
        job.output_path = out.get("path")
        job.output_format = out.get("format")
    except (TypeError, KeyError) as err:
        raise ConfigError(f"bad config value: {err}") from err
    return job


def _require_discrete(job, need_boundary=True):
    if job.params is None:
        raise ConfigError("this command needs discrete parameters a, b, c, N")
    if need_boundary and job.boundary is None:
        raise ConfigError("boundary data missing: give dirichlet or robin")


# -- serialization --------------------------------------------------------------

def _num(v):
    """17 significant digits: lossless for doubles."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return format(float(v), ".17g")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _dump_json(obj):
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) if isinstance(v, (float, int, np.number, np.bool_))
                         else ("" if v is None else v) for v in row])
    return buf.getvalue()


def solution_csv(u):
    return _csv_text(["x", "u"], [(x, float(v)) for x, v in enumerate(u)])


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# -- commands -------------------------------------------------------------------

def applicable_conditions(params, bc):
    """Every condition checker whose regime matches, as ConditionReports."""
    out = []
    kind = bc.kind if bc is not None else "dirichlet"
    checks = []
    if params.a > 0 > params.c:
        mono = True
        if kind == "robin":
            mono = (bc.f0.monotonicity == "nondecreasing"
                    and bc.fn.monotonicity == "nonincreasing")
        checks.append(lambda: analysis.uniqueness_condition(params, kind, mono))
    if params.a < 0 < params.b and params.c < 0:
        checks.append(lambda: analysis.beta_cond_check(params))
    if bc is not None and kind == "dirichlet" and bc.homogeneous:
        checks.append(lambda: analysis.homogeneous_regime(params))
    if params.a > 0 and params.c > 0 and bc is not None:
        checks.append(lambda: analysis.box_small_c_condition(params, bc))
    if kind == "robin" and params.a < 0 < params.c:
        checks.append(lambda: analysis.rob_rep_growth(params, bc))
    for check in checks:
        try:
            out.append(check())
        except DomainError as err:
            log.info("condition skipped: %s", err)
    return out


def run_solve(job):
    """Returns ``(exit code, report dict or None, solution or None, message)``."""
    _require_discrete(job)
    params, bc = job.params, job.boundary
    conditions = [r.to_dict() for r in applicable_conditions(params, bc)]
    try:
        rep = solvers.solve(params, bc, job.method, job.solver)
    except solvers.SolverError as err:
        partial = err.report.to_dict() if err.report is not None else None
        if partial is not None:
            partial["conditions"] = conditions
        return EXIT_SOLVER, partial, None, str(err)
    out = rep.to_dict()
    out["conditions"] = conditions
    if rep.info.get("complete") is False:
        msg = (f"small_c_homotopy stopped at c = {rep.info['c_max']:.6g} "
               f"of requested {rep.info['c_requested']:.6g}")
        return EXIT_SOLVER, out, rep.solution, msg
    return EXIT_OK, out, rep.solution, ""


def run_conditions(job):
    _require_discrete(job, need_boundary=False)
    return [r.to_dict() for r in applicable_conditions(job.params, job.boundary)]


def run_enumerate(job, seed=None):
    _require_discrete(job)
    scan = dict(job.scan)
    unknown = set(scan) - {"t_min", "t_max", "resolution", "offset", "accept_tol"}
    if unknown:
        raise ConfigError(f"unknown scan keys: {', '.join(sorted(unknown))}")
    if seed is not None:
        scan["offset"] = float(np.random.default_rng(seed).random())
    sols, info = analysis.enumerate_solutions(job.params, job.boundary, full_output=True, **scan)
    listed = [{"solution": u, "residual_inf": residual_inf(job.params, job.boundary, u)}
              for u in sols]
    return {"count": len(sols), "solutions": listed, "scan": info}


def _axis(spec):
    if isinstance(spec, dict):
        try:
            return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
        except KeyError as err:
            raise ConfigError(f"sweep axis needs start, stop, num (missing {err.args[0]!r})") from err
    return np.asarray(spec, dtype=float).ravel()


def sweep_grid(job):
    """Cartesian grid over at most two swept keys, in row-major index order."""
    spec = job.sweep
    if not spec:
        raise ConfigError("sweep section missing")
    if len(spec) > 2:
        raise ConfigError("sweep over at most 2 parameters")
    bad = set(spec) - set(SWEEP_KEYS)
    if bad:
        raise ConfigError(f"cannot sweep {', '.join(sorted(bad))}; choose from {SWEEP_KEYS}")
    if any(k in spec for k in ("D0", "DN")) and getattr(job.boundary, "kind", None) != "dirichlet":
        raise ConfigError("sweeping D0/DN needs Dirichlet data")
    keys = list(spec)
    axes = [_axis(spec[k]) for k in keys]
    total = math.prod(len(ax) for ax in axes)
    if total == 0:
        raise ConfigError("sweep grid is empty")
    if total > SWEEP_MAX_POINTS:
        raise ConfigError(f"sweep grid has {total} points; limit is {SWEEP_MAX_POINTS}")
    return keys, [dict(zip(keys, map(float, vals))) for vals in itertools.product(*axes)]


def _sweep_point(args):
    params, bc, method, cfg, point = args
    changes = {k: v for k, v in point.items() if k in ("a", "b", "c")}
    row = {"success": False, "residual_inf": math.nan, "u_min": math.nan, "u_max": math.nan,
           "iterations": 0, "method": "", "message": ""}
    try:
        params = params.with_(**changes)
        if "D0" in point or "DN" in point:
            bc = Dirichlet(point.get("D0", bc.d0), point.get("DN", bc.dn))
        rep = solvers.solve(params, bc, method, cfg)
        ok = rep.info.get("complete", True)
        row.update(success=bool(ok), residual_inf=rep.residual_inf,
                   u_min=float(np.min(rep.solution)), u_max=float(np.max(rep.solution)),
                   iterations=rep.iterations, method=rep.method,
                   message="" if ok else "incomplete continuation")
    except (solvers.SolverError, ValueError) as err:
        row["message"] = str(err)
        report = getattr(err, "report", None)
        if report is not None:
            row.update(method=report.method, iterations=report.iterations)
    return row


def run_sweep(job, workers=None):
    """Solve every grid point; rows come back in grid-index order."""
    _require_discrete(job)
    keys, points = sweep_grid(job)
    tasks = [(job.params, job.boundary, job.method, job.solver, p) for p in points]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    if workers == 1 or len(tasks) == 1:
        rows = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_sweep_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    table = []
    for index, (point, row) in enumerate(zip(points, rows)):
        table.append({"index": index, **point, **row})
    return keys, table


def run_continuum(job):
    """Returns ``(exit code, result dict, message)``; partial table on failure."""
    cp = job.continuous
    if cp is None:
        raise ConfigError("continuum needs continuous parameters A, B, C")
    if len(job.ns) < 1:
        raise ConfigError("continuum needs a list Ns of grid sizes")
    code, message = EXIT_OK, ""
    try:
        table = continuum.convergence_study(cp, job.ns, job.solver, job.method)
    except solvers.SolverError as err:
        table, code, message = err.report, EXIT_SOLVER, str(err)
    rows = []
    for n, diff, ratio in table.rows():
        rows.append({"N": n, "sup_difference": diff, "ratio": ratio})
    if not rows and code == EXIT_OK:
        rows = [{"N": n, "sup_difference": math.nan, "ratio": math.nan} for n in job.ns]
    limits = {}
    if cp.A > 0 > cp.C:
        limits["limiting_uniqueness_margin"] = continuum.limiting_uniqueness_margin(cp)
        for row in rows:
            row["uniqueness_margin_N3"] = continuum.scaled_uniqueness_margin(cp, row["N"])
    if cp.A < 0 < cp.B and cp.C < 0:
        limits["beta_cond_N0"] = continuum.beta_cond_failure_threshold(cp)
        for row in rows:
            params, _ = continuum.discretize(cp, row["N"])
            row["beta_cond_margin"] = analysis.beta_cond_check(params).margin
    return code, {"table": rows, **limits}, message


# -- entry point -----------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="ep2", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["solve", "conditions", "enumerate", "sweep", "continuum"])
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=["json", "csv"], help="report format")
    p.add_argument("--workers", type=int, help="sweep worker processes (default: all cores)")
    p.add_argument("--tol", type=float, help="override solver tol_residual")
    p.add_argument("--seed", type=int, help="randomize the enumerate scan grid offset")
    return p


def _setup_logging():
    name = os.environ.get("EP2_LOG_LEVEL", "error").lower()
    if name not in LOG_LEVELS:
        raise ConfigError(f"EP2_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
    logging.basicConfig(level=LOG_LEVELS[name], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        _setup_logging()
        job = load_config(args.config)
        if args.tol is not None:
            job.solver = solvers.SolverConfig(**{**job.solver.__dict__, "tol_residual": args.tol})
        fmt = args.format or job.output_format
        out = args.out or job.output_path
        return _dispatch(args, job, fmt, out)
    except (ConfigError, solvers.HypothesisError, DomainError, ValueError) as err:
        return _fail(EXIT_CONFIG, str(err))


def _dispatch(args, job, fmt, out):
    cmd = args.command
    if cmd == "solve":
        code, report, u, message = run_solve(job)
        if fmt == "csv":
            if u is not None:
                _emit(solution_csv(u), out)
        elif report is not None:
            _emit(_dump_json(report), out)
        return _fail(code, message) if code else code

    if cmd == "conditions":
        reports = run_conditions(job)
        if fmt == "csv":
            rows = [(r["condition_id"], r["holds"], r["margin"], json.dumps(_jsonable(r["details"])))
                    for r in reports]
            _emit(_csv_text(["condition_id", "holds", "margin", "details"], rows), out)
        else:
            _emit(_dump_json(reports), out)
        return EXIT_OK

    if cmd == "enumerate":
        if job.params is not None and job.params.n > analysis.ENUMERATION_MAX_N:
            raise ConfigError(
                f"enumeration budget: N = {job.params.n} exceeds {analysis.ENUMERATION_MAX_N}")
        result = run_enumerate(job, args.seed)
        if fmt == "csv":
            n = job.params.n
            rows = [(k, s["residual_inf"], *s["solution"]) for k, s in enumerate(result["solutions"])]
            _emit(_csv_text(["k", "residual_inf"] + [f"u{x}" for x in range(n + 1)], rows), out)
        else:
            _emit(_dump_json(result), out)
        return EXIT_OK

    if cmd == "sweep":
        keys, table = run_sweep(job, args.workers)
        if fmt == "json":
            _emit(_dump_json(table), out)
        else:
            header = ["index", *keys, "success", "residual_inf", "u_min", "u_max",
                      "iterations", "method", "message"]
            _emit(_csv_text(header, [[row[h] for h in header] for row in table]), out)
        return EXIT_OK

    code, result, message = run_continuum(job)
    if fmt == "json":
        _emit(_dump_json(result), out)
    else:
        header = list(result["table"][0]) if result["table"] else ["N", "sup_difference", "ratio"]
        text = _csv_text(header, [[row.get(h) for h in header] for row in result["table"]])
        for key in ("limiting_uniqueness_margin", "beta_cond_N0"):
            if key in result:
                text += f"# {key},{_num(result[key])}\n"
        _emit(text, out)
    return _fail(code, message) if code else code
