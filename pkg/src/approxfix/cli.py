"""Command line front end: ``approxfix run <config>`` and ``approxfix list``.

Scenario files are INI files.  Values are parsed as JSON where possible
(lists, numbers, objects) and kept as strings otherwise.  See
``docs/config.md`` for the schema and defaults.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import registry
from .afp import (DEFAULT_LEVELS, SELF_MAP_TOL, WEAK_SLACK, SelfMap, audit_self_map, chain_report,
                  extract_fixed_point, orbit_hull_chain, run_afp, weak_decay_violations)
from .errors import ApproxFixError, ConfigInvalid
from .ode import (OdeProblem, apriori_bound, apriori_bound_inverse, audit_growth, osgood_check,
                  solve_limiting_weak, verify_lp_estimates)
from .seminorms import LinearFunctional, audit_admissible, build_admissible, coordinate_functionals, default_functionals
from .sets import DEFAULT_MARGIN, DEFAULT_NET_CAP, ConvexBody

OUT_ENV = "APPROXFIX_OUT"
KINDS = ("afp_map", "ode", "orbit_chain")
BOUND_AGREEMENT = 1e-8

log = logging.getLogger("approxfix")


class Config:
    """Typed access to an INI scenario with line numbers for error messages."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.is_file():
            raise ConfigInvalid(0, f"config file {self.path} not found")
        self.text = self.path.read_text()
        self.parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
        try:
            self.parser.read_string(self.text, source=str(self.path))
        except configparser.Error as err:
            raise ConfigInvalid(getattr(err, "lineno", 0), str(err).splitlines()[0]) from None

    def line_of(self, section, key=None):
        current = None
        for no, raw in enumerate(self.text.splitlines(), 1):
            line = raw.strip()
            m = re.match(r"\[(.+)\]", line)
            if m:
                current = m.group(1).strip()
                if key is None and current == section:
                    return no
                continue
            if key is not None and current == section and re.match(rf"{re.escape(key)}\s*[=:]", line):
                return no
        return 0

    def fail(self, section, key, reason):
        raise ConfigInvalid(self.line_of(section, key), f"[{section}] {key}: {reason}")

    def has(self, section, key=None):
        if not self.parser.has_section(section):
            return False
        return key is None or self.parser.has_option(section, key)

    def get(self, section, key, default=None, cast=None):
        if not self.has(section, key):
            if default is ...:
                if not self.parser.has_section(section):
                    raise ConfigInvalid(0, f"missing section [{section}]")
                self.fail(section, key, "required key missing")
            return default
        raw = self.parser.get(section, key)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw.strip()
        if cast is not None:
            try:
                value = cast(value)
            except (TypeError, ValueError) as err:
                self.fail(section, key, f"invalid value {raw!r} ({err})")
        return value


def _positive_int(v):
    v = int(v)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def _positive(v):
    v = float(v)
    if not v > 0:
        raise ValueError("must be positive")
    return v


def _matrix(v):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("expected a nonempty list of vectors")
    return arr


def _vector(v):
    return np.atleast_1d(np.asarray(v, dtype=float))


def _levels(v):
    levels = [int(n) for n in v]
    if not levels or levels[0] < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be positive and strictly increasing")
    return levels


# scenario pieces -----------------------------------------------------------

def read_body(cfg):
    if cfg.has("body", "generators"):
        return ConvexBody(cfg.get("body", "generators", ..., _matrix))
    if cfg.has("body", "box_lower"):
        lo = cfg.get("body", "box_lower", ..., _vector)
        hi = cfg.get("body", "box_upper", ..., _vector)
        try:
            return ConvexBody.box(lo, hi)
        except ValueError as err:
            cfg.fail("body", "box_upper", str(err))
    raise ConfigInvalid(cfg.line_of("body"), "[body] needs generators or box_lower/box_upper")


def read_functionals(cfg, section, d, seed):
    labels = cfg.get(section, "labels", None)
    if cfg.has(section, "functionals"):
        mat = cfg.get(section, "functionals", ..., _matrix)
        if mat.shape[1] != d:
            cfg.fail(section, "functionals", f"vectors must have dimension {d}")
        labels = labels or [f"x{i + 1}" for i in range(len(mat))]
        try:
            return [LinearFunctional(row, str(lab)) for row, lab in zip(mat, labels)]
        except ValueError as err:
            cfg.fail(section, "functionals", str(err))
    count = cfg.get(section, "count", None, _positive_int)
    return default_functionals(d, count, seed)


def read_map(cfg, d):
    name = cfg.get("map", "name", ..., str)
    params = cfg.get("map", "params", {}, dict)
    power = cfg.get("map", "iterate_power", None, _positive_int)
    try:
        fn = registry.build_map(name, params, d)
    except KeyError as err:
        cfg.fail("map", "name", err.args[0])
    except (TypeError, ValueError) as err:
        cfg.fail("map", "params", str(err))
    return SelfMap(fn, name, power)


def read_problem(cfg):
    u0 = cfg.get("ode", "u0", ..., _vector)
    name = cfg.get("ode", "field", ..., str)
    params = cfg.get("ode", "params", {}, dict)
    try:
        f, alpha, phi = registry.build_field(name, params, u0.size)
    except KeyError as err:
        cfg.fail("ode", "field", err.args[0])
    except (TypeError, ValueError) as err:
        cfg.fail("ode", "params", str(err))
    T = cfg.get("ode", "T", 1.0, _positive)
    h = cfg.get("ode", "h", T * 1e-3, _positive)
    p = cfg.get("ode", "p", 2.0, float)
    try:
        return OdeProblem(f, alpha, phi, u0, T, p, h, name)
    except ValueError as err:
        cfg.fail("ode", "p", str(err))


# runners --------------------------------------------------------------------

class Report:
    def __init__(self):
        self.audits = {}
        self.lines = []

    def audit(self, name, ok):
        self.audits[name] = bool(ok)
        self.lines.append(f"  [{'PASS' if ok else 'FAIL'}] {name}")

    def info(self, text):
        self.lines.append(f"  {text}")

    @property
    def ok(self):
        return all(self.audits.values())


def _afp_scenario(cfg, out, seed, audit_only, report):
    body = read_body(cfg)
    funcs = read_functionals(cfg, "seminorm", body.dimension, seed)
    try:
        rho = build_admissible(funcs, body)
    except ApproxFixError as err:
        raise ConfigInvalid(cfg.line_of("seminorm"), str(err)) from None
    f = read_map(cfg, body.dimension)
    checks = audit_admissible(rho, body, seed=seed)
    for key, ok in checks.items():
        report.audit(f"seminorm {key}", ok)
    worst = audit_self_map(f, body, seed=seed)
    report.audit(f"self-map audit (max fit residual {worst:.1e})", worst < SELF_MAP_TOL)
    if audit_only:
        return
    levels = cfg.get("afp", "levels", list(DEFAULT_LEVELS), _levels)
    trace = run_afp(
        body, rho, f, levels,
        margin=cfg.get("afp", "margin", DEFAULT_MARGIN, float),
        net_cap=cfg.get("afp", "net_cap", DEFAULT_NET_CAP, _positive_int),
        tol=cfg.get("afp", "tol", None, _positive),
        budget=cfg.get("afp", "budget", 50_000, _positive_int),
        starts=cfg.get("afp", "starts", 8, _positive_int),
        seed=seed,
    )
    trace.to_csv(out / "trace.csv")
    trace.to_json(out / "trace.json")
    if cfg.get("afp", "export_nets", False, bool):
        for lv in trace.levels:
            lv.net.to_csv(out / f"net_{lv.n}.csv")
    for lv in trace.levels:
        report.info(f"n={lv.n:<4d} net={lv.net_size:<6d} rho residual={lv.rho_residual:.3e} (< {1 / lv.n:.3e})")
    slack = cfg.get("afp", "weak_slack", WEAK_SLACK, float)
    audit = trace.audit(slack=slack)
    for key, ok in audit.items():
        report.audit(f"trace {key}", ok)
    extract_tol = cfg.get("afp", "extract_tol", None, _positive)
    if extract_tol is not None:
        try:
            p = extract_fixed_point(trace, f, extract_tol)
            report.info(f"fixed point {np.array2string(p, precision=6)}")
        except ApproxFixError as err:
            report.info(f"no fixed point extracted: {err}")


def _ode_scenario(cfg, out, seed, audit_only, report):
    problem = read_problem(cfg)
    osg = osgood_check(problem)
    report.audit(f"growth integral condition ({osg['alpha_integral']:.4g} < {osg['phi_integral']:.4g})", osg["ok"])
    bound = apriori_bound(problem)
    oracle = apriori_bound_inverse(problem)
    rel = float(np.max(np.abs(bound.values - oracle.values) / np.maximum(oracle.values, 1e-300)))
    report.audit(f"bound forms agree (rel {rel:.1e})", rel <= BOUND_AGREEMENT)
    ratio = audit_growth(problem, bound, seed=seed)
    report.audit(f"growth bound audit (max ratio {ratio:.3f})", ratio <= 1.0 + 1e-9)
    if audit_only:
        return
    iterations = cfg.get("ode", "iterations", 30, _positive_int)
    funcs = read_functionals(cfg, "ode", problem.dimension, seed) if cfg.has("ode", "functionals") \
        else coordinate_functionals(problem.dimension)
    sol = solve_limiting_weak(problem, iterations, funcs, bound)
    sol.to_csv(out / "solution.csv", out / "residuals.csv")
    lp_ok = True
    for u in sol.iterates:
        lp_ok &= verify_lp_estimates(problem, u, bound, raise_on_failure=False).ok
    report.audit(f"L_p estimates on all {len(sol.iterates)} iterates (p={problem.p_exponent:g})", lp_ok)
    slack = cfg.get("ode", "weak_slack", WEAK_SLACK, float)
    report.audit("weak residual decay", not weak_decay_violations(sol.weak_residuals, slack))
    report.info(f"u(T) = {np.array2string(sol.u.at_end(), precision=10)}; tube constant C = {sol.tube_constant:.3g}")
    report.info(f"final uniform residual {sol.final_residual:.3e}")
    data = sol.as_dict()
    ref = cfg.get("ode", "reference", None, _vector)
    if ref is not None:
        tol = cfg.get("ode", "reference_tol", 1e-3, _positive)
        err = float(np.linalg.norm(sol.u.at_end() - ref))
        report.audit(f"|u(T) - reference| = {err:.3e} < {tol:g}", err < tol)
        data["reference_error"] = err
    data["audits"] = dict(report.audits)
    (out / "ode.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _orbit_scenario(cfg, out, seed, audit_only, report):
    start = cfg.get("orbit", "start", ..., _vector)
    f = read_map(cfg, start.size)
    depth = cfg.get("orbit", "depth", 3, _positive_int)
    samples = cfg.get("orbit", "samples", 16, _positive_int)
    if audit_only:
        return
    chain = orbit_hull_chain(f, start, depth, samples, seed)
    rows = chain_report(chain)
    inclusion = True
    for prev, nxt in zip(chain, chain[1:]):
        images = np.array([f(g) for g in prev.generators])
        inclusion &= all(any(np.array_equal(y, g) for g in nxt.generators) for y in images)
    report.audit("image inclusion", inclusion)
    with (out / "orbit.csv").open("w", newline="") as fh:
        fh.write("k,generators,extreme_points,diameter\n")
        for r in rows:
            fh.write(f"{r['k']},{r['generators']},{r['extreme_points']},{r['diameter']:.17g}\n")
    for r in rows:
        report.info(f"A_{r['k']}: {r['generators']} generators, {r['extreme_points']} extreme, diameter {r['diameter']:.4g}")
    data = {"chain": rows, "extreme_points": [b.extreme_points().tolist() for b in chain]}
    (out / "orbit.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


RUNNERS = {"afp_map": _afp_scenario, "ode": _ode_scenario, "orbit_chain": _orbit_scenario}


def run_scenario(config_path, seed=None, out=None, audit_only=False, stream=None) -> int:
    """Execute one scenario file; returns the process exit status."""
    stream = stream or sys.stdout
    cfg = Config(config_path)
    kind = cfg.get("scenario", "kind", ..., str)
    if kind not in KINDS:
        cfg.fail("scenario", "kind", f"expected one of {', '.join(KINDS)}")
    if seed is None:
        seed = cfg.get("scenario", "seed", 0, int)
    out = Path(out or os.environ.get(OUT_ENV) or cfg.get("scenario", "output", "out", str))
    out.mkdir(parents=True, exist_ok=True)
    report = Report()
    try:
        RUNNERS[kind](cfg, out, seed, audit_only, report)
    except ConfigInvalid:
        raise
    except ApproxFixError as err:
        report.audit(f"{type(err).__name__}: {err}", False)
    print(f"scenario {cfg.path.name} ({kind}, seed {seed}) -> {out}", file=stream)
    for line in report.lines:
        print(line, file=stream)
    print("OK" if report.ok else "FAILED", file=stream)
    return 0 if report.ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="approxfix", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or the config's output)")
    run.add_argument("--audit-only", action="store_true", help="run invariant audits without solving")
    lst = sub.add_parser("list", help="list built-in maps and fields")
    lst.add_argument("filter", nargs="?", default="")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")

    if args.command == "list":
        text = registry.describe(registry.list_registry(args.filter))
        if text:
            print(text)
        return 0
    try:
        return run_scenario(args.config, args.seed, args.out, args.audit_only)
    except ConfigInvalid as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
