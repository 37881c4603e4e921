"""Config-driven command line: ``maxreg --config run.ini --out results``.

A config file has four sections::

    [run]
    command = solve

    [problem]
    family = scalar_poly
    coeffs = [1.0, 1.0]

    [numerics]
    n_steps = 256

    [output]
    prefix = scalar

Values are Python literals (numbers, lists, quoted strings); bare words are
read as strings.  Unknown sections or keys are errors.  Every result table
is written as CSV with ``# key=value`` provenance lines on top.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import datetime
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InvalidValue, MathematicalFailure, MaxRegError, ParseError, UnknownKey

log = logging.getLogger("maxreg")

COMMANDS = ("triple-check", "estimates", "sqrt-check", "solve", "mr-check", "robin", "nonlinear", "convergence")
FAMILIES = ("scalar_poly", "diag_perturbed", "robin_1d")
BETA_FAMILIES = ("constant", "holder", "separable", "growing", "rough_time", "neumann", "zero")

_num = lambda v: isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
_pos = lambda v: _num(v) and v > 0
_nonneg = lambda v: _num(v) and v >= 0
_int2 = lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 2
_posint = lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 1
_unit = lambda v: _num(v) and 0 < v <= 1
_ints = lambda v: isinstance(v, list) and len(v) > 0 and all(_int2(x) for x in v)
_floats = lambda v: isinstance(v, list) and len(v) > 0 and all(_num(x) for x in v)


def _choice(*opts):
    return lambda v: v in opts


# key -> (default, check, description)
SCHEMA = {
    "run": {
        "command": (None, _choice(*COMMANDS), "one of " + ", ".join(COMMANDS)),
    },
    "problem": {
        "family": ("scalar_poly", _choice(*FAMILIES), "form family"),
        "T": (1.0, _pos, "time horizon"),
        "coeffs": ([1.0, 1.0], _floats, "scalar_poly: S(t) = sum coeffs[k] t^k"),
        "gram_V": (1.0, _pos, "scalar_poly: V norm weight"),
        "n": (16, _int2, "diag_perturbed: dimension"),
        "alpha": (0.6, _unit, "Hoelder exponent"),
        "gamma": (0.5, lambda v: _num(v) and 0 <= v < 1, "interpolation order of the modulus"),
        "amplitude": (1.0, _num, "diag_perturbed: perturbation size"),
        "n_cells": (16, _int2, "robin_1d: cells of the base mesh"),
        "beta_family": ("holder", _choice(*BETA_FAMILIES), "robin_1d: boundary coefficients"),
        "beta0": (1.0, _num, "robin_1d: coefficient at x=0 (t=0 value)"),
        "beta1": (1.0, _num, "robin_1d: coefficient at x=1 (t=0 value)"),
        "c": (1.0, _nonneg, "robin_1d: Hoelder constant of the boundary coefficients"),
        "u0": ("smooth", _choice("zero", "ones", "smooth", "random"), "initial value"),
        "forcing": ("smooth", _choice("zero", "ones", "smooth", "random"), "right-hand side"),
        "nl_beta0": ("tanh", _choice("zero", "tanh", "bounded_poly"), "nonlinear reaction coefficient"),
        "nl_beta1": ("zero", _choice("zero", "tanh", "bounded_poly"), "nonlinear convection coefficient"),
        "nl_amplitude0": (1.0, _num, "size of nl_beta0"),
        "nl_amplitude1": (1.0, _num, "size of nl_beta1"),
    },
    "numerics": {
        "n_steps": (128, _int2, "time steps"),
        "scheme": ("crank_nicolson", _choice("crank_nicolson", "implicit_euler"), "stepping scheme"),
        "solver": ("stepping", _choice("stepping", "representation"), "solver"),
        "semigroup": ("oracle", _choice("oracle", "contour"), "semigroup evaluation in the representation solver"),
        "tol": (1e-10, _pos, "Picard tolerance"),
        "max_iter": (200, _posint, "Picard iteration cap"),
        "quad_nodes": (64, _int2, "initial quadrature nodes"),
        "quad_tol": (1e-9, _pos, "quadrature refinement tolerance"),
        "levels": ([16, 32, 64], _ints, "mesh levels (n_cells)"),
        "steps_per_cell": (1, _posint, "n_steps = steps_per_cell * n_cells"),
        "grids": ([64, 128, 256], _ints, "time grids (n_steps)"),
        "n_draws": (5, _posint, "random data draws"),
        "ell": ([0.0, 0.5, 1.0], lambda v: _floats(v) and all(0 <= x <= 1 for x in v), "scale orders"),
        "t_snapshot": (0.5, _nonneg, "time of the frozen operator"),
        "per_decade": (8, _posint, "lambda samples per decade"),
        "perturbation": (0.1, _pos, "relative boundary perturbation (sqrt-check)"),
        "damping": (0.5, _unit, "Picard damping"),
        "max_outer": (50, _posint, "outer iteration cap"),
        "nl_tol": (1e-8, _pos, "fixed-point tolerance"),
    },
    "output": {
        "dir": ("results", lambda v: isinstance(v, str) and v != "", "output directory"),
        "prefix": ("", lambda v: isinstance(v, str), "file name prefix"),
        "seed": (0, lambda v: isinstance(v, int) and v >= 0, "random seed"),
    },
}


@dataclass
class RunConfig:
    command: str
    problem: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def items(self):
        """``(section.key, value)`` for every setting, defaults included."""
        yield "run.command", self.command
        for sec in ("problem", "numerics", "output"):
            for k in sorted(getattr(self, sec)):
                yield f"{sec}.{k}", getattr(self, sec)[k]


def _literal(raw):
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        return raw.strip()


def _line_of(text, section, key):
    sec = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            sec = s[1:-1].strip()
        elif sec == section and s.split("=", 1)[0].strip() == key:
            return i
    return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document."""
    if not text.strip():
        raise ParseError("empty config")
    cp = configparser.ConfigParser(interpolation=None, strict=True, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r} in [{exc.section}]", line=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("content before the first [section]", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line (expected key = value)", line=line) from None

    values = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise UnknownKey(f"unknown section [{sec}]")
        values[sec] = {}
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                line = _line_of(text, sec, key)
                raise UnknownKey(f"unknown key {key!r} in [{sec}]" + (f" (line {line})" if line else ""))
            values[sec][key] = _literal(raw)

    if "command" not in values.get("run", {}):
        raise InvalidValue("missing [run] command")
    out = {}
    for sec, keys in SCHEMA.items():
        out[sec] = {}
        for key, (default, check, desc) in keys.items():
            v = values.get(sec, {}).get(key, default)
            if isinstance(default, float) and isinstance(v, int) and not isinstance(v, bool):
                v = float(v)
            if isinstance(default, list) and isinstance(v, list) and default and isinstance(default[0], float):
                v = [float(x) if isinstance(x, int) and not isinstance(x, bool) else x for x in v]
            try:
                ok = check(v)
            except TypeError:
                ok = False
            if not ok:
                raise InvalidValue(f"invalid value {v!r} for {key!r} ({desc})")
            out[sec][key] = v
    cfg = RunConfig(out["run"]["command"], out["problem"], out["numerics"], out["output"])
    _cross_checks(cfg)
    return cfg


def _cross_checks(cfg: RunConfig):
    p = cfg.problem
    robin_like = p["family"] == "robin_1d" or cfg.command in ("robin", "nonlinear", "sqrt-check")
    if robin_like and not p["alpha"] > 0.25:
        raise InvalidValue(f"alpha={p['alpha']} must exceed 1/4 for the Robin problem")
    if robin_like and p["beta_family"] == "zero" and cfg.command != "robin":
        raise InvalidValue("beta_family 'zero' (manufactured zero solution) is only meaningful for 'robin'")
    if cfg.command == "robin" and p["beta_family"] not in ("separable", "growing", "rough_time", "neumann", "zero"):
        raise InvalidValue("robin convergence needs a manufactured beta_family "
                           "(separable, growing, rough_time, neumann, zero)")
    if cfg.command == "robin" and len(cfg.numerics["levels"]) < 3:
        raise InvalidValue("robin convergence needs at least three levels")
    if cfg.command == "robin":
        lv = cfg.numerics["levels"]
        if any(b != 2 * a for a, b in zip(lv, lv[1:])):
            raise InvalidValue("levels must be dyadically nested (each twice the previous)")


# output -----------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return ""
        return "%.17g" % v
    try:
        import numpy as np

        if isinstance(v, np.integer):
            return str(int(v))
        if isinstance(v, np.floating):
            return _fmt(float(v))
    except ImportError:  # pragma: no cover
        pass
    return str(v)


def write_csv(path: Path, rows, header_items):
    """Rows (list of dicts with identical keys) with ``# key=value`` provenance lines."""
    buf = io.StringIO()
    for k, v in header_items:
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    if rows:
        cols = list(rows[0])
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())
    return path


def _provenance(cfg: RunConfig, timestamp: bool):
    from . import __version__

    items = [("maxreg_version", __version__), ("seed", cfg.output["seed"])]
    items += [(k, repr(v)) for k, v in cfg.items()]
    if timestamp:
        items.append(("timestamp", datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")))
    return items


# commands ---------------------------------------------------------------------


def _quad(n):
    from .sectorial import QuadratureConfig

    return QuadratureConfig(n_nodes=n["quad_nodes"], tol=n["quad_tol"])


def _solver_kw(n):
    if n["solver"] == "representation":
        return dict(method="representation", tol=n["tol"], max_iter=n["max_iter"], semigroup=n["semigroup"],
                    quad=_quad(n))
    return dict(method="stepping", scheme=n["scheme"])


def _cmd_triple_check(cfg):
    from .experiments import build_form, triple_check

    F, _ = build_form(cfg.problem)
    return {"triple": triple_check(F, seed=cfg.output["seed"])}


def _cmd_estimates(cfg):
    from .experiments import build_form, estimates_table

    F, _ = build_form(cfg.problem)
    n = cfg.numerics
    return {"estimates": estimates_table(F, n["t_snapshot"], n["ell"], n["per_decade"])}


def _cmd_sqrt_check(cfg):
    from .experiments import sqrt_study

    n = cfg.numerics
    return {"sqrt": sqrt_study(cfg.problem, n["levels"], n["t_snapshot"], n["perturbation"], _quad(n))}


def _cmd_solve(cfg):
    import numpy as np

    from .experiments import build_form, named_data
    from .solver import TimeGrid, h_norms, solve, v_norms

    F, _ = build_form(cfg.problem)
    n = cfg.numerics
    grid = TimeGrid(F.horizon, n["n_steps"])
    f, u0 = named_data(F, grid, cfg.problem["u0"], cfg.problem["forcing"], np.random.default_rng(cfg.output["seed"]))
    rep = solve(F, f, u0, grid=grid, **_solver_kw(n))
    hn, vn = h_norms(rep.form.triple, rep.u.values), v_norms(rep.form.triple, rep.u.values)
    u_rows = []
    for k, t in enumerate(grid.nodes):
        row = {"t": float(t)}
        for i, z in enumerate(rep.u.values[k]):
            row[f"re_u{i}"] = float(np.real(z))
            row[f"im_u{i}"] = float(np.imag(z))
        row["h_norm"] = float(hn[k])
        row["v_norm"] = float(vn[k])
        u_rows.append(row)
    mr = [{"du_norm": rep.du_norm, "Au_norm": rep.Au_norm, "sup_V_norm": rep.sup_V_norm,
           "mr_constant": rep.mr_constant, "iterations": rep.iterations,
           "q_norm_estimate": rep.q_norm_estimate, "shift_mu": rep.shift_mu}]
    return {"u": u_rows, "mr": mr}


def _cmd_mr_check(cfg):
    from .experiments import build_form, mr_study

    F, _ = build_form(cfg.problem)
    n = cfg.numerics
    kw = _solver_kw(n)
    method = kw.pop("method")
    rows = mr_study(lambda grid: F, n["grids"], n["n_draws"], seed=cfg.output["seed"], method=method, **kw)
    return {"mr_check": rows}


def _cmd_robin(cfg):
    from .experiments import robin_convergence

    n = cfg.numerics
    kw = {}
    if n["solver"] == "representation":
        kw = dict(tol=n["tol"], max_iter=n["max_iter"], semigroup=n["semigroup"], quad=_quad(n))
    rows = robin_convergence(cfg.problem, n["levels"], n["steps_per_cell"], n["scheme"], n["solver"], **kw)
    return {"robin_convergence": rows}


def _cmd_nonlinear(cfg):
    import numpy as np

    from .experiments import robin_problem, spectral_data
    from .nonlinear import NonlinearProblem, beta_family, solve_fixed_point
    from .robin import assemble
    from .solver import TimeGrid

    p, n = cfg.problem, cfg.numerics
    base = robin_problem(p)
    b0, s0 = beta_family(p["nl_beta0"], p["nl_amplitude0"])
    b1, s1 = beta_family(p["nl_beta1"], p["nl_amplitude1"])
    P = NonlinearProblem(base, b0, b1, s0, s1, n["damping"], n["nl_tol"], n["max_outer"], n["scheme"])
    grid = TimeGrid(base.horizon, n["n_steps"])
    F = assemble(base)
    dim = F.triple.dim
    if p["u0"] == "random" or p["forcing"] == "random":
        rng = np.random.default_rng(cfg.output["seed"])
        signs, phases = rng.choice([-1.0, 1.0], dim), rng.uniform(0, 2 * np.pi, dim)
    else:
        signs, phases = np.ones(dim), np.zeros(dim)
    f, u0 = spectral_data(F, grid, signs, phases)
    if p["u0"] in ("zero", "ones"):
        u0 = np.zeros(dim) if p["u0"] == "zero" else np.ones(dim)
    if p["forcing"] == "zero":
        f = f.scaled(np.zeros(grid.n_steps + 1))
    res = solve_fixed_point(P, f, u0)
    hist = [{"iteration": i + 1, "residual": r, "mr_constant": m}
            for i, (r, m) in enumerate(zip(res.residual_history, res.mr_constants))]
    x = base.nodes
    u_rows = [{"t": float(t), **{f"u_x{j}": float(v) for j, v in enumerate(res.u.u.values[k].real)}}
              for k, t in enumerate(grid.nodes)]
    summary = [{"outer_iterations": res.outer_iterations, "damping": res.damping,
                "final_residual": res.residual_history[-1], "mr_constant": res.u.mr_constant,
                "sup_V_norm": res.u.sup_V_norm, "n_nodes": len(x)}]
    return {"nonlinear_history": hist, "nonlinear_u": u_rows, "nonlinear_summary": summary}


def _cmd_convergence(cfg):
    from .experiments import build_form, oracle_comparison

    F, _ = build_form(cfg.problem)
    n = cfg.numerics
    rows = oracle_comparison(F, n["grids"], cfg.problem["u0"], cfg.problem["forcing"], seed=cfg.output["seed"],
                             tol=n["tol"], max_iter=n["max_iter"], semigroup=n["semigroup"], quad=_quad(n))
    return {"convergence": rows}


COMMAND_TABLE = {
    "triple-check": _cmd_triple_check,
    "estimates": _cmd_estimates,
    "sqrt-check": _cmd_sqrt_check,
    "solve": _cmd_solve,
    "mr-check": _cmd_mr_check,
    "robin": _cmd_robin,
    "nonlinear": _cmd_nonlinear,
    "convergence": _cmd_convergence,
}


def run(cfg: RunConfig, out_dir=None, timestamp=True):
    """Execute ``cfg`` and write its tables; returns the written paths."""
    tables = COMMAND_TABLE[cfg.command](cfg)
    out = Path(out_dir if out_dir is not None else cfg.output["dir"])
    header = _provenance(cfg, timestamp)
    prefix = cfg.output["prefix"]
    paths = []
    for name, rows in tables.items():
        fname = f"{prefix}_{name}.csv" if prefix else f"{name}.csv"
        paths.append(write_csv(out / fname, rows, header + [("table", name)]))
    return paths


def build_parser():
    ap = argparse.ArgumentParser(prog="maxreg", description="Maximal-regularity experiments from a config file.")
    ap.add_argument("--config", required=True, help="path of the config file")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--seed", type=int, help="random seed (overrides [output] seed)")
    ap.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from provenance headers")
    ap.add_argument("--threads", type=int, help="BLAS/OpenMP thread count")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads is not None:
        if args.threads < 1:
            ap.print_usage(sys.stderr)
            print("maxreg: --threads must be positive", file=sys.stderr)
            return 1
        # effective only if the numerical libraries are not loaded yet
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"maxreg: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
        if args.seed is not None:
            if args.seed < 0:
                raise InvalidValue("--seed must be nonnegative")
            cfg.output["seed"] = args.seed
        paths = run(cfg, args.out, timestamp=not args.no_timestamp)
    except ConfigError as exc:
        ap.print_usage(sys.stderr)
        print(f"maxreg: config error: {exc}", file=sys.stderr)
        return 1
    except MathematicalFailure as exc:
        print(f"maxreg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (MaxRegError, ValueError) as exc:
        print(f"maxreg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
