"""Command-line interface: ``depnet <command> [options]``.

Every option may also come from a JSON ``--config`` file (keys are the long
option names with underscores); command-line flags win.  Exit status is 0 on
success, 1 on bad input and 2 when a numerical routine fails to converge.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import experiments as exp
from . import graph as gr
from .copula import CopulaSpec, Family
from .dynamics import DependenceModel, EpidemicParams, simulate, trajectory_array
from .equilibrium import DEFAULT_MAX_ITER, DEFAULT_TOL, solve
from .thresholds import threshold_report

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 1, 2

DEFAULTS = {
    "graph": None, "alpha": None, "beta": None, "gamma": None,
    "outer": "independence", "node": "independence",
    "tol": DEFAULT_TOL, "max_iter": DEFAULT_MAX_ITER, "horizon": 100, "initial": None,
    "out": None, "seed": 0, "full_precision": False,
    "grid": "desk", "node_grid": None, "outer_grid": None,
}


class InputError(Exception):
    pass


class NotConverged(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- configuration -------------------------------------------------------------

def _settings(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read config {args.config}: {e}")
        if not isinstance(loaded, dict):
            raise InputError("config must be a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            cfg[key] = value
    if float(cfg["tol"]) <= 0.0:
        raise InputError("tol must be > 0")
    if int(cfg["max_iter"]) < 1:
        raise InputError("max-iter must be >= 1")
    return cfg


def _params(cfg, required=True) -> EpidemicParams | None:
    vals = [cfg[k] for k in ("alpha", "beta", "gamma")]
    if any(v is None for v in vals):
        if required:
            raise InputError("--alpha, --beta and --gamma are required")
        return None
    try:
        return EpidemicParams(*map(float, vals))
    except ValueError as e:
        raise InputError(str(e))


def _spec(text) -> CopulaSpec:
    try:
        return CopulaSpec.from_dict(text) if isinstance(text, dict) else CopulaSpec.parse(str(text))
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"bad copula {text!r}: {e}")


def _model(cfg) -> DependenceModel:
    try:
        return DependenceModel(_spec(cfg["outer"]), _spec(cfg["node"]))
    except ValueError as e:
        raise InputError(str(e))


def _fields(body, count, seed):
    parts = [s for s in body.split(",") if s]
    if len(parts) == count - 1:
        parts.append(str(seed))
    if len(parts) != count:
        raise InputError(f"expected {count} comma-separated values, got {body!r}")
    return parts


def parse_graph(source, seed: int = 0) -> gr.Graph:
    """Build a graph from ``star:N``, ``regular:N,D[,SEED]``, ``er:N,P[,SEED]``,
    ``plaw:N,M,EXP[,SEED]`` or an edge-list path."""
    if source is None:
        raise InputError("--graph is required")
    kind, _, body = str(source).partition(":")
    try:
        if kind == "star" and body:
            return gr.star(int(body))
        if kind == "regular" and body:
            n, d, s = _fields(body, 3, seed)
            return gr.random_regular(int(n), int(d), int(s))
        if kind == "er" and body:
            n, p, s = _fields(body, 3, seed)
            return gr.erdos_renyi(int(n), float(p), int(s))
        if kind == "plaw" and body:
            n, m, e, s = _fields(body, 4, seed)
            return gr.power_law(int(n), int(m), float(e), int(s))
    except ValueError as e:
        raise InputError(f"bad graph {source!r}: {e}")
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read graph {source}: {e}")
    try:
        return gr.from_edge_list(text)
    except ValueError as e:
        raise InputError(f"bad edge list {source}: {e}")


def _fmt(full):
    return "{:.17g}".format if full else "{:.6g}".format


def _csv(header, rows, full, int_cols=0) -> str:
    f = _fmt(full)
    out = io.StringIO()
    out.write(header + "\n")
    for row in rows:
        cells = [str(int(v)) for v in row[:int_cols]] + [f(float(v)) for v in row[int_cols:]]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def _json(obj) -> str:
    def clean(v):
        if isinstance(v, (np.floating, float)):
            v = float(v)
            return v if np.isfinite(v) else None
        if isinstance(v, (np.bool_,)):
            return bool(v)
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v
    return json.dumps(clean(obj), indent=2, sort_keys=False) + "\n"


class _Output:
    """Writes ``PREFIX_<name>`` files when a prefix is set, otherwise stdout."""

    def __init__(self, prefix):
        self.prefix = prefix

    def emit(self, name, text):
        if self.prefix is None:
            sys.stdout.write(text)
            return
        path = Path(f"{self.prefix}_{name}")
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _spectral(g):
    with warnings.catch_warnings():
        warnings.simplefilter("error", gr.ConvergenceWarning)
        try:
            return gr.spectral_radius(g)
        except gr.ConvergenceWarning as e:
            raise NotConverged(str(e))


# -- commands ------------------------------------------------------------------

def cmd_spectral(cfg, out):
    g = parse_graph(cfg["graph"], cfg["seed"])
    deg = g.degrees
    rho = _spectral(g)
    out.emit("spectral.json", _json({
        "n": g.n, "edges": g.num_edges, "rho_A": rho,
        "degree_min": int(deg.min()) if g.n else 0, "degree_max": int(deg.max()) if g.n else 0,
        "degree_mean": float(deg.mean()) if g.n else 0.0,
    }))
    return EXIT_OK


def _solve(cfg, g, p, m):
    try:
        return solve(g, p, m, float(cfg["tol"]), int(cfg["max_iter"]), rho_A=_spectral(g))
    except ValueError as e:
        raise InputError(str(e))


def cmd_equilibrium(cfg, out):
    g = parse_graph(cfg["graph"], cfg["seed"])
    p, m = _params(cfg), _model(cfg)
    res = _solve(cfg, g, p, m)
    rows = np.column_stack([np.arange(g.n), g.degrees, res.i_star])
    out.emit("equilibrium.csv", _csv("node,degree,i_star", rows, cfg["full_precision"], 2))
    rep = threshold_report(g, p, res.i_star).to_json_dict()
    rep.update(converged=res.converged, iterations=res.iterations, residual=res.residual)
    if out.prefix is None:
        sys.stdout.write("\n")
    out.emit("thresholds.json", _json(rep))
    if not res.converged:
        raise NotConverged(f"equilibrium not converged after {res.iterations} iterations "
                           f"(residual {res.residual:.3g}); output is partial")
    return EXIT_OK


def cmd_threshold(cfg, out):
    g = parse_graph(cfg["graph"], cfg["seed"])
    p, m = _params(cfg), _model(cfg)
    res = _solve(cfg, g, p, m)
    rep = threshold_report(g, p, res.i_star if res.converged else None, rho_A=_spectral(g))
    d = rep.to_json_dict()
    d["converged"] = res.converged
    out.emit("thresholds.json", _json(d))
    if not res.converged:
        raise NotConverged("equilibrium not converged; equilibrium-based thresholds omitted")
    return EXIT_OK


def _initial(cfg, n):
    init = cfg["initial"]
    if init is None:
        return np.zeros(n)
    try:
        return np.full(n, float(init))
    except (TypeError, ValueError):
        pass
    try:
        text = Path(init).read_text()
    except OSError as e:
        raise InputError(f"cannot read initial state {init}: {e}")
    values = []
    for line in text.splitlines():
        cells = [c.strip() for c in line.split(",") if c.strip()]
        if not cells or cells[0].startswith("#"):
            continue
        try:
            values.append(float(cells[-1]))
        except ValueError:
            if values:
                raise InputError(f"bad initial-state line {line!r}")
    if len(values) != n:
        raise InputError(f"initial state has {len(values)} values, graph has {n} nodes")
    return np.array(values)


def cmd_simulate(cfg, out):
    g = parse_graph(cfg["graph"], cfg["seed"])
    p, m = _params(cfg), _model(cfg)
    x0 = _initial(cfg, g.n)
    try:
        traj = trajectory_array(simulate(x0, g, p, m, int(cfg["horizon"])))
    except ValueError as e:
        raise InputError(str(e))
    T = traj.shape[0]
    rows = np.column_stack([np.repeat(np.arange(T), g.n), np.tile(np.arange(g.n), T), traj.ravel()])
    out.emit("trajectory.csv", _csv("t,node,i", rows, cfg["full_precision"], 2))
    return EXIT_OK


def cmd_bounds(cfg, out):
    g = parse_graph(cfg["graph"], cfg["seed"])
    p, m = _params(cfg), _model(cfg)
    try:
        rep = bnd.general_bounds(g, p)
        upper = rep.upper.copy()
        hub = gr.is_star(g)
        d = gr.regular_degree(g)
        if hub is not None:
            sb = bnd.star_bounds(g.n, p)
            upper[:] = sb.extras["leaf_upper"]
            upper[hub] = sb.extras["hub_upper"]
        elif d is not None and d >= 1:
            upper[:] = bnd.regular_bounds(d, p).extras["upper"]
        neq = bnd.nonequilibrium_bounds(g, p, m)
    except ValueError as e:
        raise InputError(str(e))
    rows = np.column_stack([np.arange(g.n), g.degrees, np.full(g.n, rep.lower), upper,
                            neq.extras["lower"], neq.extras["upper"]])
    out.emit("bounds.csv", _csv("node,degree,lower,upper,neq_lower,neq_upper", rows,
                                cfg["full_precision"], 2))
    return EXIT_OK


def _value_grid(text, default_family):
    """``FAMILY:v1,v2,...``; a zero Gaussian value stands for independence."""
    fam, _, body = str(text).partition(":")
    if not body:
        fam, body = default_family, fam
    try:
        family = Family(fam)
        values = [float(v) for v in body.split(",") if v]
    except ValueError as e:
        raise InputError(f"bad grid {text!r}: {e}")
    if not values:
        raise InputError(f"empty grid {text!r}")
    specs = []
    for v in values:
        if family is Family.GAUSSIAN:
            specs.append(exp.gaussian_or_independence(v))
        else:
            specs.append(_spec(f"{family.value}:{v}"))
    return specs


def _emit_sweep(res, cfg, out):
    rows = [r[:5] for r in res.rows]
    out.emit("sweep.csv", _csv("node_param,outer_param,i_h,i_l,tau", rows, cfg["full_precision"]))
    bad = sum(not r.converged for r in res.rows)
    if bad:
        raise NotConverged(f"{bad} sweep cells did not converge")
    return EXIT_OK


def cmd_sweep(cfg, out):
    p = _params(cfg)
    g = parse_graph(cfg["graph"] or f"star:{exp.TABLE_N}", cfg["seed"])
    if gr.is_star(g) != 0:
        raise InputError("sweep runs on a star graph with hub 0")
    nodes = _value_grid(cfg["node_grid"] or ",".join(map(str, exp.TABLE_THETAS)), "clayton")
    outers = _value_grid(cfg["outer_grid"] or ",".join(map(str, exp.TABLE_SIGMAS)), "gaussian")
    try:
        res = exp.dependence_sweep(g.n, p, nodes, outers, float(cfg["tol"]), int(cfg["max_iter"]))
    except ValueError as e:
        raise InputError(str(e))
    return _emit_sweep(res, cfg, out)


def cmd_repro(cfg, out, table):
    return _emit_sweep(exp.table_sweep(table, tol=float(cfg["tol"]), max_iter=int(cfg["max_iter"])),
                       cfg, out)


def _param_grid(text):
    if text == "desk":
        return exp.approximation_grid(2)
    if text == "full":
        return exp.approximation_grid(1)
    axes = str(text).split("/")
    if len(axes) != 3:
        raise InputError("grid is 'desk', 'full' or 'ALPHAS/BETAS/GAMMAS' with comma lists")
    try:
        a, b, c = ([float(v) for v in ax.split(",") if v] for ax in axes)
        return [EpidemicParams(x, y, z) for x in a for y in b for z in c]
    except ValueError as e:
        raise InputError(f"bad grid {text!r}: {e}")


def cmd_approx(cfg, out):
    g = parse_graph(cfg["graph"], cfg["seed"])
    m = _model(cfg)
    grid = _param_grid(cfg["grid"])
    try:
        model = exp.fit_approximation(g, grid, m, max_iter=int(cfg["max_iter"]))
    except ValueError as e:
        raise InputError(str(e))
    if model.dropped:
        print(f"warning: degenerate design, dropped regressors: {', '.join(model.dropped)}",
              file=sys.stderr)
    out.emit("model.json", _json(model.to_json_dict()))
    p = _params(cfg, required=False) or model.triples[0]
    res = _solve(cfg, g, p, m)
    if out.prefix is None:
        sys.stdout.write("\n")
    table = exp.approximation_table(g, model, p, res.i_star)
    out.emit("approximation.csv", _csv("node,degree,i_star,lower,upper,i_tilde,i_hat", table,
                                       cfg["full_precision"], 2))
    if not res.converged:
        raise NotConverged("equilibrium not converged for the reported triple")
    return EXIT_OK


COMMANDS = {
    "spectral": cmd_spectral, "simulate": cmd_simulate, "equilibrium": cmd_equilibrium,
    "bounds": cmd_bounds, "threshold": cmd_threshold, "sweep": cmd_sweep, "approx": cmd_approx,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option defaults")
    common.add_argument("--graph", help="edge-list path, star:N, regular:N,D,SEED, er:N,P,SEED "
                                        "or plaw:N,M,EXP,SEED")
    common.add_argument("--alpha", type=float, help="pull infection probability")
    common.add_argument("--beta", type=float, help="cure probability")
    common.add_argument("--gamma", type=float, help="push infection probability per edge")
    common.add_argument("--outer", help="copula joining push and pull, FAMILY[:PARAM]")
    common.add_argument("--node", help="copula family joining the push attacks on a node")
    common.add_argument("--tol", type=float, help=f"solver tolerance (default {DEFAULT_TOL:g})")
    common.add_argument("--max-iter", type=int, dest="max_iter", help="solver iteration cap")
    common.add_argument("--horizon", type=int, help="simulation steps (default 100)")
    common.add_argument("--initial", help="initial state: uniform value or per-node CSV")
    common.add_argument("--out", help="output path prefix (default: stdout)")
    common.add_argument("--seed", type=int, help="default seed for random graph sources")
    common.add_argument("--full-precision", action="store_true", dest="full_precision",
                        help="17 significant digits in CSV output")
    common.add_argument("--grid", help="approx grid: desk, full or ALPHAS/BETAS/GAMMAS")
    common.add_argument("--node-grid", dest="node_grid", help="sweep node copulas, FAMILY:v1,v2,...")
    common.add_argument("--outer-grid", dest="outer_grid",
                        help="sweep outer copulas, FAMILY:v1,v2,... (gaussian 0 = independence)")

    parser = _Parser(prog="depnet", description="Epidemics on networks with dependent attacks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "spectral": "spectral radius and degree summary (JSON)",
        "simulate": "iterate the dynamics (trajectory CSV)",
        "equilibrium": "solve for the equilibrium (CSV + threshold JSON)",
        "bounds": "equilibrium and non-equilibrium bounds (CSV)",
        "threshold": "convergence conditions (JSON)",
        "sweep": "star equilibria over a dependence grid (CSV)",
        "approx": "fit the bound-based approximation (JSON + CSV)",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    repro = sub.add_parser("repro", parents=[common], help="regenerate a reference table (CSV)")
    repro.add_argument("table", choices=sorted(exp.TABLE_PARAMS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _settings(args)
        out = _Output(cfg["out"])
        if args.command == "repro":
            return cmd_repro(cfg, out, args.table)
        return COMMANDS[args.command](cfg, out)
    except InputError as e:
        print(f"depnet: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NotConverged as e:
        print(f"depnet: not converged: {e}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
