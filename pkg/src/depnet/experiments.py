"""Comparative studies: dependence sweeps, trajectory dominance, bound-based approximation."""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import copula
from .bounds import general_bounds
from .copula import CopulaSpec, Family
from .dynamics import DependenceModel, EpidemicParams, simulate, trajectory_array
from .equilibrium import DEFAULT_MAX_ITER, DEFAULT_TOL, solve, solve_star
from .graph import Graph, from_edges, spectral_radius, star
from .thresholds import tau

DOMINANCE_SLACK = 1e-12
COND16_GRID_POINTS = 9
COND16_MAX_POINTS = 2000

TABLE_THETAS = tuple(1.0 + 0.5 * k for k in range(11))
TABLE_SIGMAS = (0.5, 0.0, -0.5)
TABLE_PARAMS = {
    "table1": EpidemicParams(0.2, 0.5, 0.05),
    "table2": EpidemicParams(0.4, 0.7, 0.05),
}
TABLE_N = 11

APPROX_ALPHAS = (0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
APPROX_BETAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
APPROX_GAMMAS = (0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("DEPNET_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items, workers=None):
    workers = workers or worker_count()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def grid_value(spec: CopulaSpec) -> float:
    """Numeric label of a copula in a sweep; independence is the zero-dependence point."""
    if spec.param is not None:
        return spec.param
    return 0.0 if spec.family is Family.INDEPENDENCE else float("nan")


def gaussian_or_independence(sigma: float) -> CopulaSpec:
    return copula.INDEPENDENCE if sigma == 0.0 else CopulaSpec(Family.GAUSSIAN, sigma)


def classify_dependence(spec: CopulaSpec, n: int = 2, grid_points: int = 9) -> str:
    """Label a copula ``pd``, ``ind`` or ``nd`` relative to the product copula.

    Dependence is expressed on survival (non-infection) arguments, so a copula
    lying *below* the product makes joint infection more likely: positive
    dependence between attacks.  Returns ``mixed`` when neither ordering holds.
    """
    pts = copula.grid(n, grid_points)
    c = copula.evaluate(spec, pts)
    prod = np.prod(pts, axis=-1)
    tol = copula.tolerance(spec, n)
    below = np.all(c <= prod + tol)
    above = np.all(c >= prod - tol)
    if below and above:
        return "ind"
    if below:
        return "pd"
    if above:
        return "nd"
    return "mixed"


class SweepRow(NamedTuple):
    node_param: float
    outer_param: float
    i_h: float
    i_l: float
    tau: float
    converged: bool


@dataclass
class SweepResult:
    rows: list[SweepRow]
    params: EpidemicParams
    n: int


def _star_tau(n, p, hub, leaf):
    g = star(n)
    x = np.full(n, leaf)
    x[0] = hub
    return tau(g, p, x)


def dependence_sweep(n: int, p: EpidemicParams, node_specs: Sequence[CopulaSpec],
                     outer_specs: Sequence[CopulaSpec], tol: float = DEFAULT_TOL,
                     max_iter: int = DEFAULT_MAX_ITER, workers: int | None = None) -> SweepResult:
    """Star equilibria and tau over every (node copula, outer copula) pair.

    Rows are ordered node-major, matching the input order regardless of how
    many workers run the cells.
    """
    cells = list(itertools.product(node_specs, outer_specs))

    def run(cell):
        node, outer = cell
        eq = solve_star(n, p, DependenceModel(outer, node), tol, max_iter)
        return SweepRow(grid_value(node), grid_value(outer), eq.hub, eq.leaf,
                        _star_tau(n, p, eq.hub, eq.leaf), eq.converged)

    return SweepResult(_pmap(run, cells, workers), p, n)


def table_sweep(name: str, **kw) -> SweepResult:
    """The star study of the reference tables: Clayton node copulas × Gaussian outer copulas."""
    if name not in TABLE_PARAMS:
        raise ValueError(f"unknown table {name!r}; expected one of {sorted(TABLE_PARAMS)}")
    nodes = [CopulaSpec(Family.CLAYTON, t) for t in TABLE_THETAS]
    outers = [gaussian_or_independence(s) for s in TABLE_SIGMAS]
    return dependence_sweep(TABLE_N, TABLE_PARAMS[name], nodes, outers, **kw)


# -- trajectory dominance ------------------------------------------------------

def condition18(g: Graph, p: EpidemicParams, m: DependenceModel):
    """``(holds, min_value, mu)``: does min_v C(delta_{C_v}(1 - gamma mu), 1 - alpha) reach beta?"""
    dmax = float(g.degrees.max()) if g.n else 0.0
    mu = max(1.0 - p.beta, min(p.alpha + p.gamma * dmax, 1.0))
    push = copula.evaluate_neighborhoods(m.node, np.full(g.n, 1.0 - p.gamma * mu), g.adjacency)
    K = np.atleast_1d(copula.evaluate(m.outer, np.stack([push, np.full(g.n, 1.0 - p.alpha)], -1)))
    min_value = float(K.min())
    return bool(min_value >= p.beta), min_value, mu


def _cond16_points(d, grid_points, rng_seed=0):
    k = d + 1
    if grid_points ** k <= COND16_MAX_POINTS:
        return copula.grid(k, grid_points)
    # Halton-style quasi-random cloud, deterministic
    from scipy.stats import qmc
    pts = qmc.Halton(d=k, scramble=False).random(COND16_MAX_POINTS + 1)[1:]
    return np.vstack([pts, np.ones((1, k)), np.zeros((1, k))])


def _composite(m: DependenceModel, pts):
    d = pts.shape[1] - 1
    if d == 0:
        inner = np.ones(len(pts))
    elif d == 1:
        inner = pts[:, 0]
    else:
        inner = copula.evaluate(m.node, pts[:, :d])
    return copula.evaluate(m.outer, np.stack([inner, pts[:, d]], -1))


def condition16_sampled(g: Graph, m: DependenceModel, m2: DependenceModel,
                        grid_points: int = COND16_GRID_POINTS) -> bool:
    """Sampled check that C(C_v(u), u0) <= C'(C'_v(u), u0) at every degree present.

    A falsification test: ``False`` is definitive, ``True`` only means no
    counterexample was found on the sample.
    """
    for d in sorted(set(int(x) for x in g.degrees)):
        pts = _cond16_points(d, grid_points)
        tol = max(copula.tolerance(m.node, d), copula.tolerance(m2.node, d))
        if np.any(_composite(m, pts) > _composite(m2, pts) + tol):
            return False
    return True


class DominanceResult(NamedTuple):
    cond16_sampled: bool
    cond18: bool
    dominated: bool
    first_violation: tuple[int, int] | None


def dominance_check(g: Graph, p: EpidemicParams, m: DependenceModel, m2: DependenceModel,
                    i0, horizon: int, grid_points: int = COND16_GRID_POINTS) -> DominanceResult:
    """Simulate both models from ``i0`` and test i(t) >= i'(t) for every t <= horizon."""
    c16 = condition16_sampled(g, m, m2, grid_points)
    c18 = condition18(g, p, m)[0]
    a = trajectory_array(simulate(i0, g, p, m, horizon))
    b = trajectory_array(simulate(i0, g, p, m2, horizon))
    bad = np.argwhere(a < b - DOMINANCE_SLACK)
    first = (int(bad[0, 0]), int(bad[0, 1])) if bad.size else None
    return DominanceResult(c16, c18, first is None, first)


def connected_graphs(n: int):
    """All connected labelled graphs on ``n`` nodes, fewest edges first."""
    pairs = list(itertools.combinations(range(n), 2))
    for k in range(n - 1, len(pairs) + 1):
        for edges in itertools.combinations(pairs, k):
            g = from_edges(n, edges)
            if _connected(g):
                yield g


def _connected(g):
    seen = {0}
    stack = [0]
    while stack:
        for u in g.neighbors[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == g.n


def find_dominance_violation(p: EpidemicParams, m: DependenceModel, m2: DependenceModel, i0,
                             horizon: int = 10, window: tuple[int, int] | None = None,
                             limit: int | None = None):
    """Search connected graphs on ``len(i0)`` nodes for a trajectory-dominance failure.

    With ``window=(t_lo, t_hi)`` the failure must occur at some step in that
    inclusive range.  Returns ``(graph, DominanceResult, steps)`` for the first
    graph found, where ``steps`` lists every violating step, or None.
    """
    for k, g in enumerate(connected_graphs(len(i0))):
        if limit is not None and k >= limit:
            break
        a = trajectory_array(simulate(i0, g, p, m, horizon))
        b = trajectory_array(simulate(i0, g, p, m2, horizon))
        steps = np.flatnonzero(np.any(a < b - DOMINANCE_SLACK, axis=1))
        if window is not None:
            hit = np.any((steps >= window[0]) & (steps <= window[1]))
        else:
            hit = steps.size > 0
        if hit:
            return g, dominance_check(g, p, m, m2, i0, horizon), [int(t) for t in steps]
    return None


# -- bound-based approximation -----------------------------------------------

@dataclass
class ApproxModel:
    """Regression ``i~ = k0 + k1 lower + k2 upper + k3 deg`` and the error summary.

    ``err_G`` is the per-triple total error ``sum_v (i^_v - i*_v)`` averaged
    over triples (positive means overestimation); ``upper_err`` and
    ``lower_err`` are the same totals for the bounds themselves.
    """

    k0: float
    k1: float
    k2: float
    k3: float
    err_G: float
    upper_err: float
    lower_err: float
    triples: list = field(default_factory=list, repr=False)
    dropped: list = field(default_factory=list)
    samples: dict = field(default_factory=dict, repr=False)

    @property
    def coefficients(self):
        return np.array([self.k0, self.k1, self.k2, self.k3])

    def predict(self, lower, upper, degree):
        tilde = self.k0 + self.k1 * lower + self.k2 * np.asarray(upper) + self.k3 * np.asarray(degree)
        return tilde, 0.5 * (tilde + np.asarray(upper))

    def to_json_dict(self):
        return {"k0": self.k0, "k1": self.k1, "k2": self.k2, "k3": self.k3, "err_G": self.err_G}


REGRESSORS = ("intercept", "lower", "upper", "degree")


def least_squares(X: np.ndarray, y: np.ndarray, rtol: float = 1e-10):
    """OLS with collinear columns dropped (last-listed first to go).

    Returns ``(coef, dropped)`` with zeros in the dropped positions.
    """
    X = np.asarray(X, dtype=float)
    keep: list[int] = []
    dropped = []
    for j in range(X.shape[1]):
        trial = keep + [j]
        sv = np.linalg.svd(X[:, trial], compute_uv=False)
        if sv[-1] > rtol * max(sv[0], 1.0) * np.sqrt(len(X)):
            keep = trial
        else:
            dropped.append(j)
    coef = np.zeros(X.shape[1])
    if keep:
        coef[keep] = np.linalg.lstsq(X[:, keep], y, rcond=None)[0]
    return coef, dropped


def approximation_grid(subsample: int = 1) -> list[EpidemicParams]:
    """The (alpha, beta, gamma) grid, taking every ``subsample``-th value per axis."""
    s = slice(None, None, subsample)
    return [EpidemicParams(a, b, c) for a in APPROX_ALPHAS[s] for b in APPROX_BETAS[s]
            for c in APPROX_GAMMAS[s]]


def fit_approximation(g: Graph, param_grid: Sequence[EpidemicParams], m: DependenceModel,
                      tol: float = DEFAULT_TOL, max_iter: int = 100_000,
                      workers: int | None = None) -> ApproxModel:
    """Fit the bound-based approximation on the grid triples that pass the tau condition.

    Each triple is solved numerically, kept only if ``rho(A) <= tau``, and the
    pooled (node, triple) samples are regressed on ``[1, lower, upper, deg]``.
    """
    rho_A = spectral_radius(g)
    deg = g.degrees.astype(float)

    def run(p):
        if p.gamma == 0.0:
            # copulas drop out entirely; the equilibrium is alpha/(alpha+beta)
            return p, np.full(g.n, p.alpha / (p.alpha + p.beta)), True
        res = solve(g, p, m, tol, max_iter, rho_A=rho_A)
        if not res.converged or np.any(res.i_star >= 1.0):
            return p, res.i_star, False
        return p, res.i_star, bool(rho_A <= tau(g, p, res.i_star))

    kept = [(p, x) for p, x, ok in _pmap(run, list(param_grid), workers) if ok]
    if len(kept) * g.n < 4:
        raise ValueError(f"only {len(kept) * g.n} samples survive the tau filter; need >= 4")

    rows, ys, lowers, uppers = [], [], [], []
    for p, x in kept:
        b = general_bounds(g, p)
        rows.append(np.column_stack([np.ones(g.n), np.full(g.n, b.lower), b.upper, deg]))
        ys.append(x)
        lowers.append(b.lower)
        uppers.append(b.upper)
    X = np.vstack(rows)
    y = np.concatenate(ys)
    coef, dropped = least_squares(X, y)

    err, up_err, lo_err = [], [], []
    for (p, x), lo, up in zip(kept, lowers, uppers):
        tilde = coef @ np.vstack([np.ones(g.n), np.full(g.n, lo), up, deg])
        hat = 0.5 * (tilde + up)
        err.append(np.sum(hat - x))
        up_err.append(np.sum(up - x))
        lo_err.append(np.sum(lo - x))
    return ApproxModel(*map(float, coef), float(np.mean(err)), float(np.mean(up_err)),
                       float(np.mean(lo_err)), [p for p, _ in kept],
                       [REGRESSORS[j] for j in dropped],
                       {"X": X, "y": y})


def approximation_table(g: Graph, model: ApproxModel, p: EpidemicParams, i_star) -> np.ndarray:
    """Per-node rows ``node, degree, i_star, lower, upper, i_tilde, i_hat``."""
    b = general_bounds(g, p)
    tilde, hat = model.predict(b.lower, b.upper, g.degrees)
    return np.column_stack([np.arange(g.n), g.degrees, i_star, np.full(g.n, b.lower),
                            b.upper, tilde, hat])
