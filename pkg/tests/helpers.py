"""Shared generators for randomized test instances."""
from __future__ import annotations

import numpy as np

from depnet import graph as gr
from depnet.copula import CopulaSpec, Family
from depnet.dynamics import DependenceModel, EpidemicParams
from depnet.equilibrium import contraction_rhs

SPECS_2D = [
    CopulaSpec(Family.INDEPENDENCE), CopulaSpec(Family.FRECHET_LOWER),
    CopulaSpec(Family.FRECHET_UPPER), CopulaSpec(Family.CLAYTON, 0.5),
    CopulaSpec(Family.CLAYTON, 4.0), CopulaSpec(Family.FRANK, 0.7), CopulaSpec(Family.FRANK, 8.0),
    CopulaSpec(Family.GAUSSIAN, -0.8), CopulaSpec(Family.GAUSSIAN, -0.3),
    CopulaSpec(Family.GAUSSIAN, 0.4), CopulaSpec(Family.GAUSSIAN, 0.9),
]

# copulas in every dimension (the lower Fréchet bound is not one above 2)
SPECS_ND = [s for s in SPECS_2D
            if s.family is not Family.FRECHET_LOWER and (s.param is None or s.param > 0)]


def random_graph(rng, max_n=12) -> gr.Graph:
    kind = rng.integers(5)
    seed = int(rng.integers(1 << 30))
    if kind == 0:
        return gr.star(int(rng.integers(2, max_n + 1)))
    if kind == 1:
        n = int(rng.integers(4, max_n + 1))
        d = int(rng.integers(1, min(4, n - 1) + 1))
        if n * d % 2:
            n += 1
        return gr.random_regular(n, d, seed)
    if kind == 2:
        return gr.erdos_renyi(int(rng.integers(2, max_n + 1)), float(rng.uniform(0.1, 0.6)), seed)
    if kind == 3:
        n = int(rng.integers(3, max_n + 1))
        return gr.from_edges(n, [(v, v + 1) for v in range(n - 1)])
    n = int(rng.integers(6, max_n + 1))
    return gr.power_law(n, 2 * n, 2.5, seed)


def random_spec(rng, dim, pool=None) -> CopulaSpec:
    pool = pool or (SPECS_2D if dim <= 2 else SPECS_ND)
    spec = pool[rng.integers(len(pool))]
    if spec.param is None:
        return spec
    lo = 0.05 if spec.family is not Family.GAUSSIAN else (-0.9 if dim <= 2 else 0.05)
    hi = {Family.CLAYTON: 6.0, Family.FRANK: 10.0, Family.GAUSSIAN: 0.9}[spec.family]
    return CopulaSpec(spec.family, float(rng.uniform(lo, hi)))


def random_model(rng, g) -> DependenceModel:
    dmax = int(g.degrees.max()) if g.n else 0
    return DependenceModel(random_spec(rng, 2), random_spec(rng, max(dmax, 2)))


def random_params(rng, g=None, rho=None, tries=1000) -> EpidemicParams:
    """Random (alpha, beta, gamma); with a graph, the contraction condition is enforced."""
    for _ in range(tries):
        p = EpidemicParams(float(rng.uniform(0.01, 0.9)), float(rng.uniform(0.05, 0.95)),
                           float(rng.uniform(0.0, 0.5)))
        if g is None or rho < contraction_rhs(p):
            return p
    raise RuntimeError("no admissible parameters found")
