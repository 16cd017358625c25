"""n-copulas used to couple attack events.

Families: independence (product), the Fréchet–Hoeffding lower and upper
bounds, Clayton, Frank and the equicorrelated Gaussian copula.  Every
evaluator works on arrays of shape ``(..., n)`` and reduces the last axis.

``evaluate_neighborhoods`` evaluates one copula per node over that node's
neighbour values, which is how the epidemic update consumes ``C_v``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.special import log_ndtr, ndtr

from ._normal import bvn_cdf, norm_ppf

#: axiom-check tolerance for closed-form families and the bivariate Gaussian
TOL = 1e-9
#: tolerance for the quadrature-evaluated Gaussian copula (n > 2)
TOL_QUADRATURE = 1e-6
#: parameters at or below these are rejected instead of mapped to independence
MIN_ARCHIMEDEAN_PARAM = 1e-8
MIN_GAUSSIAN_ABS_PARAM = 1e-12
GAUSS_HERMITE_ORDER = 64
#: above this correlation the factor integrand is too steep for Gauss–Hermite
GAUSS_HERMITE_MAX_SIGMA = 0.6
_PANEL_ORDER = 10
_FACTOR_RANGE = 9.0

_gh_x, _gh_w = np.polynomial.hermite.hermgauss(GAUSS_HERMITE_ORDER)
_GH_NODES = np.sqrt(2.0) * _gh_x
_GH_WEIGHTS = _gh_w / np.sqrt(np.pi)
_gl_x, _gl_w = np.polynomial.legendre.leggauss(_PANEL_ORDER)


@lru_cache(maxsize=64)
def _factor_rule(sigma: float):
    """Nodes and weights for E[f(Z)], Z standard normal, suited to ``sigma``.

    Gauss–Hermite for moderate correlation; otherwise a composite
    Gauss–Legendre rule on [-9, 9] whose panels resolve the integrand's
    transition width sqrt((1 - sigma) / sigma).
    """
    if sigma <= GAUSS_HERMITE_MAX_SIGMA:
        return _GH_NODES, _GH_WEIGHTS
    width = min(0.5, 0.5 * math.sqrt((1.0 - sigma) / sigma))
    panels = int(math.ceil(2.0 * _FACTOR_RANGE / width))
    edges = np.linspace(-_FACTOR_RANGE, _FACTOR_RANGE, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    z = (mid[:, None] + half[:, None] * _gl_x).ravel()
    w = (half[:, None] * _gl_w).ravel() * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return z, w


class Family(str, Enum):
    INDEPENDENCE = "independence"
    FRECHET_LOWER = "frechet_lower"
    FRECHET_UPPER = "frechet_upper"
    CLAYTON = "clayton"
    FRANK = "frank"
    GAUSSIAN = "gaussian"


_PARAMETRIC = {Family.CLAYTON, Family.FRANK, Family.GAUSSIAN}


@dataclass(frozen=True)
class CopulaSpec:
    """A copula family plus its parameter.

    ``param`` is θ for Clayton, ξ for Frank and the pairwise correlation σ for
    the Gaussian family; it must be ``None`` for the parameterless families.
    """

    family: Family
    param: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam not in _PARAMETRIC:
            if self.param is not None:
                raise ValueError(f"{fam.value} copula takes no parameter")
            return
        if self.param is None:
            raise ValueError(f"{fam.value} copula requires a parameter")
        p = float(self.param)
        if math.isnan(p):
            raise ValueError("copula parameter is NaN")
        if fam in (Family.CLAYTON, Family.FRANK):
            if p <= MIN_ARCHIMEDEAN_PARAM or math.isinf(p):
                raise ValueError(
                    f"{fam.value} parameter must be finite and > {MIN_ARCHIMEDEAN_PARAM}, got {p}; "
                    "use the independence family for the limiting case")
        elif not (-1.0 < p < 1.0) or abs(p) <= MIN_GAUSSIAN_ABS_PARAM:
            raise ValueError(
                f"gaussian correlation must lie in (-1, 1) with |sigma| > {MIN_GAUSSIAN_ABS_PARAM}, "
                f"got {p}; use the independence family for sigma = 0")
        object.__setattr__(self, "param", p)

    @classmethod
    def parse(cls, text: str) -> "CopulaSpec":
        """Parse ``FAMILY[:PARAM]``, e.g. ``clayton:1.5`` or ``independence``."""
        name, _, value = text.partition(":")
        return cls(Family(name.strip().lower()), float(value) if value.strip() else None)

    @classmethod
    def from_dict(cls, data: dict) -> "CopulaSpec":
        return cls(Family(data["family"]), data.get("param"))

    def to_dict(self) -> dict:
        return {"family": self.family.value, "param": self.param}

    def __str__(self):
        if self.param is None:
            return self.family.value
        return f"{self.family.value}:{self.param:g}"

    def supports(self, n: int) -> bool:
        """Whether this copula can be evaluated at dimension ``n``."""
        if n < 0:
            return False
        if self.family is Family.GAUSSIAN and n > 2:
            return self.param >= 0.0
        return True


INDEPENDENCE = CopulaSpec(Family.INDEPENDENCE)
FRECHET_LOWER = CopulaSpec(Family.FRECHET_LOWER)
FRECHET_UPPER = CopulaSpec(Family.FRECHET_UPPER)


def _check_unit(u: np.ndarray) -> None:
    if np.isnan(u).any():
        raise ValueError("copula argument contains NaN")
    if (u < 0.0).any() or (u > 1.0).any():
        raise ValueError("copula arguments must lie in [0, 1]")


def _check_dim(spec: CopulaSpec, n: int) -> None:
    if not spec.supports(n):
        raise ValueError(
            f"{spec} is not supported at dimension {n}: the equicorrelated Gaussian "
            "copula needs sigma >= 0 above dimension 2")


def _clayton(u, theta):
    # sum_j (u_j^-theta - 1), kept in expm1 form so that u near 1 loses nothing
    with np.errstate(divide="ignore", over="ignore"):
        s = np.sum(np.expm1(-theta * np.log(u)), axis=-1)
        return np.exp(-np.log1p(s) / theta)


def _frank_ratio_log(u, xi):
    # log[(1 - e^{-xi u}) / (1 - e^{-xi})], elementwise
    with np.errstate(divide="ignore"):
        return np.log(-np.expm1(-xi * u)) - np.log(-np.expm1(-xi))


def _frank_from_logsum(logprod, xi):
    return -np.log1p(np.expm1(-xi) * np.exp(logprod)) / xi


def _frank(u, xi):
    return _frank_from_logsum(np.sum(_frank_ratio_log(u, xi), axis=-1), xi)


def _gaussian_factor_log(u, sigma):
    """log Phi((Phi^-1(u) - sqrt(sigma) z_k) / sqrt(1 - sigma)) for every node z_k.

    Output shape is ``u.shape + (K,)`` with ``K`` nodes from ``_factor_rule``.
    """
    a = norm_ppf(np.asarray(u, dtype=float))
    a = np.asarray(a)[..., None]
    with np.errstate(invalid="ignore"):
        return log_ndtr((a - math.sqrt(sigma) * _factor_rule(sigma)[0]) / math.sqrt(1.0 - sigma))


def _gaussian(u, sigma):
    n = u.shape[-1]
    if n == 1:
        return u[..., 0]
    if n == 2:
        return bvn_cdf(norm_ppf(u[..., 0]), norm_ppf(u[..., 1]), sigma)
    logs = np.sum(_gaussian_factor_log(u, sigma), axis=-2)
    return np.exp(logs) @ _factor_rule(sigma)[1]


def evaluate(spec: CopulaSpec, u) -> float | np.ndarray:
    """Evaluate ``C(u_1, ..., u_n)``.

    Parameters
    ----------
    spec : CopulaSpec
    u : array_like, shape (..., n)
        Points in the unit cube; the copula dimension is the last axis.

    Returns
    -------
    float or ndarray of shape (...)
    """
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 0:
        raise ValueError("copula argument must be a sequence")
    n = arr.shape[-1]
    if n < 2:
        raise ValueError(f"copula dimension must be >= 2, got {n}")
    _check_unit(arr)
    _check_dim(spec, n)
    out = _evaluate(spec, arr)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _evaluate(spec, arr):
    fam = spec.family
    if fam is Family.INDEPENDENCE:
        return np.prod(arr, axis=-1)
    if fam is Family.FRECHET_UPPER:
        return np.min(arr, axis=-1)
    if fam is Family.FRECHET_LOWER:
        n = arr.shape[-1]
        return np.maximum(np.sum(arr, axis=-1) - n + 1.0, 0.0)
    if fam is Family.CLAYTON:
        return _clayton(arr, spec.param)
    if fam is Family.FRANK:
        return _frank(arr, spec.param)
    return _gaussian(arr, spec.param)


def diagonal(spec: CopulaSpec, u, n: int) -> float | np.ndarray:
    """Diagonal section ``C(u, ..., u)`` at dimension ``n`` (vectorised over ``u``)."""
    if n < 2:
        raise ValueError(f"copula dimension must be >= 2, got {n}")
    u = np.asarray(u, dtype=float)
    return evaluate(spec, np.repeat(u[..., None], n, axis=-1))


def rectangle_volume(spec: CopulaSpec, lo, hi) -> float:
    """Copula mass of the box ``[lo, hi]`` (the alternating n-box sum)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError("lo and hi must be 1-d sequences of equal length")
    _check_unit(lo)
    _check_unit(hi)
    if (lo > hi).any():
        raise ValueError("need lo <= hi componentwise")
    n = lo.size
    corners = np.array(list(product((0, 1), repeat=n)), dtype=bool)
    points = np.where(corners, hi, lo)
    signs = np.where((n - corners.sum(axis=1)) % 2 == 0, 1.0, -1.0)
    return float(signs @ evaluate(spec, points))


def tolerance(spec: CopulaSpec, n: int) -> float:
    """Numerical tolerance attached to evaluations of ``spec`` at dimension ``n``."""
    if spec.family is Family.GAUSSIAN and n > 2:
        return TOL_QUADRATURE
    return TOL


def grid(n: int, grid_points: int) -> np.ndarray:
    """Regular grid over [0, 1]^n with ``grid_points`` values per axis, shape (k, n)."""
    axis = np.linspace(0.0, 1.0, grid_points)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def concordance_leq(a: CopulaSpec, b: CopulaSpec, n: int = 2, grid_points: int = 9,
                    tol: float | None = None) -> bool:
    """Sampled check that ``a <= b`` in concordance order at dimension ``n``.

    This compares the two copulas on a regular grid only; a ``True`` result
    is evidence, not a proof.
    """
    pts = grid(n, grid_points)
    if tol is None:
        tol = max(tolerance(a, n), tolerance(b, n))
    return bool(np.all(evaluate(a, pts) <= evaluate(b, pts) + tol))


def evaluate_neighborhoods(spec: CopulaSpec, values, adjacency) -> np.ndarray:
    """Evaluate ``C_v`` over each node's neighbour values.

    Parameters
    ----------
    spec : CopulaSpec
        Family used for every node; node ``v`` gets the ``deg(v)``-dimensional
        member of that family.
    values : array_like, shape (N,)
        Per-node arguments; node ``v`` sees ``values[u]`` for each neighbour ``u``.
    adjacency : scipy.sparse matrix, shape (N, N)
        0/1 adjacency matrix.

    Returns
    -------
    ndarray, shape (N,)
        ``C_v`` per node.  An empty neighbourhood gives 1 and a single
        neighbour gives that neighbour's value.
    """
    x = np.asarray(values, dtype=float)
    _check_unit(x)
    A = adjacency.tocsr()
    deg = np.diff(A.indptr)
    fam = spec.family
    if fam is Family.GAUSSIAN and spec.param < 0 and (deg > 2).any():
        _check_dim(spec, int(deg.max()))

    with np.errstate(divide="ignore", over="ignore"):
        if fam is Family.INDEPENDENCE:
            out = np.exp(A @ np.log(x))
        elif fam is Family.FRECHET_LOWER:
            out = np.maximum(A @ (x - 1.0) + 1.0, 0.0)
        elif fam is Family.FRECHET_UPPER:
            out = np.ones(A.shape[0])
            nz = deg > 0
            out[nz] = np.minimum.reduceat(x[A.indices], A.indptr[:-1][nz])
        elif fam is Family.CLAYTON:
            s = A @ np.expm1(-spec.param * np.log(x))
            out = np.exp(-np.log1p(s) / spec.param)
        elif fam is Family.FRANK:
            out = _frank_from_logsum(A @ _frank_ratio_log(x, spec.param), spec.param)
        else:
            out = _gaussian_neighborhoods(spec.param, x, A, deg)
    out[deg == 0] = 1.0
    one = deg == 1
    out[one] = x[A.indices[A.indptr[:-1][one]]]
    return np.clip(out, 0.0, 1.0)


def _gaussian_neighborhoods(sigma, x, A, deg):
    out = np.ones(A.shape[0])
    one = deg == 1
    if one.any():
        out[one] = A[one] @ x
    two = np.flatnonzero(deg == 2)
    if two.size:
        pairs = x[A.indices[A.indptr[two][:, None] + np.arange(2)]]
        out[two] = bvn_cdf(norm_ppf(pairs[:, 0]), norm_ppf(pairs[:, 1]), sigma)
    many = deg > 2
    if many.any():
        logs = A[many] @ _gaussian_factor_log(x, sigma)
        out[many] = np.exp(logs) @ _factor_rule(sigma)[1]
    return out
