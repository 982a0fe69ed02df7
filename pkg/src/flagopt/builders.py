"""Builders for the polynomial systems whose solutions are critical points.

Three families:

* the Lagrange system of the heterogeneous quadratics problem
  min sum_i Z_i^T A_i Z_i over Z^T Z = Id  (square, all degree 2),
* the commutator reformulation of the same problem (generally overdetermined,
  used for residual cross-checks only),
* linear-optimization Lagrange systems over the projection and isospectral
  models, with the overdetermined generator set sliced down to a square
  complete intersection by a seeded random complex matrix.
"""

from __future__ import annotations

import numpy as np

from .poly import Polynomial, PolySystem
from .varieties import (
    ambient_dimension,
    generators,
    trace_objective_gradient,
    variety_dimension,
)


def _embed(poly, nvars, offset=0):
    terms = {}
    for exps, coeff in poly.terms.items():
        new = [0] * nvars
        new[offset : offset + len(exps)] = exps
        terms[tuple(new)] = coeff
    return Polynomial(nvars, terms)


def mu_index_pairs(k):
    return [(i, j) for i in range(k) for j in range(i, k)]


def build_heterogeneous_lagrange(a_list):
    """Square Lagrange system A_i Z_i = sum_j mu_ij Z_j, Z^T Z = Id.

    Variable blocks: Z (n*k entries, column-major) then the symmetric
    multiplier matrix mu (k(k+1)/2 entries, upper triangle row-wise).
    """
    a_list = [np.asarray(a, dtype=float) for a in a_list]
    k = len(a_list)
    if k == 0:
        raise ValueError("need at least one matrix")
    n = a_list[0].shape[0]
    for a in a_list:
        if a.shape != (n, n):
            raise ValueError("all matrices must be symmetric of one size")
        if np.abs(a - a.T).max() > 1e-12 * max(1.0, np.abs(a).max()):
            raise ValueError("matrices must be symmetric")
    if k > n:
        raise ValueError(f"need k <= n, got k={k}, n={n}")

    pairs = mu_index_pairs(k)
    nvars = n * k + len(pairs)
    z = lambda row, col: Polynomial.variable(nvars, col * n + row)
    mu_idx = {p: n * k + i for i, p in enumerate(pairs)}
    mu = lambda i, j: Polynomial.variable(nvars, mu_idx[(min(i, j), max(i, j))])

    polys = []
    for col in range(k):
        for row in range(n):
            acc = Polynomial.zero(nvars)
            for t in range(n):
                if a_list[col][row, t] != 0.0:
                    acc = acc + a_list[col][row, t] * z(t, col)
            for j in range(k):
                acc = acc - mu(col, j) * z(row, j)
            polys.append(acc)
    for a, b in pairs:
        acc = Polynomial.zero(nvars)
        for row in range(n):
            acc = acc + z(row, a) * z(row, b)
        polys.append(acc - (1.0 if a == b else 0.0))
    return PolySystem(
        polys,
        [("Z", n * k), ("mu", len(pairs))],
        origin=f"hetero-lagrange:n={n},k={k}",
    )


def build_commutator_system(a_list):
    """[A_1 Z_1 ... A_k Z_k] Z^T - Z [...]^T = 0 together with Z^T Z = Id.

    Multiplier-free; binom(n,2) + binom(k+1,2) equations in n*k variables, so
    generally not square.  Used to verify candidate critical points.
    """
    a_list = [np.asarray(a, dtype=float) for a in a_list]
    k = len(a_list)
    n = a_list[0].shape[0]
    nvars = n * k
    z = lambda row, col: Polynomial.variable(nvars, col * n + row)

    # W[:, i] = A_i Z_i as polynomials
    w = [[Polynomial.zero(nvars) for _ in range(k)] for _ in range(n)]
    for col in range(k):
        for row in range(n):
            for t in range(n):
                if a_list[col][row, t] != 0.0:
                    w[row][col] = w[row][col] + a_list[col][row, t] * z(t, col)

    polys = []
    for a in range(n):
        for b in range(a + 1, n):
            acc = Polynomial.zero(nvars)
            for col in range(k):
                acc = acc + w[a][col] * z(b, col) - z(a, col) * w[b][col]
            polys.append(acc)
    for a in range(k):
        for b in range(a, k):
            acc = Polynomial.zero(nvars)
            for row in range(n):
                acc = acc + z(row, a) * z(row, b)
            polys.append(acc - (1.0 if a == b else 0.0))
    return PolySystem(polys, [("Z", nvars)], origin=f"hetero-commutator:n={n},k={k}")


def build_lo_system(model, sig, c_matrix, seed, spectrum=None):
    """Square Lagrange system for min trace(C . X) over the model variety.

    The model generators are not a complete intersection, so the constraints
    are replaced by codim-many random complex combinations (seeded); genuine
    critical points survive the slicing, and endpoints are filtered against
    the full generator set afterwards.
    """
    if model not in ("projection", "isospectral"):
        raise ValueError(f"unsupported model {model!r} for linear optimization")
    if model == "projection" and sig.r != 1:
        raise ValueError(
            "projection-model linear optimization is implemented for Grassmannians "
            "(single-step signatures); use the isospectral model for longer flags"
        )
    c_matrix = np.asarray(c_matrix, dtype=float)
    if c_matrix.shape != (sig.n, sig.n) or np.abs(c_matrix - c_matrix.T).max() > 1e-12:
        raise ValueError("objective matrix must be symmetric n x n")

    full = generators(model, sig, spectrum=spectrum)
    n_amb = ambient_dimension(model, sig)
    codim = n_amb - variety_dimension(model, sig)
    rng = np.random.default_rng(seed)
    mix = rng.standard_normal((codim, full.npolys)) + 1j * rng.standard_normal(
        (codim, full.npolys)
    )

    nvars = n_amb + codim
    sliced = []
    for a in range(codim):
        acc = Polynomial.zero(nvars)
        for g_idx, g in enumerate(full.polys):
            acc = acc + mix[a, g_idx] * _embed(g, nvars)
        sliced.append(acc)

    grad = trace_objective_gradient(c_matrix)
    polys = []
    for j in range(n_amb):
        acc = Polynomial.constant(nvars, grad[j])
        for a in range(codim):
            lam = Polynomial.variable(nvars, n_amb + a)
            acc = acc - lam * sliced[a].diff(j)
        polys.append(acc)
    polys.extend(sliced)
    return PolySystem(
        polys,
        [("x", n_amb), ("lambda", codim)],
        origin=f"lo-{model}:{sig.parse_key()},seed={seed}",
    )


def multiplier_least_squares(lo_system, x_point):
    """Best-fit multipliers for the stationarity block of a Lagrange system.

    The stationarity equations are affine in the multipliers, so the optimal
    lambda solves a linear least-squares problem.  Returns (lambda, residual)
    where the residual is the max norm of the stationarity equations at the
    fitted multipliers.
    """
    x_slice = lo_system.block_slice("x")
    lam_slice = lo_system.block_slice("lambda")
    n_x = x_slice.stop - x_slice.start
    n_lam = lam_slice.stop - lam_slice.start
    point0 = np.zeros(lo_system.nvars, dtype=complex)
    point0[x_slice] = x_point
    values = lo_system.compiled().eval_many(point0[None, :])[0][:n_x]
    jac = lo_system.compiled().jac_many(point0[None, :])[0][:n_x, lam_slice]
    lam, *_ = np.linalg.lstsq(jac, -values, rcond=None)
    residual = float(np.abs(values + jac @ lam).max())
    return lam, residual
