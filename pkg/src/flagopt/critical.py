"""Closed-form critical points and first-order certification.

Enumerators cover:

* the multi-eigenvector problem min/max trace(Z^T A Z) on Z^T Z = Id, whose
  critical subspaces are spanned by eigenvector subsets,
* its linear-objective form over the isospectral flag model, with one
  critical matrix per ordered eigenvector-to-block assignment,
* the heterogeneous quadratics problem for diagonal 3x3 inputs with k=2,
  where all 40 critical points have explicit radical expressions,
* canonical-correlation and correspondence-analysis problems, whose critical
  pairs come from the singular value decomposition.

`verify_first_order` is the shared oracle: a point passes when the objective
gradient lies in the row span of the constraint Jacobian (rank does not grow
when the gradient row is appended) and the constraints vanish.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .builders import build_heterogeneous_lagrange
from .linalg import numerical_rank, random_orthogonal, svd, sym_eig
from .poly import Polynomial, PolySystem
from .varieties import (
    FlagSignature,
    block_values,
    subsets_colex,
    sym_index_pairs,
)

GENERICITY_GAP = 1e-8


class GenericityError(ValueError):
    """Input violates a genericity hypothesis (repeated eigen/singular values)."""


class DegenerateInputError(ValueError):
    """Input makes a closed-form expression collapse (vanishing denominator)."""


@dataclass
class CriticalPointCertificate:
    point: np.ndarray
    residual: float
    rank_gap: int
    passed: bool
    objective: complex | None = None

    def to_json(self):
        point = np.atleast_1d(np.asarray(self.point, dtype=complex))
        obj = None
        if self.objective is not None:
            obj = [complex(self.objective).real, complex(self.objective).imag]
        return {
            "point": [[v.real, v.imag] for v in point],
            "residual": self.residual,
            "rank_gap": self.rank_gap,
            "pass": self.passed,
            "objective": obj,
        }


def verify_first_order(gradient, constraints, point, tol=GENERICITY_GAP,
                       var_tol=1e-8, objective_value=None):
    """First-order certificate: gradient in the row span of the constraint
    Jacobian at an on-variety point.

    Returns a failing certificate (never raises) for off-variety or
    non-stationary points, so negative controls are expressible.
    """
    point = np.asarray(point, dtype=complex)
    gradient = np.asarray(gradient, dtype=complex)
    residual = constraints.residual(point)
    jac = constraints.jacobian_at(point)
    rank = numerical_rank(jac, tol)
    rank_aug = numerical_rank(np.vstack([jac, gradient[None, :]]), tol)
    gap = int(rank_aug - rank)
    return CriticalPointCertificate(
        point=point,
        residual=residual,
        rank_gap=gap,
        passed=(residual < var_tol and gap == 0),
        objective=objective_value,
    )


def _generic_spectrum_or_raise(values, what):
    values = np.asarray(values)
    scale = max(1.0, float(np.abs(values).max()))
    gaps = np.abs(np.diff(np.sort(values)))
    if gaps.size and gaps.min() < GENERICITY_GAP * scale:
        raise GenericityError(f"{what} are not distinct enough for generic formulas")


# ---------------------------------------------------------------------------
# multi-eigenvector problem

def enumerate_multi_eigen(a, k, model="projection"):
    """One critical point per k-subset of eigenvectors of A (colex order).

    model 'projection': rank-k projection matrices P = U_S U_S^T.
    model 'stiefel_orbit_reps': the frames [u_{i_1} ... u_{i_k}] themselves,
    one representative per orthogonal orbit.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    dec = sym_eig(a)
    _generic_spectrum_or_raise(dec.values, "eigenvalues")
    out = []
    for subset in subsets_colex(n, k):
        frame = dec.vectors[:, list(subset)]
        if model == "stiefel_orbit_reps":
            out.append(frame)
        elif model == "projection":
            out.append(frame @ frame.T)
        else:
            raise ValueError(f"unknown model {model!r}")
    return out


def enumerate_iso(a, sig, spectrum, samples_per_orbit=5, seed=0):
    """Critical matrices of min/max trace(A S) over the isospectral model.

    One point per assignment of the eigenvectors of A to the spectrum blocks
    (a multinomial count).  Each point is re-sampled `samples_per_orbit`
    times with random block-orthogonal mixing to confirm it does not depend
    on the orbit representative.
    """
    from .varieties import IsospectralPoint  # local to avoid cycle at import

    a = np.asarray(a, dtype=float)
    n = sig.n
    if a.shape != (n, n):
        raise ValueError("matrix size does not match the signature")
    values = block_values(sig, spectrum)
    sizes = [b for b in sig.block_sizes() if b > 0]
    dec = sym_eig(a)
    _generic_spectrum_or_raise(dec.values, "eigenvalues")
    rng = np.random.default_rng(seed)
    points = []
    for parts in _ordered_partitions(tuple(range(n)), sizes):
        s = np.zeros((n, n))
        for val, block in zip(values, parts):
            basis = dec.vectors[:, list(block)]
            s = s + val * (basis @ basis.T)
        for _ in range(samples_per_orbit):
            mixed = np.zeros((n, n))
            for val, block in zip(values, parts):
                basis = dec.vectors[:, list(block)] @ random_orthogonal(rng, len(block))
                mixed = mixed + val * (basis @ basis.T)
            if np.abs(mixed - s).max() > 1e-10:
                raise RuntimeError("orbit representative is not block-orthogonal invariant")
        points.append(IsospectralPoint(sig, np.asarray(spectrum, dtype=float), s))
    return points


def _ordered_partitions(indices, sizes):
    if not sizes:
        yield ()
        return
    head, *rest = sizes
    for chosen in itertools.combinations(indices, head):
        remaining = tuple(i for i in indices if i not in chosen)
        for tail in _ordered_partitions(remaining, rest):
            yield (chosen,) + tail


# ---------------------------------------------------------------------------
# heterogeneous quadratics, diagonal 3x3, k=2 (the 40 closed-form points)

def enumerate_hetero_diag_3_2(a1, a2):
    """All 40 critical points (Z, mu) for diagonal A_1, A_2 of size 3, k=2.

    24 coordinate solutions Z = [+-e_i, +-e_j] (i != j) plus a 16-element
    sign-flip orbit of one radical solution.  Points are ordered: coordinate
    family first, then the orbit; every point is residual-checked against the
    Lagrange system.
    """
    a1 = np.diag(a1) if np.ndim(a1) == 2 else np.asarray(a1, dtype=float)
    a2 = np.diag(a2) if np.ndim(a2) == 2 else np.asarray(a2, dtype=float)
    if a1.shape != (3,) or a2.shape != (3,):
        raise ValueError("expected diagonal 3x3 inputs")
    _generic_spectrum_or_raise(a1, "entries of the first matrix")
    _generic_spectrum_or_raise(a2, "entries of the second matrix")
    a = np.vstack([a1, a2])
    alpha = (
        a[0, 0] * a[1, 1] - a[0, 0] * a[1, 2] + a[0, 1] * a[1, 2]
        - a[0, 1] * a[1, 0] + a[0, 2] * a[1, 0] - a[0, 2] * a[1, 1]
    )
    scale = max(1.0, np.abs(a).max() ** 2)
    if abs(alpha) < 1e-10 * scale:
        raise DegenerateInputError("the closed-form denominator vanishes for this input")

    system = build_heterogeneous_lagrange([np.diag(a1), np.diag(a2)])
    check_tol = 1e-10 * scale

    points = []
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    vec = np.zeros(9, dtype=complex)
                    vec[i] = si
                    vec[3 + j] = sj
                    vec[6] = a1[i]  # mu_11
                    vec[7] = 0.0    # mu_12
                    vec[8] = a2[j]  # mu_22
                    points.append(vec)
    for vec in points:
        if system.residual(vec) > check_tol:
            raise RuntimeError("coordinate solution failed its residual check")

    base_z, base_mu = _hetero_radical_base(a, alpha, system, check_tol)
    orbit = {}
    for row_bits in range(8):
        d_r = np.array([1.0 if row_bits >> i & 1 == 0 else -1.0 for i in range(3)])
        for col_bits in range(4):
            d_c = np.array([1.0 if col_bits >> i & 1 == 0 else -1.0 for i in range(2)])
            z = (d_r[:, None] * base_z) * d_c[None, :]
            mu = base_mu.copy()
            mu[1] = d_c[0] * d_c[1] * base_mu[1]  # columns flip the cross multiplier
            vec = np.concatenate([z.flatten(order="F"), mu])
            key = tuple(np.round(vec, 9).tolist())
            if key in orbit:
                continue
            if system.residual(vec) > 1e-8 * scale:
                raise RuntimeError("sign-flipped radical solution failed its residual check")
            orbit[key] = vec
    if len(orbit) != 16:
        raise RuntimeError(f"sign orbit has {len(orbit)} members, expected 16")
    points.extend(orbit.values())
    return points


def _hetero_radical_base(a, alpha, system, check_tol):
    """Radical solution with square-root branches fixed by residual search.

    The radical expressions determine each entry of Z and the cross
    multiplier only up to branch choices that row/column flips cannot repair:
    with all-principal branches Z^T Z comes out as -Id (fixed by a global
    factor i) and the cross multiplier is stated with a spurious factor 2
    (both confirmed against homotopy endpoints).  The finite candidate set
    {1, i} x 2^6 entry signs x 4 cross-multiplier values is searched for a
    point that actually solves the Lagrange system.
    """
    csqrt = lambda v: np.sqrt(complex(v))
    f = [
        csqrt(a[0, 1] - a[0, 2] + a[1, 2] - a[1, 1]),
        csqrt(a[0, 0] - a[0, 2] + a[1, 2] - a[1, 0]),
        csqrt(a[0, 0] - a[0, 1] + a[1, 1] - a[1, 0]),
    ]
    w = np.array(
        [
            [
                csqrt(-(a[0, 1] - a[0, 2]) * (a[1, 0] - a[1, 1]) * (a[1, 0] - a[1, 2])),
                csqrt((a[1, 1] - a[1, 2]) * (a[0, 0] - a[0, 1]) * (a[0, 0] - a[0, 2])),
            ],
            [
                csqrt(-(a[0, 0] - a[0, 2]) * (a[1, 1] - a[1, 0]) * (a[1, 1] - a[1, 2])),
                csqrt((a[1, 0] - a[1, 2]) * (a[0, 1] - a[0, 0]) * (a[0, 1] - a[0, 2])),
            ],
            [
                csqrt(-(a[0, 0] - a[0, 1]) * (a[1, 2] - a[1, 0]) * (a[1, 2] - a[1, 1])),
                csqrt((a[1, 0] - a[1, 1]) * (a[0, 2] - a[0, 0]) * (a[0, 2] - a[0, 1])),
            ],
        ]
    )
    z_mag = np.array([[f[i] * w[i, c] / alpha for c in range(2)] for i in range(3)])
    mu11 = (
        -a[0, 0] * a[0, 1] * (a[1, 0] - a[1, 1])
        + a[0, 0] * a[0, 2] * (a[1, 0] - a[1, 2])
        - a[0, 1] * a[0, 2] * (a[1, 1] - a[1, 2])
    ) / alpha
    mu22 = (
        a[1, 0] * a[1, 1] * (a[0, 0] - a[0, 1])
        - a[1, 0] * a[1, 2] * (a[0, 0] - a[0, 2])
        + a[1, 1] * a[1, 2] * (a[0, 1] - a[0, 2])
    ) / alpha
    mu12 = (
        2.0
        * csqrt(
            -(a[0, 0] - a[0, 1])
            * (a[0, 0] - a[0, 2])
            * (a[0, 1] - a[0, 2])
            * (a[1, 0] - a[1, 1])
            * (a[1, 0] - a[1, 2])
            * (a[1, 1] - a[1, 2])
        )
        / alpha
    )
    for phase in (1.0, 1.0j):
        for signs in itertools.product((1.0, -1.0), repeat=6):
            z = phase * z_mag * np.array(signs).reshape(3, 2)
            for m12 in (mu12, 0.5 * mu12, -mu12, -0.5 * mu12):
                mu = np.array([mu11, m12, mu22], dtype=complex)
                vec = np.concatenate([z.flatten(order="F"), mu])
                if system.residual(vec) < check_tol:
                    return z, mu
    raise RuntimeError("no branch assignment of the radical formulas solves the system")


# ---------------------------------------------------------------------------
# statistics problems

def enumerate_cca(a, k):
    """Critical pairs (U, V) of the canonical correlation problem.

    Choose k singular triples (colex), arrange them in every order, and flip
    each pair's joint sign: binom(min(p,q),k) * k! * 2^k pairs in total.
    """
    a = np.asarray(a, dtype=float)
    p, q = a.shape
    m = min(p, q)
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= min(p, q), got k={k}")
    factors = svd(a)
    sing = factors.singulars
    _generic_spectrum_or_raise(sing, "singular values")
    if sing.min() < GENERICITY_GAP * max(1.0, sing.max()):
        raise GenericityError("singular values must be nonzero")
    out = []
    for subset in subsets_colex(m, k):
        for perm in itertools.permutations(range(k)):
            chosen = [subset[i] for i in perm]
            for bits in range(2**k):
                signs = np.array([1.0 if bits >> i & 1 == 0 else -1.0 for i in range(k)])
                u = factors.left[:, chosen] * signs
                v = factors.right[:, chosen] * signs
                out.append((u, v))
    return out


def cca_pair_residual(a, u, v):
    """Max deviation from A v_i = lambda_i u_i and A^T u_i = eta_i v_i."""
    a = np.asarray(a, dtype=float)
    worst = 0.0
    for i in range(u.shape[1]):
        ui, vi = u[:, i], v[:, i]
        av = a @ vi
        lam = ui @ av  # optimal scalar for unit u_i
        atu = a.T @ ui
        eta = vi @ atu
        worst = max(worst, np.abs(av - lam * ui).max(), np.abs(atu - eta * vi).max())
        worst = max(
            worst, abs(ui @ ui - 1.0), abs(vi @ vi - 1.0)
        )
    return worst


def enumerate_ca(a, k, mode="matrix_form"):
    """Critical points of the correspondence-analysis trace problem.

    mode 'orbit_reps': pairs (U_S, V_S) of singular vector frames, one per
    k-subset (identity orbit representative).
    mode 'matrix_form': the rank-k partial isometries M = V_S U_S^T.
    """
    a = np.asarray(a, dtype=float)
    n, p = a.shape
    if p <= n:
        raise ValueError(f"expected a wide matrix (p > n), got shape {a.shape}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    factors = svd(a)
    _generic_spectrum_or_raise(factors.singulars, "singular values")
    out = []
    for subset in subsets_colex(n, k):
        u = factors.left[:, list(subset)]
        v = factors.right[:, list(subset)]
        if mode == "orbit_reps":
            out.append((u, v))
        elif mode == "matrix_form":
            out.append(v @ u.T)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out


def stiefel_pair_constraints(p, q, k):
    """U^T U = Id and V^T V = Id for a (p x k, q x k) pair, column-major."""
    nvars = p * k + q * k
    polys = []
    for offset, rows in ((0, p), (p * k, q)):
        var = lambda r, c: Polynomial.variable(nvars, offset + c * rows + r)
        for a_col in range(k):
            for b_col in range(a_col, k):
                acc = Polynomial.zero(nvars)
                for r in range(rows):
                    acc = acc + var(r, a_col) * var(r, b_col)
                polys.append(acc - (1.0 if a_col == b_col else 0.0))
    return PolySystem(polys, [("U", p * k), ("V", q * k)], origin=f"stiefel-pair:{p},{q},{k}")


def stiefel_pair_gradient(a, u, v):
    """Gradient of trace(U^T A V) stacked column-major over (U, V)."""
    a = np.asarray(a, dtype=float)
    return np.concatenate([(a @ v).flatten(order="F"), (a.T @ u).flatten(order="F")])


def partial_isometry_constraints(p, n, k):
    """M M^T M = M and trace(M M^T) = k for a p x n matrix, column-major.

    This presentation of the rank-k partial isometries has a full-rank
    Jacobian on the variety, unlike the quartic (MM^T)^2 = MM^T form, so it
    is the one used for rank-based certification.
    """
    nvars = p * n
    var = lambda r, c: Polynomial.variable(nvars, c * p + r)
    m = np.empty((p, n), dtype=object)
    for r in range(p):
        for c in range(n):
            m[r, c] = var(r, c)
    mmt = np.empty((p, p), dtype=object)
    for r in range(p):
        for c in range(p):
            acc = Polynomial.zero(nvars)
            for t in range(n):
                acc = acc + m[r, t] * m[c, t]
            mmt[r, c] = acc
    polys = []
    for r in range(p):
        for c in range(n):
            acc = Polynomial.zero(nvars)
            for t in range(p):
                acc = acc + mmt[r, t] * m[t, c]
            polys.append(acc - m[r, c])
    tr = Polynomial.zero(nvars)
    for r in range(p):
        tr = tr + mmt[r, r]
    polys.append(tr - float(k))
    return PolySystem(polys, [("M", nvars)], origin=f"partial-isometry:{p},{n},{k}")


def ca_matrix_gradient(a, p, n):
    """Gradient of trace(A M) for M p x n, column-major (that is, vec(A^T))."""
    return np.asarray(a, dtype=float).T.flatten(order="F")


def ed_gradient(a, s):
    """Gradient of ||A - S||_F^2 in upper-triangle coordinates of S."""
    a = np.asarray(a, dtype=float)
    s = np.asarray(s)
    return np.array(
        [
            2.0 * (s[i, i] - a[i, i]) if i == j else 4.0 * (s[i, j] - a[i, j])
            for i, j in sym_index_pairs(a.shape[0])
        ]
    )


# ---------------------------------------------------------------------------
# count formulas

def count_formula(name, **params):
    """Exact critical-point counts for each named problem family."""
    if name in ("multi_eigen_gr", "lo_pgr"):
        return comb(params["n"], params["k"])
    if name == "lo_iso":
        sig = params["sig"]
        if not isinstance(sig, FlagSignature):
            sig = FlagSignature(tuple(sig), params["n"])
        total = factorial(sig.n)
        for b in sig.block_sizes():
            total //= factorial(b)
        return total
    if name == "cca":
        m = min(params["p"], params["q"])
        k = params["k"]
        return comb(m, k) * factorial(k) * 2**k
    if name == "ca":
        return comb(params["n"], params["k"])
    if name == "hetero_k2_conjecture":
        n = params["n"]
        return 8 * sum(j * j for j in range(1, n))
    raise ValueError(f"unknown count formula {name!r}")
