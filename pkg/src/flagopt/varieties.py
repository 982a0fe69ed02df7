"""Coordinate models of flag varieties and the maps between them.

Four realizations of Fl(k_1,...,k_r; n) are supported:

* ``stiefel``      -- an n x k_r frame Z with Z^T Z = Id,
* ``pluecker``     -- tuples of maximal minors, one block per step,
* ``projection``   -- a tuple (P_1,...,P_r) of orthogonal projection matrices
                      with P_i P_j = P_j and trace(P_i) = k_i,
* ``isospectral``  -- a single symmetric matrix with a fixed generic spectrum
                      whose repetition pattern encodes the step sizes.

Each model comes with polynomial generators of its defining ideal, and
conversions follow the edges: Stiefel -> {Pluecker, Projection, Isospectral},
Projection -> {Stiefel, Isospectral}, Isospectral -> Stiefel.  The
Pluecker -> Projection direction needs an external construction and is
deliberately not provided.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .linalg import orthonormal_complete, random_stiefel, sym_eig, numerical_rank
from .poly import Polynomial, PolySystem

MODELS = ("stiefel", "pluecker", "projection", "isospectral")

DEFAULT_VAR_TOL = 1e-8

_SUPPORTED_EDGES = {
    ("stiefel", "pluecker"),
    ("stiefel", "projection"),
    ("stiefel", "isospectral"),
    ("projection", "stiefel"),
    ("projection", "isospectral"),
    ("isospectral", "stiefel"),
}


class UnsupportedEdgeError(ValueError):
    """Requested a conversion edge that has no known closed-form map."""


class OffVarietyError(ValueError):
    """Point does not satisfy the model's defining equations."""


@dataclass(frozen=True)
class FlagSignature:
    """The flag type (k_1 < ... < k_r; n)."""

    steps: tuple
    n: int

    def __post_init__(self):
        steps = tuple(int(k) for k in self.steps)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "n", int(self.n))
        if not steps:
            raise ValueError("signature needs at least one step")
        if steps[0] < 1 or steps[-1] > self.n:
            raise ValueError(f"steps {steps} out of range for n={self.n}")
        if any(a >= b for a, b in zip(steps, steps[1:])):
            raise ValueError(f"steps {steps} must be strictly increasing")

    @property
    def r(self):
        return len(self.steps)

    def block_sizes(self):
        """Sizes (k_1, k_2-k_1, ..., n-k_r); the last entry may be 0."""
        ext = (0,) + self.steps + (self.n,)
        return tuple(ext[i + 1] - ext[i] for i in range(len(ext) - 1))

    def dimension(self):
        return flag_dimension(self)

    def parse_key(self):
        return ",".join(str(k) for k in self.steps) + f":{self.n}"

    @classmethod
    def parse(cls, text):
        """Parse 'k1,k2,...:n' (e.g. '1,2:3')."""
        try:
            steps_part, n_part = text.split(":")
            steps = tuple(int(s) for s in steps_part.split(","))
            return cls(steps, int(n_part))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"cannot parse signature {text!r}; expected 'k1,k2:n'") from exc

    def to_json(self):
        return {"steps": list(self.steps), "n": self.n}

    @classmethod
    def from_json(cls, data):
        return cls(tuple(data["steps"]), data["n"])


def flag_dimension(sig):
    """sum_i (k_i - k_{i-1}) (n - k_i)."""
    ks = (0,) + sig.steps
    return sum((ks[i + 1] - ks[i]) * (sig.n - ks[i + 1]) for i in range(sig.r))


def stiefel_dimension(n, k):
    """n k - k(k+1)/2, the dimension of the variety of orthonormal k-frames."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return n * k - comb(k + 1, 2)


# ---------------------------------------------------------------------------
# symmetric-matrix coordinates (row-wise upper triangle)

def sym_index_pairs(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def sym_to_vec(s):
    n = s.shape[0]
    return np.array([s[i, j] for i, j in sym_index_pairs(n)])

def vec_to_sym(v, n):
    s = np.zeros((n, n), dtype=np.asarray(v).dtype)
    for (i, j), value in zip(sym_index_pairs(n), v):
        s[i, j] = value
        s[j, i] = value
    return s


def sym_poly_matrix(n, nvars, offset):
    """n x n matrix of variables for a symmetric matrix stored upper-triangle
    row-wise starting at variable `offset`."""
    mat = np.empty((n, n), dtype=object)
    for idx, (i, j) in enumerate(sym_index_pairs(n)):
        v = Polynomial.variable(nvars, offset + idx)
        mat[i, j] = v
        mat[j, i] = v
    return mat


def _poly_matmul(a, b, nvars):
    n, m = a.shape
    m2, p = b.shape
    out = np.empty((n, p), dtype=object)
    for i in range(n):
        for j in range(p):
            acc = Polynomial.zero(nvars)
            for t in range(m):
                acc = acc + a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def trace_objective_gradient(c, n=None):
    """Gradient of trace(C . S) in upper-triangle coordinates of S.

    Off-diagonal coordinates appear twice in the trace, hence the factor 2.
    """
    c = np.asarray(c, dtype=float)
    return np.array(
        [c[i, i] if i == j else 2.0 * c[i, j] for i, j in sym_index_pairs(c.shape[0])]
    )


# ---------------------------------------------------------------------------
# subset enumeration

def subsets_lex(n, k):
    return list(itertools.combinations(range(n), k))


def subsets_colex(n, k):
    return sorted(itertools.combinations(range(n), k), key=lambda s: tuple(reversed(s)))


# ---------------------------------------------------------------------------
# spectra for the isospectral model

def default_spectrum(sig, rng=None):
    """Block-constant spectrum (r+1, r, ..., 1), optionally perturbed by
    seeded noise of size 1e-2 so 'generic' hypotheses hold."""
    sizes = sig.block_sizes()
    nonempty = [s for s in sizes if s > 0]
    base = list(range(len(nonempty), 0, -1))
    if rng is not None:
        base = [b + 1e-2 * rng.uniform(-1.0, 1.0) for b in base]
    out = []
    idx = 0
    for size in sizes:
        if size == 0:
            continue
        out.extend([base[idx]] * size)
        idx += 1
    return np.array(out)


def validate_spectrum(sig, spectrum):
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape != (sig.n,):
        raise ValueError(f"spectrum must have length n={sig.n}")
    sizes = sig.block_sizes()
    values = []
    pos = 0
    for size in sizes:
        if size == 0:
            continue
        block = spectrum[pos : pos + size]
        if np.abs(block - block[0]).max() > 0:
            raise ValueError(
                f"spectrum {spectrum} is not constant on the block at positions {pos}..{pos+size-1}"
            )
        values.append(block[0])
        pos += size
    values = np.asarray(values)
    gaps = np.abs(values[:, None] - values[None, :])[~np.eye(len(values), dtype=bool)]
    if len(values) > 1 and gaps.min() < 1e-8 * max(1.0, np.abs(values).max()):
        raise ValueError("spectrum block values are not distinct")
    return values


def block_values(sig, spectrum):
    """Distinct spectrum value of each nonempty block, in block order."""
    return validate_spectrum(sig, spectrum)


# ---------------------------------------------------------------------------
# points

@dataclass
class StiefelPoint:
    sig: FlagSignature
    z: np.ndarray
    model = "stiefel"

    def coordinates(self):
        return self.z.flatten(order="F")  # column-major: frame vector by frame vector

    def validate(self, tol=DEFAULT_VAR_TOL):
        k = self.sig.steps[-1]
        if self.z.shape != (self.sig.n, k):
            raise OffVarietyError(f"frame shape {self.z.shape} != ({self.sig.n}, {k})")
        err = np.abs(self.z.T @ self.z - np.eye(k)).max()
        if err > tol:
            raise OffVarietyError(f"frame is not orthonormal (residual {err:.2e})")

    def to_json(self):
        return {"model": self.model, "sig": self.sig.to_json(), "data": self.z.tolist()}


@dataclass
class ProjectionFlagPoint:
    sig: FlagSignature
    mats: list
    model = "projection"

    def coordinates(self):
        return np.concatenate([sym_to_vec(p) for p in self.mats])

    def validate(self, tol=DEFAULT_VAR_TOL):
        if len(self.mats) != self.sig.r:
            raise OffVarietyError("wrong number of projection matrices")
        for i, p in enumerate(self.mats):
            if np.abs(p @ p - p).max() > tol:
                raise OffVarietyError(f"P_{i+1} is not idempotent")
            if abs(np.trace(p) - self.sig.steps[i]) > tol:
                raise OffVarietyError(f"trace(P_{i+1}) != {self.sig.steps[i]}")
            if i > 0 and np.abs(p @ self.mats[i - 1] - self.mats[i - 1]).max() > tol:
                raise OffVarietyError(f"P_{i+1} P_{i} != P_{i}")

    def to_json(self):
        return {
            "model": self.model,
            "sig": self.sig.to_json(),
            "data": [p.tolist() for p in self.mats],
        }


@dataclass
class IsospectralPoint:
    sig: FlagSignature
    spectrum: np.ndarray
    s: np.ndarray
    model = "isospectral"

    def coordinates(self):
        return sym_to_vec(self.s)

    def validate(self, tol=DEFAULT_VAR_TOL):
        values = block_values(self.sig, self.spectrum)
        prod = np.eye(self.sig.n)
        for v in values:
            prod = prod @ (self.s - v * np.eye(self.sig.n))
        if np.abs(prod).max() > tol * max(1.0, np.abs(self.s).max() ** len(values)):
            raise OffVarietyError("minimal polynomial residual too large")
        if abs(np.trace(self.s) - self.spectrum.sum()) > tol:
            raise OffVarietyError("trace does not match the spectrum")

    def to_json(self):
        return {
            "model": self.model,
            "sig": self.sig.to_json(),
            "data": self.s.tolist(),
            "spectrum": list(self.spectrum),
        }


@dataclass
class PlueckerPoint:
    sig: FlagSignature
    coords: list
    model = "pluecker"

    def coordinates(self):
        return np.concatenate([np.asarray(c) for c in self.coords])

    def validate(self, tol=DEFAULT_VAR_TOL):
        for s, block in enumerate(self.coords):
            block = np.asarray(block)
            if block.shape != (comb(self.sig.n, self.sig.steps[s]),):
                raise OffVarietyError("wrong Pluecker block length")
            if np.abs(block).max() <= tol:
                raise OffVarietyError(f"Pluecker block {s} is numerically zero")
        sys = generators("pluecker", self.sig)
        if sys.polys and sys.residual(self.coordinates().astype(complex)) > tol:
            raise OffVarietyError("exchange quadrics do not vanish")

    def to_json(self):
        return {
            "model": self.model,
            "sig": self.sig.to_json(),
            "data": [np.asarray(c).tolist() for c in self.coords],
        }


def point_from_json(data):
    sig = FlagSignature.from_json(data["sig"])
    model = data["model"]
    if model == "stiefel":
        return StiefelPoint(sig, np.array(data["data"], dtype=float))
    if model == "projection":
        return ProjectionFlagPoint(sig, [np.array(m, dtype=float) for m in data["data"]])
    if model == "isospectral":
        return IsospectralPoint(sig, np.array(data["spectrum"], dtype=float), np.array(data["data"], dtype=float))
    if model == "pluecker":
        return PlueckerPoint(sig, [np.array(c, dtype=float) for c in data["data"]])
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# ambient dimensions

def ambient_dimension(model, sig):
    n = sig.n
    if model == "stiefel":
        return n * sig.steps[-1]
    if model == "projection":
        return sig.r * comb(n + 1, 2)
    if model == "isospectral":
        return comb(n + 1, 2)
    if model == "pluecker":
        return sum(comb(n, k) for k in sig.steps)
    raise ValueError(f"unknown model {model!r}")


def variety_dimension(model, sig):
    """Dimension of the affine variety the generators cut out.

    The Pluecker model is a multi-cone: one extra scaling per step on top of
    the flag dimension.
    """
    if model == "stiefel":
        return stiefel_dimension(sig.n, sig.steps[-1])
    if model in ("projection", "isospectral"):
        return flag_dimension(sig)
    if model == "pluecker":
        return flag_dimension(sig) + sig.r
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# generators

def generators(model, sig, spectrum=None):
    """Polynomial generators of the model's defining ideal."""
    if model == "stiefel":
        return _stiefel_generators(sig)
    if model == "projection":
        return _projection_generators(sig)
    if model == "isospectral":
        if spectrum is None:
            raise ValueError("the isospectral model needs a spectrum")
        return _isospectral_generators(sig, spectrum)
    if model == "pluecker":
        return _pluecker_generators(sig)
    raise ValueError(f"unknown model {model!r}")


def _stiefel_generators(sig):
    n, k = sig.n, sig.steps[-1]
    nvars = n * k
    var = lambda i, j: Polynomial.variable(nvars, j * n + i)  # column-major
    polys = []
    for a in range(k):
        for b in range(a, k):
            acc = Polynomial.zero(nvars)
            for i in range(n):
                acc = acc + var(i, a) * var(i, b)
            polys.append(acc - (1.0 if a == b else 0.0))
    return PolySystem(polys, [("Z", nvars)], origin=f"stiefel:{sig.parse_key()}")


def _projection_generators(sig):
    n, r = sig.n, sig.r
    n0 = comb(n + 1, 2)
    nvars = r * n0
    mats = [sym_poly_matrix(n, nvars, i * n0) for i in range(r)]
    polys = []
    for i in range(r):
        sq = _poly_matmul(mats[i], mats[i], nvars)
        for a, b in sym_index_pairs(n):
            polys.append(sq[a, b] - mats[i][a, b])
    # P_i P_{i-1} - P_{i-1} is not symmetric: keep all n^2 entries, the
    # lower-triangle rows carry the Jacobian rank at coordinate flags.
    for i in range(1, r):
        prod = _poly_matmul(mats[i], mats[i - 1], nvars)
        for a in range(n):
            for b in range(n):
                polys.append(prod[a, b] - mats[i - 1][a, b])
    for i in range(r):
        tr = Polynomial.zero(nvars)
        for a in range(n):
            tr = tr + mats[i][a, a]
        polys.append(tr - float(sig.steps[i]))
    blocks = [(f"P{i+1}", n0) for i in range(r)]
    return PolySystem(polys, blocks, origin=f"projection:{sig.parse_key()}")


def _isospectral_generators(sig, spectrum):
    n = sig.n
    values = block_values(sig, spectrum)
    n0 = comb(n + 1, 2)
    mat = sym_poly_matrix(n, n0, 0)
    prod = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            prod[i, j] = Polynomial.constant(n0, 1.0 if i == j else 0.0)
    for v in values:
        shifted = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                shifted[i, j] = mat[i, j] - (v if i == j else 0.0)
        prod = _poly_matmul(prod, shifted, n0)
    polys = [prod[a, b] for a, b in sym_index_pairs(n)]
    tr = Polynomial.zero(n0)
    for a in range(n):
        tr = tr + mat[a, a]
    polys.append(tr - float(np.sum(spectrum)))
    return PolySystem(polys, [("S", n0)], origin=f"isospectral:{sig.parse_key()}")


def _pluecker_var(sig, step_index, subset, nvars, offsets, index_maps):
    """Signed coordinate for a possibly unsorted index tuple; None if repeated."""
    if len(set(subset)) != len(subset):
        return None, 0
    order = tuple(sorted(subset))
    perm_sign = _sort_sign(subset)
    idx = offsets[step_index] + index_maps[step_index][order]
    return Polynomial.variable(nvars, idx), perm_sign


def _sort_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign


def _pluecker_generators(sig):
    n = sig.n
    sizes = [comb(n, k) for k in sig.steps]
    nvars = sum(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])[:-1]
    index_maps = [
        {s: i for i, s in enumerate(subsets_lex(n, k))} for k in sig.steps
    ]
    seen = {}
    polys = []
    for s in range(sig.r):
        for t in range(s, sig.r):
            ks, kt = sig.steps[s], sig.steps[t]
            if kt + 1 > n:
                continue
            for alpha in itertools.combinations(range(n), ks - 1):
                for beta in itertools.combinations(range(n), kt + 1):
                    poly = Polynomial.zero(nvars)
                    for pos, b in enumerate(beta):
                        left, sgn_l = _pluecker_var(
                            sig, s, alpha + (b,), nvars, offsets, index_maps
                        )
                        if left is None:
                            continue
                        rest = beta[:pos] + beta[pos + 1 :]
                        right, _ = _pluecker_var(sig, t, rest, nvars, offsets, index_maps)
                        poly = poly + ((-1) ** pos * sgn_l) * (left * right)
                    key = _canonical_key(poly)
                    if key is not None and key not in seen:
                        seen[key] = True
                        polys.append(poly)
    blocks = [(f"x{k}", comb(n, k)) for k in sig.steps]
    return PolySystem(polys, blocks, origin=f"pluecker:{sig.parse_key()}")


def _canonical_key(poly):
    if poly.is_zero():
        return None
    items = sorted(poly.terms.items())
    lead = items[0][1]
    return tuple((e, complex(c / lead)) for e, c in items)


# ---------------------------------------------------------------------------
# conversions

def convert(point, target, spectrum=None):
    """Move a point to another coordinate model along a supported edge."""
    source = point.model
    if source == target:
        return point
    if (source, target) not in _SUPPORTED_EDGES:
        raise UnsupportedEdgeError(
            f"no conversion from {source!r} to {target!r}"
            + (
                " (the Pluecker->Projection map needs an external cocircuit construction)"
                if (source, target) == ("pluecker", "projection")
                else ""
            )
        )
    point.validate()
    sig = point.sig
    if source == "stiefel":
        out = _from_stiefel(point, target, spectrum)
    elif source == "projection":
        if target == "stiefel":
            out = _projection_to_stiefel(point)
        else:
            out = _projection_to_isospectral(point, spectrum)
    else:  # isospectral
        out = _isospectral_to_stiefel(point)
    try:
        out.validate()
    except OffVarietyError as exc:
        raise RuntimeError(f"conversion {source}->{target} left the variety: {exc}") from exc
    return out


def _require_spectrum(sig, spectrum):
    if spectrum is None:
        raise ValueError("converting to the isospectral model needs a spectrum")
    spectrum = np.asarray(spectrum, dtype=float)
    validate_spectrum(sig, spectrum)
    return spectrum


def _from_stiefel(point, target, spectrum):
    sig, z = point.sig, point.z
    if target == "pluecker":
        blocks = []
        for k in sig.steps:
            sub = z[:, :k]
            blocks.append(
                np.array([np.linalg.det(sub[list(rows), :]) for rows in subsets_lex(sig.n, k)])
            )
        return PlueckerPoint(sig, blocks)
    if target == "projection":
        mats = [z[:, :k] @ z[:, :k].T for k in sig.steps]
        return ProjectionFlagPoint(sig, mats)
    spectrum = _require_spectrum(sig, spectrum)
    zt = z if z.shape[1] == sig.n else orthonormal_complete(z)
    s = (zt * spectrum) @ zt.T
    return IsospectralPoint(sig, spectrum, s)


def _projection_to_stiefel(point):
    """Spectral factorization of the projections, one nested block at a time.

    P_i - P_{i-1} is itself an orthogonal projection whose image is the
    orthogonal complement of W_{i-1} inside W_i, so its unit-eigenvalue
    eigenvectors extend the frame.
    """
    sig = point.sig
    cols = []
    prev = np.zeros((sig.n, sig.n))
    ks = (0,) + sig.steps
    for i, p in enumerate(point.mats):
        diff = p - prev
        dec = sym_eig(diff)
        want = ks[i + 1] - ks[i]
        chosen = [dec.vectors[:, j] for j in range(sig.n) if dec.values[j] > 0.5]
        if len(chosen) != want:
            raise OffVarietyError(
                f"P_{i+1} - P_{i} has {len(chosen)} unit eigenvalues, expected {want}"
            )
        cols.extend(chosen)
        prev = p
    return StiefelPoint(sig, np.column_stack(cols))


def _projection_to_isospectral(point, spectrum):
    sig = point.sig
    spectrum = _require_spectrum(sig, spectrum)
    values = block_values(sig, spectrum)
    s = spectrum[-1] * np.eye(sig.n)
    ext = list(values) + [spectrum[-1]]
    for j in range(sig.r - 1, -1, -1):
        s = s + (ext[j] - ext[j + 1]) * point.mats[j]
    return IsospectralPoint(sig, spectrum, s)


def _isospectral_to_stiefel(point):
    sig = point.sig
    values = block_values(sig, point.spectrum)
    sizes = [b for b in sig.block_sizes() if b > 0]
    dec = sym_eig(point.s)
    assignment = np.argmin(np.abs(dec.values[:, None] - values[None, :]), axis=1)
    cols = []
    for j in range(sig.r):  # blocks inside the flag; the trailing block is dropped
        idx = np.nonzero(assignment == j)[0]
        if len(idx) != sizes[j]:
            raise OffVarietyError(
                f"eigenvalue multiplicities {np.bincount(assignment, minlength=len(values))} "
                f"do not match block sizes {sizes}"
            )
        cols.extend(dec.vectors[:, i] for i in idx)
    return StiefelPoint(sig, np.column_stack(cols))


def random_point(model, sig, rng, spectrum=None):
    """On-variety sample produced by the Stiefel parametrization."""
    z = random_stiefel(rng, sig.n, sig.steps[-1])
    point = StiefelPoint(sig, z)
    if model == "stiefel":
        return point
    return convert(point, model, spectrum=spectrum)


# ---------------------------------------------------------------------------
# smoothness certification

@dataclass(frozen=True)
class SmoothnessReport:
    rank: int
    codim: int
    residual: float
    passed: bool


def smoothness_check(point, tol=DEFAULT_VAR_TOL, rank_tol=1e-8, spectrum=None):
    """Jacobian-rank test: the generator Jacobian at an on-variety point must
    have rank equal to the ambient codimension of the variety."""
    model = point.model
    sig = point.sig
    if model == "isospectral":
        spectrum = point.spectrum
    sys = generators(model, sig, spectrum=spectrum)
    x = point.coordinates().astype(complex)
    residual = sys.residual(x)
    if residual > tol:
        raise OffVarietyError(f"point is off the variety (residual {residual:.2e})")
    codim = ambient_dimension(model, sig) - variety_dimension(model, sig)
    if sys.polys:
        rank = numerical_rank(sys.jacobian_at(x), tol=rank_tol)
    else:
        rank = 0
    return SmoothnessReport(rank=rank, codim=codim, residual=residual, passed=rank == codim)
