"""Total-degree homotopy continuation for square polynomial systems.

The homotopy is H(x, t) = gamma (1-t) G(x) + t F(x), tracked from t=0 (start
system G) to t=1 (target F), with Euler prediction, Newton correction, and
adaptive step control.  G is the standard total-degree start x_i^{d_i} = r_i
with seeded random r_i, and gamma is a seeded random unit complex number so
paths stay off the discriminant for generic targets.

Paths are tracked in fixed-size batches: every linear solve and polynomial
evaluation is vectorized over the paths of one chunk.  Chunk boundaries
depend only on the start index, never on the worker count, so results are
bitwise reproducible no matter how many threads run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .poly import Polynomial, PolySystem, bezout_number

CHUNK_SIZE = 256
_MAX_GLOBAL_ITERS = 20000


@dataclass(frozen=True)
class TrackerConfig:
    initial_step: float = 0.05
    min_step: float = 1e-7
    max_step: float = 0.2
    corrector_tol: float = 1e-10
    max_corrector_iters: int = 5
    endpoint_tol: float = 1e-10
    dedup_tol: float = 1e-6
    real_tol: float = 1e-8
    variety_tol: float = 1e-6
    divergence_radius: float = 1e10
    path_failure_policy: str = "retry-smaller-step"  # or "report"
    polish_iters: int = 20
    singular_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.min_step <= self.initial_step <= self.max_step < 1):
            raise ValueError("need 0 < min_step <= initial_step <= max_step < 1")
        for name in ("corrector_tol", "endpoint_tol", "dedup_tol", "real_tol", "variety_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.path_failure_policy not in ("report", "retry-smaller-step"):
            raise ValueError(f"unknown path-failure policy {self.path_failure_policy!r}")

    def to_json(self):
        return {
            "initial_step": self.initial_step,
            "min_step": self.min_step,
            "max_step": self.max_step,
            "corrector_tol": self.corrector_tol,
            "max_corrector_iters": self.max_corrector_iters,
            "endpoint_tol": self.endpoint_tol,
            "dedup_tol": self.dedup_tol,
            "real_tol": self.real_tol,
            "variety_tol": self.variety_tol,
            "divergence_radius": self.divergence_radius,
            "path_failure_policy": self.path_failure_policy,
            "seed": self.seed,
        }


@dataclass
class PathResult:
    start_index: int
    endpoint: np.ndarray
    status: str  # converged | diverged | failed
    residual: float
    steps: int
    singular: bool = False


@dataclass
class SolutionSet:
    solutions: list
    singular: list
    counts: dict
    config: TrackerConfig
    bezout: int

    @property
    def distinct(self):
        return len(self.solutions)

    def to_json(self, include_solutions=True):
        out = {
            "config": self.config.to_json(),
            "bezout": self.bezout,
            "paths": {
                "converged": self.counts["converged"],
                "diverged": self.counts["diverged"],
                "failed": self.counts["failed"],
            },
            "distinct": self.counts["distinct"],
            "distinct_real": self.counts["distinct_real"],
        }
        if "on_variety" in self.counts:
            out["on_variety"] = self.counts["on_variety"]
        if include_solutions:
            out["solutions"] = [
                [[v.real, v.imag] for v in sol] for sol in self.solutions
            ]
            out["singular_flags"] = list(self.singular)
        return out


# ---------------------------------------------------------------------------
# start system

def _start_data(degrees, seed):
    rng = np.random.default_rng(seed)
    radii = 0.5 + rng.random(len(degrees))
    angles = 2.0 * np.pi * rng.random(len(degrees))
    r_values = radii * np.exp(1j * angles)
    gamma = np.exp(2j * np.pi * rng.random())
    return r_values, gamma


def start_system(system, seed):
    """Total-degree start {x_i^{d_i} - r_i} and all of its solutions.

    The solution list is ordered lexicographically by root index, so position
    in the list is a stable path identifier.
    """
    if not system.is_square:
        raise ValueError("start systems are defined for square systems only")
    degrees = [max(d, 1) for d in system.degrees]
    r_values, _ = _start_data(degrees, seed)
    nvars = system.nvars
    polys = []
    for i, d in enumerate(degrees):
        exps = [0] * nvars
        exps[i] = d
        polys.append(Polynomial(nvars, {tuple(exps): 1.0}) - r_values[i])
    start = PolySystem(polys, system.blocks, origin="total-degree-start")
    return start, list(_start_points(degrees, r_values))


def _start_points(degrees, r_values):
    total = math.prod(degrees)
    n = len(degrees)
    out = np.empty((total, n), dtype=complex)
    rep = total
    for i, d in enumerate(degrees):
        base = r_values[i] ** (1.0 / d)
        roots = base * np.exp(2j * np.pi * np.arange(d) / d)
        rep //= d
        tile = total // (rep * d)
        out[:, i] = np.tile(np.repeat(roots, rep), tile)
    return out


# ---------------------------------------------------------------------------
# batched tracking

class _Homotopy:
    """Precompiled target plus start-system data for batched evaluation."""

    def __init__(self, target, seed):
        self.target = target
        self.compiled = target.compiled()
        self.degrees = np.array([max(d, 1) for d in target.degrees])
        self.r_values, self.gamma = _start_data(self.degrees, seed)
        self.n = target.nvars
        self.max_degree = int(self.degrees.max())

    def residual_scale(self, x):
        """Residuals of a degree-d system scale like |x|^d; corrector
        acceptance along a path uses this so runaway paths are not ground
        through pointless step halvings (endpoints are still accepted on the
        absolute tolerance after polishing)."""
        return np.maximum(1.0, np.abs(x).max(axis=1)) ** self.max_degree

    def start_points(self):
        return _start_points(list(self.degrees), self.r_values)

    def g_eval(self, x):
        return x**self.degrees - self.r_values

    def h_eval(self, x, t):
        f = self.compiled.eval_many(x)
        g = self.g_eval(x)
        return (self.gamma * (1.0 - t))[:, None] * g + t[:, None] * f

    def h_eval_and_jac(self, x, t):
        """Homotopy values and Jacobians in one monomial pass; also returns
        the target values so dH/dt comes for free."""
        f, jf = self.compiled.eval_and_jac(x)
        g = self.g_eval(x)
        coeff = self.gamma * (1.0 - t)
        hv = coeff[:, None] * g + t[:, None] * f
        jac = t[:, None, None] * jf
        diag = np.arange(self.n)
        jac[:, diag, diag] += coeff[:, None] * (
            self.degrees * x ** (self.degrees - 1)
        )
        return hv, jac, f - self.gamma * g

    def h_jac(self, x, t):
        jac = t[:, None, None] * self.compiled.jac_many(x)
        coeff = self.gamma * (1.0 - t)
        diag = np.arange(self.n)
        jac[:, diag, diag] += coeff[:, None] * (
            self.degrees * x ** (self.degrees - 1)
        )
        return jac


def _batch_solve(a, b):
    """Batched solve with a least-squares fallback for singular members."""
    try:
        return np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.empty_like(b)
        for i in range(a.shape[0]):
            try:
                out[i] = np.linalg.solve(a[i], b[i])
            except np.linalg.LinAlgError:
                out[i] = np.linalg.lstsq(a[i], b[i], rcond=None)[0]
        return out


def _track_chunk(hom, x0, cfg):
    """Track a batch of paths from t=0 to t=1.  Returns (X, status, steps).

    status codes: 1 converged (pre-polish), 2 diverged, 3 failed.
    """
    nb = x0.shape[0]
    x = x0.astype(complex).copy()
    t = np.zeros(nb)
    step = np.full(nb, cfg.initial_step)
    status = np.zeros(nb, dtype=np.int8)
    steps = np.zeros(nb, dtype=np.int64)
    # the tangent depends on (x, t) only, so it survives step rejections
    tangent = np.zeros((nb, hom.n), dtype=complex)
    tangent_fresh = np.zeros(nb, dtype=bool)

    with np.errstate(all="ignore"):
        for _ in range(_MAX_GLOBAL_ITERS):
            active = np.nonzero(status == 0)[0]
            if active.size == 0:
                break
            stale = active[~tangent_fresh[active]]
            if stale.size:
                _, jac, dhdt = hom.h_eval_and_jac(x[stale], t[stale])
                tangent[stale] = _batch_solve(jac, -dhdt)
                tangent_fresh[stale] = True
            ta = t[active]
            t_new = np.minimum(ta + step[active], 1.0)
            xc = x[active] + tangent[active] * (t_new - ta)[:, None]

            converged = np.zeros(active.size, dtype=bool)
            iters_used = np.full(active.size, cfg.max_corrector_iters + 1)
            live = np.arange(active.size)
            prev_resid = np.full(active.size, np.inf)
            for it in range(cfg.max_corrector_iters + 1):
                hv = hom.h_eval(xc[live], t_new[live])
                resid = np.abs(hv).max(axis=1)
                ok = resid < cfg.corrector_tol * hom.residual_scale(xc[live])
                converged[live[ok]] = True
                iters_used[live[ok]] = it
                # drop paths whose Newton residual is not shrinking; more
                # iterations at this step size cannot rescue them
                hopeless = ~ok & ~(resid < prev_resid[live])
                keep = ~ok & ~hopeless
                prev_resid[live] = resid
                live = live[keep]
                hv = hv[keep]
                if live.size == 0 or it == cfg.max_corrector_iters:
                    break
                jc = hom.h_jac(xc[live], t_new[live])
                xc[live] += _batch_solve(jc, -hv)

            diverged = ~np.isfinite(xc).all(axis=1) | (
                np.abs(xc).max(axis=1) > cfg.divergence_radius
            )
            accept = converged & ~diverged

            idx = active[accept]
            x[idx] = xc[accept]
            t[idx] = t_new[accept]
            steps[idx] += 1
            tangent_fresh[idx] = False
            fast = accept & (iters_used <= 2)
            step[active[fast]] = np.minimum(step[active[fast]] * 2.0, cfg.max_step)
            status[active[accept & (t_new >= 1.0)]] = 1

            reject = ~converged & ~diverged
            step[active[reject]] *= 0.5
            dead = reject & (step[active] < cfg.min_step)
            status[active[dead]] = 3
            status[active[diverged]] = 2
        else:
            status[status == 0] = 3
        status[status == 0] = 3
    return x, status, steps


def _polish(compiled, x, cfg):
    """Newton-refine endpoints on the target; returns (x, residual, min_sv)."""
    nb = x.shape[0]
    if nb == 0:
        return x, np.zeros(0), np.zeros(0)
    x = x.copy()
    with np.errstate(all="ignore"):
        prev = np.full(nb, np.inf)
        stalled = np.zeros(nb, dtype=bool)
        for _ in range(cfg.polish_iters):
            vals = compiled.eval_many(x)
            resid = np.abs(vals).max(axis=1)
            stalled |= ~(resid < prev)  # junk endpoints stop consuming Newton steps
            prev = resid
            live = np.nonzero((resid >= cfg.endpoint_tol) & np.isfinite(resid) & ~stalled)[0]
            if live.size == 0:
                break
            jac = compiled.jac_many(x[live])
            delta = _batch_solve(jac, -vals[live])
            ok = np.isfinite(delta).all(axis=1)
            x[live[ok]] += delta[ok]
        vals = compiled.eval_many(x)
        resid = np.abs(vals).max(axis=1)
        resid[~np.isfinite(resid)] = np.inf
        jac = compiled.jac_many(x)
        min_sv = np.full(nb, np.inf)
        finite = np.isfinite(jac).all(axis=(1, 2))
        if finite.any():
            sv = np.linalg.svd(jac[finite], compute_uv=False)
            ratio = sv[:, -1] / np.maximum(sv[:, 0], 1.0)
            min_sv[finite] = ratio
    return x, resid, min_sv


def track_path(target, start, x0, cfg=None):
    """Track one path of the homotopy from a start-system solution.

    `start` must be the system produced by `start_system(target, cfg.seed)`;
    the homotopy constants are regenerated from the seed.
    """
    cfg = cfg or TrackerConfig()
    hom = _Homotopy(target, cfg.seed)
    x0 = np.asarray(x0, dtype=complex)
    x, status, steps = _track_chunk(hom, x0[None, :], cfg)
    if status[0] == 1:
        xp, resid, min_sv = _polish(hom.compiled, x, cfg)
        if resid[0] < cfg.endpoint_tol:
            return PathResult(
                0, xp[0], "converged", float(resid[0]), int(steps[0]),
                singular=bool(min_sv[0] < cfg.singular_tol),
            )
        return PathResult(0, xp[0], "failed", float(resid[0]), int(steps[0]))
    name = {2: "diverged", 3: "failed"}[int(status[0])]
    resid = float(np.abs(target.evaluate(x[0])).max()) if np.isfinite(x[0]).all() else np.inf
    return PathResult(0, x[0], name, resid, int(steps[0]))


def _run_chunks(hom, points, indices, cfg, threads):
    chunks = [
        (indices[i : i + CHUNK_SIZE], points[i : i + CHUNK_SIZE])
        for i in range(0, len(indices), CHUNK_SIZE)
    ]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tracked = list(pool.map(lambda c: _track_chunk(hom, c[1], cfg), chunks))
    else:
        tracked = [_track_chunk(hom, c[1], cfg) for c in chunks]
    results = {}
    for (idx, _), (x, status, steps) in zip(chunks, tracked):
        done = status == 1
        xp = x.copy()
        resid = np.full(len(idx), np.inf)
        min_sv = np.full(len(idx), np.inf)
        if done.any():
            xp[done], resid[done], min_sv[done] = _polish(hom.compiled, x[done], cfg)
        for j, path_index in enumerate(idx):
            if status[j] == 1 and resid[j] < cfg.endpoint_tol:
                pr = PathResult(
                    int(path_index), xp[j], "converged", float(resid[j]),
                    int(steps[j]), singular=bool(min_sv[j] < cfg.singular_tol),
                )
            elif status[j] == 2:
                pr = PathResult(int(path_index), x[j], "diverged", np.inf, int(steps[j]))
            else:
                r = float(resid[j]) if np.isfinite(resid[j]) else np.inf
                pr = PathResult(int(path_index), xp[j], "failed", r, int(steps[j]))
            results[int(path_index)] = pr
    return results


def solve(target, cfg=None, filter_system=None, threads=1):
    """Track all total-degree paths and return the deduplicated solution set.

    If `filter_system` is given (a system in a prefix of the variables, e.g.
    the full variety generators under a sliced Lagrange system), solutions
    are additionally counted against it at the on-variety tolerance.
    """
    cfg = cfg or TrackerConfig()
    if not target.is_square:
        raise ValueError("the solver needs a square system")
    hom = _Homotopy(target, cfg.seed)
    points = hom.start_points()
    total = points.shape[0]
    results = _run_chunks(hom, points, np.arange(total), cfg, threads)

    if cfg.path_failure_policy == "retry-smaller-step":
        # Retry only paths stalled at moderate norms; step refinement cannot
        # rescue a path that is running off to infinity.
        failed = sorted(
            i
            for i, r in results.items()
            if r.status == "failed"
            and np.isfinite(r.endpoint).all()
            and np.abs(r.endpoint).max() < 1e6
        )
        if failed:
            retry_cfg = replace(
                cfg,
                initial_step=max(cfg.initial_step / 5.0, cfg.min_step / 100.0),
                min_step=cfg.min_step / 100.0,
                max_step=cfg.max_step / 2.0,
            )
            retried = _run_chunks(hom, points[failed], np.array(failed), retry_cfg, threads)
            for i, r in retried.items():
                if r.status == "converged":
                    results[i] = r

    path_results = [results[i] for i in range(total)]
    counts = {
        "paths": total,
        "converged": sum(r.status == "converged" for r in path_results),
        "diverged": sum(r.status == "diverged" for r in path_results),
        "failed": sum(r.status == "failed" for r in path_results),
    }

    reps = []
    flags = []
    for r in path_results:
        if r.status != "converged":
            continue
        if reps:
            dists = np.abs(np.array(reps) - r.endpoint).max(axis=1)
            nearest = int(np.argmin(dists))
            if dists[nearest] <= cfg.dedup_tol:
                flags[nearest] = flags[nearest] or r.singular
                continue
        reps.append(r.endpoint)
        flags.append(r.singular)

    order = sorted(
        range(len(reps)),
        key=lambda i: tuple((v.real, v.imag) for v in reps[i]),
    )
    solutions = [reps[i] for i in order]
    singular = [flags[i] for i in order]

    counts["distinct"] = len(solutions)
    counts["distinct_real"] = sum(
        1 for s in solutions if np.abs(s.imag).max() < cfg.real_tol
    )
    if filter_system is not None:
        fvars = filter_system.nvars
        counts["on_variety"] = sum(
            1
            for s in solutions
            if filter_system.residual(s[:fvars]) < cfg.variety_tol
        )
    return SolutionSet(
        solutions=solutions,
        singular=singular,
        counts=counts,
        config=cfg,
        bezout=bezout_number(target),
    )


# ---------------------------------------------------------------------------
# sign orbits

@dataclass(frozen=True)
class OrbitPartition:
    count: int
    sizes: tuple
    free: bool


def group_sign_orbits(solutions, shape, tol=1e-6):
    """Partition solutions under per-column sign flips of the Z block.

    `shape` is (n, k): the first n*k coordinates of each solution are read as
    an n x k matrix stored column-major.  The orbit is free when no
    non-identity flip fixes a solution (a zero column breaks freeness).
    """
    if hasattr(solutions, "solutions"):
        solutions = solutions.solutions
    n, k = shape
    sols = [np.asarray(s) for s in solutions]
    if any(len(s) < n * k for s in sols):
        raise ValueError(f"solutions are shorter than the Z block {n}x{k}")
    masks = []
    for bits in range(2**k):
        m = np.ones(n * k)
        for col in range(k):
            if bits >> col & 1:
                m[col * n : (col + 1) * n] = -1.0
        masks.append(m)

    parent = list(range(len(sols)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    free = True
    for i, si in enumerate(sols):
        zi = si[: n * k]
        for mi, mask in enumerate(masks):
            flipped = zi * mask
            if mi > 0 and np.abs(flipped - zi).max() <= tol:
                free = False
            for j in range(i + 1, len(sols)):
                if np.abs(flipped - sols[j][: n * k]).max() <= tol:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[ri] = rj
    roots = {}
    for i in range(len(sols)):
        roots.setdefault(find(i), []).append(i)
    sizes = tuple(sorted(len(v) for v in roots.values()))
    return OrbitPartition(count=len(roots), sizes=sizes, free=free)
