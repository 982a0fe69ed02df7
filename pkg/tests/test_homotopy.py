import numpy as np
import pytest

from flagopt.builders import build_heterogeneous_lagrange
from flagopt.homotopy import (
    TrackerConfig,
    group_sign_orbits,
    solve,
    start_system,
    track_path,
)
from flagopt.poly import Polynomial, PolySystem, bezout_number


def univariate(coeff_shift):
    x = Polynomial.variable(1, 0)
    return PolySystem([x * x - coeff_shift], [("x", 1)])


def hetero_system(n, k, seed):
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((n, n)) for _ in range(k)]
    mats = [m + m.T for m in mats]
    return build_heterogeneous_lagrange(mats)


class TestConfig:
    def test_defaults_valid(self):
        TrackerConfig()

    def test_rejects_bad_steps(self):
        with pytest.raises(ValueError):
            TrackerConfig(min_step=0.5, initial_step=0.1)
        with pytest.raises(ValueError):
            TrackerConfig(max_step=1.5)
        with pytest.raises(ValueError):
            TrackerConfig(path_failure_policy="panic")


class TestStartSystem:
    def test_univariate(self):
        start, pts = start_system(univariate(1.0), seed=0)
        assert len(pts) == 2
        assert start.degrees == [2]
        for p in pts:
            assert np.abs(start.evaluate(p)).max() < 1e-12

    def test_mixed_degrees(self):
        x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
        sys = PolySystem([x * x - 1, y**3 - 1], [("x", 2)])
        start, pts = start_system(sys, seed=1)
        assert len(pts) == 6
        for p in pts:
            assert np.abs(start.evaluate(p)).max() < 1e-12

    def test_hetero_22_count(self):
        _, pts = start_system(hetero_system(2, 2, 7), seed=0)
        assert len(pts) == 128

    def test_rejects_non_square(self):
        x = Polynomial.variable(2, 0)
        with pytest.raises(ValueError):
            start_system(PolySystem([x], [("x", 2)]), seed=0)


class TestTrackPath:
    def test_identity_homotopy(self):
        target = univariate(1.0)
        start, pts = start_system(target, seed=3)
        res = track_path(start, start, pts[0], TrackerConfig(seed=3))
        assert res.status == "converged"
        assert np.abs(res.endpoint - pts[0]).max() < 1e-8

    def test_univariate_roots(self):
        target = univariate(4.0)
        cfg = TrackerConfig(seed=5)
        start, pts = start_system(target, seed=5)
        ends = sorted(
            track_path(target, start, p, cfg).endpoint[0].real for p in pts
        )
        assert np.allclose(ends, [-2.0, 2.0], atol=1e-8)

    def test_residual_meets_tolerance(self):
        target = univariate(4.0)
        cfg = TrackerConfig(seed=5)
        start, pts = start_system(target, seed=5)
        res = track_path(target, start, pts[0], cfg)
        assert res.status == "converged" and res.residual < cfg.endpoint_tol


class TestSolve:
    def test_hetero_22_eight_solutions(self):
        ss = solve(hetero_system(2, 2, 7), TrackerConfig(seed=3))
        assert ss.counts["distinct"] == 8
        orbits = group_sign_orbits(ss, (2, 2))
        assert orbits.count == 2 and orbits.free

    def test_path_counts_sum_to_bezout(self):
        sys = hetero_system(2, 2, 7)
        ss = solve(sys, TrackerConfig(seed=3))
        c = ss.counts
        assert c["converged"] + c["diverged"] + c["failed"] == bezout_number(sys)

    def test_solutions_pairwise_separated(self):
        cfg = TrackerConfig(seed=3)
        ss = solve(hetero_system(2, 2, 7), cfg)
        sols = np.array(ss.solutions)
        for i in range(len(sols)):
            for j in range(i + 1, len(sols)):
                assert np.abs(sols[i] - sols[j]).max() > cfg.dedup_tol

    def test_deterministic_across_runs(self):
        sys = hetero_system(2, 2, 7)
        a = solve(sys, TrackerConfig(seed=9))
        b = solve(sys, TrackerConfig(seed=9))
        assert a.counts == b.counts
        assert all(np.array_equal(x, y) for x, y in zip(a.solutions, b.solutions))

    def test_deterministic_across_thread_counts(self):
        sys = hetero_system(3, 2, 7)
        a = solve(sys, TrackerConfig(seed=9), threads=1)
        b = solve(sys, TrackerConfig(seed=9), threads=2)
        assert a.counts == b.counts
        assert all(np.array_equal(x, y) for x, y in zip(a.solutions, b.solutions))

    def test_count_stable_across_seeds(self):
        sys = hetero_system(2, 2, 7)
        counts = {solve(sys, TrackerConfig(seed=s)).counts["distinct"] for s in (1, 2, 3)}
        assert counts == {8}
        sys3 = hetero_system(3, 2, 7)
        counts3 = {solve(sys3, TrackerConfig(seed=s)).counts["distinct"] for s in (1, 2, 3)}
        assert counts3 == {40}

    def test_report_policy_keeps_failures(self):
        sys = hetero_system(3, 2, 7)
        reported = solve(sys, TrackerConfig(seed=3, path_failure_policy="report"))
        retried = solve(sys, TrackerConfig(seed=3, path_failure_policy="retry-smaller-step"))
        # the retry pass can only move paths out of the failed bucket
        assert reported.counts["failed"] >= retried.counts["failed"]
        assert reported.counts["distinct"] == retried.counts["distinct"] == 40

    def test_equal_matrices_flag_singular_endpoints(self):
        # A_1 = A_2: the critical set is positive-dimensional; whatever
        # endpoints converge must carry singularity flags
        rng = np.random.default_rng(11)
        a = rng.standard_normal((2, 2))
        a = a + a.T
        ss = solve(build_heterogeneous_lagrange([a, a]), TrackerConfig(seed=4))
        nonsingular = [s for s, f in zip(ss.solutions, ss.singular) if not f]
        assert len(nonsingular) == 0

    def test_filter_counts_on_variety(self):
        from flagopt.builders import build_lo_system
        from flagopt.varieties import FlagSignature, generators

        rng = np.random.default_rng(11)
        c = rng.standard_normal((2, 2))
        c = c + c.T
        sig = FlagSignature((1,), 2)
        lo = build_lo_system("projection", sig, c, seed=5)
        ss = solve(lo, TrackerConfig(seed=5), filter_system=generators("projection", sig))
        assert ss.counts["on_variety"] == 2

    def test_report_json_shape(self):
        ss = solve(hetero_system(2, 2, 7), TrackerConfig(seed=3))
        data = ss.to_json()
        assert data["bezout"] == 128
        assert set(data["paths"]) == {"converged", "diverged", "failed"}
        assert len(data["solutions"]) == data["distinct"]


class TestSignOrbits:
    def test_quotient_of_eight(self):
        ss = solve(hetero_system(2, 2, 7), TrackerConfig(seed=3))
        orbits = group_sign_orbits(ss.solutions, (2, 2))
        assert orbits.count == 2
        assert orbits.sizes == (4, 4)

    def test_zero_column_breaks_freeness(self):
        sol = np.array([0.0, 0.0, 1.0, 0.0], dtype=complex)  # first column zero
        orbits = group_sign_orbits([sol], (2, 2))
        assert orbits.count == 1 and not orbits.free

    def test_synthetic_exact_quotient(self):
        rng = np.random.default_rng(13)
        base = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        sols = []
        for s0 in (1, -1):
            for s1 in (1, -1):
                mask = np.array([s0] * 3 + [s1] * 3)
                sols.append(base * mask)
        orbits = group_sign_orbits(sols, (3, 2))
        assert orbits.count == 1 and orbits.sizes == (4,) and orbits.free
