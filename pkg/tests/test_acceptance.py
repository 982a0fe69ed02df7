"""Acceptance suite: one test per quantitative claim, each printing a
PASS/FAIL line.  Runtimes at desk scale; the two large homotopy runs
(32768 and 65536 paths) carry the `slow` marker.

Run `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""

import numpy as np
import pytest

from flagopt.builders import build_heterogeneous_lagrange, build_lo_system
from flagopt.critical import (
    ca_matrix_gradient,
    cca_pair_residual,
    count_formula,
    ed_gradient,
    enumerate_ca,
    enumerate_cca,
    enumerate_hetero_diag_3_2,
    enumerate_iso,
    enumerate_multi_eigen,
    partial_isometry_constraints,
    verify_first_order,
)
from flagopt.homotopy import TrackerConfig, group_sign_orbits, solve
from flagopt.linalg import svd, sym_eig
from flagopt.poly import Polynomial, PolySystem
from flagopt.varieties import (
    MODELS,
    FlagSignature,
    convert,
    default_spectrum,
    generators,
    random_point,
    smoothness_check,
    sym_to_vec,
    trace_objective_gradient,
)

THREADS = 2


def report(num, ok, text):
    line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'} - {text}"
    print(line)
    assert ok, line


def random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return a + a.T


def hausdorff(set_a, set_b):
    a = np.array([np.asarray(x) for x in set_a])
    b = np.array([np.asarray(x) for x in set_b])
    d_ab = max(np.abs(b - x).max(axis=1).min() for x in a)
    d_ba = max(np.abs(a - x).max(axis=1).min() for x in b)
    return max(d_ab, d_ba)


def test_01_table1_k2_n2():
    rng = np.random.default_rng(101)
    mats = [random_symmetric(rng, 2) for _ in range(2)]
    ss = solve(build_heterogeneous_lagrange(mats), TrackerConfig(seed=101), threads=THREADS)
    orbits = group_sign_orbits(ss, (2, 2))
    ok = ss.counts["distinct"] == 8 and orbits.count == 2
    report(1, ok, f"heterogeneous k=2 n=2: {ss.counts['distinct']} distinct, {orbits.count} orbits (expect 8, 2)")


def test_02_table1_k2_n3_generic_and_diagonal():
    rng = np.random.default_rng(102)
    mats = [random_symmetric(rng, 3) for _ in range(2)]
    generic = solve(build_heterogeneous_lagrange(mats), TrackerConfig(seed=102), threads=THREADS)
    diag = [np.diag(np.sort(rng.uniform(-5, 5, size=3))) for _ in range(2)]
    diagonal = solve(build_heterogeneous_lagrange(diag), TrackerConfig(seed=102), threads=THREADS)
    orbits = group_sign_orbits(generic, (3, 2))
    ok = (
        generic.counts["distinct"] == 40
        and diagonal.counts["distinct"] == 40
        and orbits.count == 10
    )
    report(
        2,
        ok,
        "heterogeneous k=2 n=3: "
        f"{generic.counts['distinct']} generic / {diagonal.counts['distinct']} diagonal, "
        f"{orbits.count} orbits (expect 40, 40, 10)",
    )


@pytest.mark.slow
def test_03_table1_k3_n3():
    rng = np.random.default_rng(103)
    mats = [random_symmetric(rng, 3) for _ in range(3)]
    ss = solve(build_heterogeneous_lagrange(mats), TrackerConfig(seed=103), threads=THREADS)
    orbits = group_sign_orbits(ss, (3, 3))
    ok = ss.counts["distinct"] == 80 and orbits.count == 10 and all(s == 8 for s in orbits.sizes)
    report(3, ok, f"heterogeneous k=3 n=3: {ss.counts['distinct']} distinct, {orbits.count} orbits of sizes {set(orbits.sizes)} (expect 80, 10 x 8)")


def test_04_conjecture_consistency():
    rng = np.random.default_rng(104)
    observed = []
    for n in (2, 3, 4):
        mats = [random_symmetric(rng, n) for _ in range(2)]
        ss = solve(build_heterogeneous_lagrange(mats), TrackerConfig(seed=104), threads=THREADS)
        observed.append(ss.counts["distinct"])
    expected = [count_formula("hetero_k2_conjecture", n=n) for n in (2, 3, 4)]
    ok = observed == expected == [8, 40, 112]
    report(4, ok, f"k=2 conjecture: solver counts {observed}, formula {expected}")


def test_05_prop_diagonal_oracle_equivalence():
    rng = np.random.default_rng(105)
    a1 = np.sort(rng.uniform(-5, 5, size=3))
    a2 = np.sort(rng.uniform(-5, 5, size=3))
    system = build_heterogeneous_lagrange([np.diag(a1), np.diag(a2)])
    enumerated = enumerate_hetero_diag_3_2(a1, a2)
    worst_residual = max(system.residual(p) for p in enumerated)
    ss = solve(system, TrackerConfig(seed=105), threads=THREADS)
    dist = hausdorff(ss.solutions, enumerated)
    ok = (
        len(enumerated) == 40
        and ss.counts["distinct"] == 40
        and dist < 1e-6
        and worst_residual < 1e-10
    )
    report(
        5,
        ok,
        f"closed-form vs homotopy (diagonal k=2 n=3): {len(enumerated)} points, "
        f"Hausdorff {dist:.1e}, residual {worst_residual:.1e}",
    )


def test_06_lo_pgr_2_4_enumeration_certified():
    rng = np.random.default_rng(106)
    a = random_symmetric(rng, 4)
    points = enumerate_multi_eigen(a, 2)
    constraints = generators("projection", FlagSignature((2,), 4))
    grad = trace_objective_gradient(a)
    passed = sum(
        verify_first_order(grad, constraints, sym_to_vec(p).astype(complex)).passed
        for p in points
    )
    ok = len(points) == 6 and passed == 6
    report(6, ok, f"pGr(2,4) trace optimization: {len(points)} enumerated, {passed} certified (expect 6, 6)")


@pytest.mark.slow
def test_06b_lo_pgr_2_4_solver():
    rng = np.random.default_rng(106)
    a = random_symmetric(rng, 4)
    sig = FlagSignature((2,), 4)
    lo = build_lo_system("projection", sig, a, seed=106)
    ss = solve(lo, TrackerConfig(seed=106), filter_system=generators("projection", sig), threads=THREADS)
    ok = ss.counts["on_variety"] == 6
    report(6, ok, f"pGr(2,4) homotopy: {ss.counts['on_variety']} on-variety solutions (expect 6)")


def test_07_isospectral_degree_complete_flag_n3():
    rng = np.random.default_rng(107)
    a = random_symmetric(rng, 3)
    sig = FlagSignature((1, 2), 3)
    spectrum = default_spectrum(sig, rng)
    points = enumerate_iso(a, sig, spectrum, seed=107)
    objectives = {round(float(np.trace(a @ p.s)), 8) for p in points}
    constraints = generators("isospectral", sig, spectrum=spectrum)
    grad = trace_objective_gradient(a)
    passed = sum(
        verify_first_order(grad, constraints, p.coordinates().astype(complex)).passed
        for p in points
    )
    expected = count_formula("lo_iso", sig=sig)
    ok = len(points) == expected == 6 and len(objectives) == 6 and passed == 6
    report(
        7,
        ok,
        f"isospectral complete flag n=3: {len(points)} points, {len(objectives)} objective values, "
        f"{passed} certified (expect 6 everywhere)",
    )


def test_08_ed_equals_lo_on_isospectral():
    rng = np.random.default_rng(108)
    a = random_symmetric(rng, 3)
    sig = FlagSignature((1, 2), 3)
    spectrum = default_spectrum(sig, rng)
    constraints = generators("isospectral", sig, spectrum=spectrum)
    lo_grad = trace_objective_gradient(a)
    candidates = [p.coordinates().astype(complex) for p in enumerate_iso(a, sig, spectrum, seed=108)]
    candidates += [
        random_point("isospectral", sig, rng, spectrum=spectrum).coordinates().astype(complex)
        for _ in range(20)
    ]
    from flagopt.varieties import vec_to_sym

    lo_set = set()
    ed_set = set()
    for i, x in enumerate(candidates):
        s = vec_to_sym(x.real, 3)
        if verify_first_order(lo_grad, constraints, x).passed:
            lo_set.add(i)
        if verify_first_order(ed_gradient(a, s), constraints, x).passed:
            ed_set.add(i)
    expected_sq = float(np.sum(spectrum**2))
    worst = max(
        abs(float(np.trace(p.s @ p.s)) - expected_sq)
        for p in (random_point("isospectral", sig, rng, spectrum=spectrum) for _ in range(100))
    )
    ok = lo_set == ed_set == set(range(6)) and worst < 1e-10
    report(
        8,
        ok,
        f"ED = LO on isospectral (1,2;3): certified sets {sorted(lo_set)} == {sorted(ed_set)}, "
        f"trace(S^2) deviation {worst:.1e}",
    )


def test_09_ideal_smoothness_suite():
    rng = np.random.default_rng(109)
    grid = ["1:3", "2:4", "1,2:3", "1,2:4", "1,2,3:4"]
    worst = 0.0
    all_smooth = True
    for key in grid:
        sig = FlagSignature.parse(key)
        for model in MODELS:
            spectrum = default_spectrum(sig, rng) if model == "isospectral" else None
            gens = generators(model, sig, spectrum=spectrum)
            for _ in range(100):
                p = random_point(model, sig, rng, spectrum=spectrum)
                if gens.polys:
                    worst = max(worst, gens.residual(p.coordinates().astype(complex)))
            for _ in range(20):
                p = random_point(model, sig, rng, spectrum=spectrum)
                if not smoothness_check(p, spectrum=spectrum).passed:
                    all_smooth = False
    ok = worst < 1e-10 and all_smooth
    report(
        9,
        ok,
        f"ideal/smoothness grid (4 models x 5 signatures): residual {worst:.1e} (< 1e-10), "
        f"rank==codim everywhere: {all_smooth}",
    )


def test_10_single_exchange_relation():
    rng = np.random.default_rng(110)
    sig = FlagSignature((1, 2), 3)
    system = generators("pluecker", sig)
    # the single quadric x_1 x_23 - x_2 x_13 + x_3 x_12 up to sign/scale
    expected = (
        Polynomial.variable(6, 0) * Polynomial.variable(6, 5)
        - Polynomial.variable(6, 1) * Polynomial.variable(6, 4)
        + Polynomial.variable(6, 2) * Polynomial.variable(6, 3)
    )
    match = False
    if system.npolys == 1:
        p = system.polys[0]
        lead = p.terms[min(p.terms)]
        q = expected.terms[min(expected.terms)]
        match = (p * (1.0 / lead)) == (expected * (1.0 / q))
    worst = 0.0
    for _ in range(100):
        pt = random_point("pluecker", sig, rng)
        worst = max(worst, system.residual(pt.coordinates().astype(complex)))
    ok = match and worst < 1e-12
    report(10, ok, f"Fl(1,2;3) exchange quadric: unique up to scale = {match}, residual {worst:.1e} (< 1e-12)")


def test_11_conversion_triangle_commutes():
    rng = np.random.default_rng(111)
    worst = 0.0
    for key in ("1,2:3", "1,2:4"):
        sig = FlagSignature.parse(key)
        spectrum = default_spectrum(sig, rng)
        for _ in range(100):
            z = random_point("stiefel", sig, rng)
            direct = convert(z, "isospectral", spectrum=spectrum)
            via = convert(convert(z, "projection"), "isospectral", spectrum=spectrum)
            worst = max(worst, float(np.abs(direct.s - via.s).max()))
    ok = worst < 1e-10
    report(11, ok, f"conversion triangle commutes on (1,2;3) and (1,2;4): deviation {worst:.1e} (< 1e-10)")


def test_12_cca_counts_and_conditions():
    rng = np.random.default_rng(112)
    ok = True
    detail = []
    for p, q, k in [(2, 2, 1), (3, 3, 2), (4, 3, 2)]:
        a = rng.standard_normal((p, q))
        pairs = enumerate_cca(a, k)
        expected = count_formula("cca", p=p, q=q, k=k)
        worst = max(cca_pair_residual(a, u, v) for u, v in pairs)
        controls_fail = all(
            cca_pair_residual(
                a,
                u + 1e-2 * rng.standard_normal(u.shape),
                v + 1e-2 * rng.standard_normal(v.shape),
            )
            > 1e-6
            for u, v in [pairs[i % len(pairs)] for i in range(20)]
        )
        ok = ok and len(pairs) == expected and worst < 1e-10 and controls_fail
        detail.append(f"({p},{q},{k}): {len(pairs)}/{expected}")
    report(12, ok, "canonical correlation counts " + ", ".join(detail) + " with conditions < 1e-10")


def test_13_ca_degree():
    rng = np.random.default_rng(113)
    ok = True
    detail = []
    for n, p, k in [(2, 3, 1), (3, 4, 2)]:
        a = rng.standard_normal((n, p))
        ms = enumerate_ca(a, k, mode="matrix_form")
        expected = count_formula("ca", n=n, k=k)
        gens = generators("projection", FlagSignature((k,), p))
        worst = max(gens.residual(sym_to_vec(m @ m.T).astype(complex)) for m in ms)
        constraints = partial_isometry_constraints(p, n, k)
        grad = ca_matrix_gradient(a, p, n)
        passed = sum(
            verify_first_order(grad, constraints, m.flatten(order="F").astype(complex)).passed
            for m in ms
        )
        ok = ok and len(ms) == expected and worst < 1e-10 and passed == len(ms)
        detail.append(f"({n},{p},{k}): {len(ms)}/{expected} certified {passed}")
    report(13, ok, "correspondence analysis " + ", ".join(detail))


def test_14_infrastructure_properties():
    # (a) polynomial Jacobians against central finite differences
    rng = np.random.default_rng(114)
    fd_ok = True
    for _ in range(50):
        nvars = int(rng.integers(2, 5))
        polys = []
        for _ in range(int(rng.integers(1, 4))):
            terms = {}
            for _ in range(6):
                e = tuple(int(v) for v in rng.integers(0, 3, size=nvars))
                if sum(e) <= 3:
                    terms[e] = complex(rng.standard_normal(), rng.standard_normal())
            polys.append(Polynomial(nvars, terms))
        system = PolySystem(polys, [("x", nvars)])
        x = rng.standard_normal(nvars) + 1j * rng.standard_normal(nvars)
        jac = system.jacobian_at(x)
        fd = np.zeros_like(jac)
        for j in range(nvars):
            dx = np.zeros(nvars, dtype=complex)
            dx[j] = 1e-6
            fd[:, j] = (system.evaluate(x + dx) - system.evaluate(x - dx)) / 2e-6
        scale = max(1.0, np.abs(jac).max())
        fd_ok = fd_ok and np.abs(jac - fd).max() / scale < 1e-6

    # (b) homotopy determinism across thread counts (bitwise)
    mats = [random_symmetric(np.random.default_rng(7), 3) for _ in range(2)]
    system = build_heterogeneous_lagrange(mats)
    one = solve(system, TrackerConfig(seed=114), threads=1)
    two = solve(system, TrackerConfig(seed=114), threads=2)
    det_ok = one.counts == two.counts and all(
        np.array_equal(a, b) for a, b in zip(one.solutions, two.solutions)
    )

    # (c) dense kernel reconstruction residuals
    rng = np.random.default_rng(115)
    b = rng.standard_normal((5, 5))
    a = b + b.T
    dec = sym_eig(a)
    eig_resid = np.abs(dec.vectors @ np.diag(dec.values) @ dec.vectors.T - a).max()
    m = rng.standard_normal((4, 3))
    svd_resid = np.abs(svd(m).reconstruct() - m).max()
    kernel_ok = eig_resid < 1e-12 and svd_resid < 1e-12

    ok = fd_ok and det_ok and kernel_ok
    report(
        14,
        ok,
        f"infrastructure: finite-difference Jacobians {fd_ok}, thread-count determinism {det_ok}, "
        f"kernel reconstruction residuals {eig_resid:.1e}/{svd_resid:.1e} (< 1e-12)",
    )
