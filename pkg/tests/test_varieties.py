import numpy as np
import pytest

from flagopt.poly import Polynomial
from flagopt.varieties import (
    FlagSignature,
    OffVarietyError,
    UnsupportedEdgeError,
    StiefelPoint,
    ambient_dimension,
    convert,
    default_spectrum,
    flag_dimension,
    generators,
    point_from_json,
    random_point,
    smoothness_check,
    stiefel_dimension,
    subsets_colex,
    sym_to_vec,
    vec_to_sym,
    validate_spectrum,
    variety_dimension,
)

GRID = [((1,), 3), ((2,), 4), ((1, 2), 3), ((1, 2), 4), ((1, 2, 3), 4)]


class TestSignature:
    def test_parse_round_trip(self):
        sig = FlagSignature.parse("1,2:3")
        assert sig.steps == (1, 2) and sig.n == 3
        assert sig.parse_key() == "1,2:3"

    def test_rejects_bad_signatures(self):
        with pytest.raises(ValueError):
            FlagSignature((2, 1), 3)
        with pytest.raises(ValueError):
            FlagSignature((0, 1), 3)
        with pytest.raises(ValueError):
            FlagSignature((1, 4), 3)

    def test_block_sizes(self):
        assert FlagSignature((1, 2), 3).block_sizes() == (1, 1, 1)
        assert FlagSignature((2,), 5).block_sizes() == (2, 3)
        assert FlagSignature((3,), 3).block_sizes() == (3, 0)


class TestDimensions:
    def test_flag_dimension_two_step(self):
        assert flag_dimension(FlagSignature((1, 2), 3)) == 3  # 1*2 + 1*1

    def test_complete_flag(self):
        assert flag_dimension(FlagSignature((1, 2, 3, 4), 5)) == 10  # n(n-1)/2

    def test_grassmannian(self):
        assert flag_dimension(FlagSignature((2,), 4)) == 4  # k(n-k)

    def test_stiefel_dimension(self):
        assert stiefel_dimension(3, 2) == 3
        assert stiefel_dimension(4, 4) == 6
        assert stiefel_dimension(5, 1) == 4


class TestSymCoords:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        b = rng.standard_normal((4, 4))
        s = b + b.T
        assert np.array_equal(vec_to_sym(sym_to_vec(s), 4), s)

    def test_colex_order(self):
        assert subsets_colex(4, 2) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]


class TestGenerators:
    def test_stiefel_count_and_shape(self):
        sys = generators("stiefel", FlagSignature((2,), 3))
        assert sys.npolys == 3  # binom(k+1, 2)
        assert all(d == 2 for d in sys.degrees)
        z = np.eye(3)[:, :2].flatten(order="F").astype(complex)
        assert np.abs(sys.evaluate(z)).max() == 0.0

    def test_pluecker_single_relation(self):
        sys = generators("pluecker", FlagSignature((1, 2), 3))
        assert sys.npolys == 1
        # x_1 x_23 - x_2 x_13 + x_3 x_12 in (lex-subset, block-ordered) variables
        expected = (
            Polynomial.variable(6, 0) * Polynomial.variable(6, 5)
            - Polynomial.variable(6, 1) * Polynomial.variable(6, 4)
            + Polynomial.variable(6, 2) * Polynomial.variable(6, 3)
        )
        p = sys.polys[0]
        lead = p.terms[min(p.terms)]
        assert (p * (1.0 / lead)) == expected * (1.0 / expected.terms[min(expected.terms)])

    def test_isospectral_projection_specialization(self):
        # spectrum (1, 0) turns the minimal polynomial into S^2 - S
        sig = FlagSignature((1,), 2)
        sys = generators("isospectral", sig, spectrum=np.array([1.0, 0.0]))
        assert sys.npolys == 4  # 3 entries of S^2 - S plus the trace
        s = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert sys.residual(sym_to_vec(s).astype(complex)) == 0.0

    def test_projection_generator_count(self):
        sig = FlagSignature((1, 2), 3)
        sys = generators("projection", sig)
        # 2 * binom(4,2) squares + 1 * n^2 incidences + 2 traces
        assert sys.npolys == 12 + 9 + 2

    @pytest.mark.parametrize("steps,n", GRID)
    @pytest.mark.parametrize("model", ["stiefel", "pluecker", "projection", "isospectral"])
    def test_generators_vanish_on_parametrized_points(self, steps, n, model):
        sig = FlagSignature(steps, n)
        rng = np.random.default_rng(17)
        spectrum = default_spectrum(sig, rng) if model == "isospectral" else None
        sys = generators(model, sig, spectrum=spectrum)
        for _ in range(100):
            p = random_point(model, sig, rng, spectrum=spectrum)
            if sys.polys:
                assert sys.residual(p.coordinates().astype(complex)) < 1e-10


class TestSpectrum:
    def test_default_spectrum_pattern(self):
        sig = FlagSignature((1, 2), 4)
        c = default_spectrum(sig)
        assert np.allclose(c, [3, 2, 1, 1])
        values = validate_spectrum(sig, c)
        assert np.allclose(values, [3, 2, 1])

    def test_perturbed_spectrum_keeps_pattern(self):
        sig = FlagSignature((2,), 5)
        c = default_spectrum(sig, np.random.default_rng(4))
        validate_spectrum(sig, c)
        assert abs(c[0] - 2.0) < 0.011 and abs(c[0] - 2.0) > 0

    def test_rejects_wrong_pattern(self):
        sig = FlagSignature((2,), 3)
        with pytest.raises(ValueError):
            validate_spectrum(sig, np.array([1.0, 2.0, 3.0]))


class TestConvert:
    def test_frame_to_pluecker(self):
        sig = FlagSignature((1, 2), 3)
        p = convert(StiefelPoint(sig, np.eye(3)[:, :2]), "pluecker")
        assert np.allclose(p.coords[0], [1, 0, 0])
        assert np.allclose(p.coords[1], [1, 0, 0])

    def test_frame_to_projection(self):
        sig = FlagSignature((1, 2), 3)
        p = convert(StiefelPoint(sig, np.eye(3)[:, :2]), "projection")
        assert np.allclose(p.mats[0], np.diag([1.0, 0, 0]))
        assert np.allclose(p.mats[1], np.diag([1.0, 1.0, 0]))

    @pytest.mark.parametrize("steps,n", [((1, 2), 3), ((1, 2), 4)])
    def test_triangle_commutes(self, steps, n):
        sig = FlagSignature(steps, n)
        rng = np.random.default_rng(23)
        spectrum = default_spectrum(sig, rng)
        for _ in range(100):
            z = random_point("stiefel", sig, rng)
            direct = convert(z, "isospectral", spectrum=spectrum)
            via = convert(convert(z, "projection"), "isospectral", spectrum=spectrum)
            assert np.abs(direct.s - via.s).max() < 1e-10

    def test_projection_round_trip_preserves_flag(self):
        sig = FlagSignature((1, 2), 4)
        rng = np.random.default_rng(5)
        for _ in range(20):
            proj = random_point("projection", sig, rng)
            back = convert(convert(proj, "stiefel"), "projection")
            for a, b in zip(proj.mats, back.mats):
                assert np.abs(a - b).max() < 1e-10

    def test_isospectral_round_trip_preserves_flag(self):
        sig = FlagSignature((1, 2), 4)
        rng = np.random.default_rng(6)
        spectrum = default_spectrum(sig, rng)
        for _ in range(20):
            z = random_point("stiefel", sig, rng)
            iso = convert(z, "isospectral", spectrum=spectrum)
            z2 = convert(iso, "stiefel")
            p1 = convert(z, "projection")
            p2 = convert(z2, "projection")
            for a, b in zip(p1.mats, p2.mats):
                assert np.abs(a - b).max() < 1e-10

    def test_unsupported_edges(self):
        sig = FlagSignature((1, 2), 3)
        rng = np.random.default_rng(1)
        pl = random_point("pluecker", sig, rng)
        with pytest.raises(UnsupportedEdgeError):
            convert(pl, "projection")
        with pytest.raises(UnsupportedEdgeError):
            convert(pl, "stiefel")

    def test_off_variety_rejected(self):
        sig = FlagSignature((1, 2), 3)
        bad = StiefelPoint(sig, np.ones((3, 2)))
        with pytest.raises(OffVarietyError):
            convert(bad, "projection")

    def test_point_json_round_trip(self):
        sig = FlagSignature((1, 2), 3)
        rng = np.random.default_rng(2)
        spectrum = default_spectrum(sig, rng)
        for model in ["stiefel", "pluecker", "projection", "isospectral"]:
            p = random_point(model, sig, rng, spectrum=spectrum)
            q = point_from_json(p.to_json())
            assert np.abs(q.coordinates() - p.coordinates()).max() < 1e-15


class TestSmoothness:
    @pytest.mark.parametrize("steps,n", GRID)
    @pytest.mark.parametrize("model", ["stiefel", "pluecker", "projection", "isospectral"])
    def test_rank_equals_codim_at_random_points(self, steps, n, model):
        sig = FlagSignature(steps, n)
        rng = np.random.default_rng(31)
        spectrum = default_spectrum(sig, rng) if model == "isospectral" else None
        for _ in range(20):
            p = random_point(model, sig, rng, spectrum=spectrum)
            rep = smoothness_check(p, spectrum=spectrum)
            assert rep.passed, (model, sig.parse_key(), rep)

    def test_stiefel_coordinate_frame_rank(self):
        sig = FlagSignature((2,), 3)
        rep = smoothness_check(StiefelPoint(sig, np.eye(3)[:, :2]))
        assert rep.rank == 3 and rep.codim == 3

    def test_stiefel_frame_jacobian_rank_in_4_space(self):
        from flagopt.linalg import numerical_rank

        sig = FlagSignature((2,), 4)
        system = generators("stiefel", sig)
        z = np.eye(4)[:, :2].flatten(order="F").astype(complex)
        assert numerical_rank(system.jacobian_at(z)) == 3  # binom(k+1, 2)

    def test_projection_coordinate_flag_rank(self):
        sig = FlagSignature((1, 2), 3)
        p = convert(StiefelPoint(sig, np.eye(3)[:, :2]), "projection")
        rep = smoothness_check(p)
        assert rep.rank == 9 and rep.codim == 9  # ambient 12 - dim 3

    def test_isospectral_diag_rank(self):
        sig = FlagSignature((1, 2), 3)
        rng = np.random.default_rng(8)
        spectrum = default_spectrum(sig, rng)
        z = StiefelPoint(sig, np.eye(3)[:, :2])
        iso = convert(z, "isospectral", spectrum=spectrum)
        rep = smoothness_check(iso)
        assert rep.rank == 3 and rep.codim == 3  # n + sum binom(block,2)

    def test_off_variety_point_raises(self):
        sig = FlagSignature((2,), 4)
        rng = np.random.default_rng(9)
        p = random_point("projection", sig, rng)
        p.mats[0] = p.mats[0] + 0.1
        with pytest.raises(OffVarietyError):
            smoothness_check(p)

    def test_ambient_dimensions(self):
        sig = FlagSignature((1, 2), 3)
        assert ambient_dimension("pluecker", sig) == 6
        assert ambient_dimension("projection", sig) == 12
        assert ambient_dimension("isospectral", sig) == 6
        assert ambient_dimension("stiefel", sig) == 6
        assert variety_dimension("pluecker", sig) == 5  # flag dim + one scale per step
