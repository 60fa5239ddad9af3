import math

import numpy as np
import pytest

from plmix.datagen import (
    CensoredSample,
    Exponential,
    MixingModel,
    RandomStream,
    Uniform,
    Weibull,
    ar1_gaussian,
    generate_sample,
    to_marginal,
    true_model,
)
from plmix.experiments import ks_distance


REF_MODEL = MixingModel(Exponential(1.0), Exponential(3.0 / 7.0), rho_x=0.5, rho_y=0.5)


class TestMarginals:
    @pytest.mark.parametrize(
        "marginal",
        [Exponential(1.3), Weibull(1.7, 0.8), Uniform(2.5)],
        ids=["exponential", "weibull", "uniform"],
    )
    def test_quantile_inverts_cdf(self, marginal):
        p = np.linspace(0.01, 0.99, 25)
        t = marginal.quantile(p)
        np.testing.assert_allclose(marginal.cdf(t), p, atol=1e-12)
        assert (marginal.pdf(t) > 0).all()

    def test_cdf_increasing_and_bounded(self):
        m = Weibull(2.2, 1.5)
        t = np.linspace(0.0, 8.0, 200)
        c = m.cdf(t)
        assert (np.diff(c) >= 0).all()
        assert c[0] == 0.0 and c[-1] <= 1.0

    @pytest.mark.parametrize(
        "bad",
        [lambda: Exponential(0.0), lambda: Exponential(-1.0),
         lambda: Weibull(-0.5, 1.0), lambda: Weibull(1.0, 0.0),
         lambda: Uniform(-2.0)],
    )
    def test_invalid_parameters_rejected(self, bad):
        with pytest.raises(ValueError):
            bad()


class TestAr1:
    def test_zero_rho_gives_iid_normals(self):
        # AR(1) with zero correlation: lag-1 sample correlation near 0.
        e = ar1_gaussian(200_000, 0.0, RandomStream(11, 0))
        lag1 = np.corrcoef(e[:-1], e[1:])[0, 1]
        assert abs(lag1) < 0.01

    def test_lag_one_correlation_matches_rho(self):
        # Monte Carlo moment check at rho = 0.5.
        e = ar1_gaussian(100_000, 0.5, RandomStream(12, 0))
        lag1 = np.corrcoef(e[:-1], e[1:])[0, 1]
        assert abs(lag1 - 0.5) < 0.01

    def test_marginal_is_standard_normal(self):
        e = ar1_gaussian(200_000, 0.8, RandomStream(13, 0))
        assert abs(e.mean()) < 0.02
        assert abs(e.std() - 1.0) < 0.02

    def test_deterministic_given_stream(self):
        a = ar1_gaussian(1000, 0.6, RandomStream(42, 3))
        b = ar1_gaussian(1000, 0.6, RandomStream(42, 3))
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = ar1_gaussian(100, 0.6, RandomStream(42, 3))
        b = ar1_gaussian(100, 0.6, RandomStream(42, 4))
        assert not np.array_equal(a, b)

    @pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
    def test_nonstationary_rho_rejected(self, rho):
        with pytest.raises(ValueError):
            ar1_gaussian(10, rho, RandomStream(0, 0))

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            ar1_gaussian(0, 0.5, RandomStream(0, 0))


class TestToMarginal:
    def test_median_of_exponential(self):
        # Phi(0) = 1/2, so the image of 0 is the marginal median log 2.
        out = to_marginal(np.array([0.0]), Exponential(1.0))
        assert out[0] == pytest.approx(math.log(2.0), abs=1e-12)

    def test_median_of_uniform(self):
        out = to_marginal(np.array([0.0]), Uniform(1.0))
        assert out[0] == pytest.approx(0.5, abs=1e-15)

    def test_extreme_normals_stay_finite(self):
        out = to_marginal(np.array([-50.0, 50.0]), Exponential(1.0))
        assert np.isfinite(out).all()
        assert out[0] >= 0.0

    def test_glivenko_cantelli_under_dependence(self):
        # Strongly dependent input (rho = 0.8), exponential target: the
        # empirical cdf must still converge uniformly to 1 - e^{-t}.
        g = ar1_gaussian(100_000, 0.8, RandomStream(21, 0))
        v = np.sort(to_marginal(g, Exponential(1.0)))
        edf = np.arange(1, v.size + 1) / v.size
        sup = np.abs(edf - (1.0 - np.exp(-v))).max()
        assert sup < 0.01


class TestGenerateSample:
    def test_censoring_rarely_binds_with_distant_censoring(self):
        model = MixingModel(Exponential(1.0), Uniform(1e6))
        s = generate_sample(model, 4000, RandomStream(31, 0))
        assert s.delta.mean() > 0.999

    def test_independent_exponentials_censoring_proportion(self):
        # P(X <= Y) = 1/(1 + r) for Exp(1) lifetimes and Exp(r) censoring;
        # r = 3/7 gives 30% censoring.
        model = MixingModel(Exponential(1.0), Exponential(3.0 / 7.0))
        s = generate_sample(model, 50_000, RandomStream(32, 0))
        assert s.delta.mean() == pytest.approx(0.7, abs=0.01)

    def test_latents_consistent(self):
        s = generate_sample(REF_MODEL, 500, RandomStream(33, 0), keep_latents=True)
        np.testing.assert_array_equal(s.z, np.minimum(s.x, s.y))
        np.testing.assert_array_equal(s.delta, (s.x <= s.y).astype(int))

    def test_chains_independent(self):
        s = generate_sample(REF_MODEL, 100_000, RandomStream(34, 0), keep_latents=True)
        assert abs(np.corrcoef(s.x, s.y)[0, 1]) < 0.01

    def test_deterministic(self):
        a = generate_sample(REF_MODEL, 200, RandomStream(35, 7))
        b = generate_sample(REF_MODEL, 200, RandomStream(35, 7))
        np.testing.assert_array_equal(a.z, b.z)
        np.testing.assert_array_equal(a.delta, b.delta)

    def test_stationarity_first_vs_second_half(self):
        s = generate_sample(REF_MODEL, 40_000, RandomStream(36, 0))
        half = s.n // 2
        assert ks_distance(s.z[:half], s.z[half:]) < 0.03

    def test_marginal_of_z_matches_h(self):
        truth = true_model(REF_MODEL)
        s = generate_sample(REF_MODEL, 50_000, RandomStream(37, 0))
        zs = np.sort(s.z)
        edf = np.arange(1, zs.size + 1) / zs.size
        assert np.abs(edf - truth.H(zs)).max() < 0.015


class TestCensoredSample:
    def test_validation(self):
        with pytest.raises(ValueError):
            CensoredSample(z=np.array([1.0, -2.0]), delta=np.array([1, 0]))
        with pytest.raises(ValueError):
            CensoredSample(z=np.array([1.0, 2.0]), delta=np.array([1, 2]))
        with pytest.raises(ValueError):
            CensoredSample(z=np.array([1.0]), delta=np.array([1, 0]))

    def test_inconsistent_latents_rejected(self):
        with pytest.raises(ValueError):
            CensoredSample(
                z=np.array([1.0]), delta=np.array([1]),
                x=np.array([2.0]), y=np.array([1.0]),
            )

    def test_csv_round_trip(self, tmp_path):
        s = generate_sample(REF_MODEL, 50, RandomStream(38, 0))
        path = tmp_path / "sample.csv"
        s.to_csv(path)
        back = CensoredSample.from_csv(path)
        np.testing.assert_array_equal(s.z, back.z)
        np.testing.assert_array_equal(s.delta, back.delta)

    def test_csv_bad_rows_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("z,delta\n1.0,2\n")
        with pytest.raises(ValueError, match="row 2"):
            CensoredSample.from_csv(path)
        path.write_text("z,delta\nxyz,1\n")
        with pytest.raises(ValueError, match="row 2"):
            CensoredSample.from_csv(path)
        path.write_text("time,delta\n1.0,1\n")
        with pytest.raises(ValueError, match="header"):
            CensoredSample.from_csv(path)


class TestTrueModel:
    def test_exp_exp_closed_forms(self):
        # Exp(1)/Exp(1): Hbar = e^{-2t} and Fstar = (1 - e^{-2t})/2.
        truth = true_model(MixingModel(Exponential(1.0), Exponential(1.0)))
        t = np.array([0.1, 0.7, 2.0])
        np.testing.assert_allclose(truth.Hbar(t), np.exp(-2 * t), rtol=1e-14)
        np.testing.assert_allclose(truth.Fstar(t), (1 - np.exp(-2 * t)) / 2, rtol=1e-14)

    def test_quadrature_route_matches_closed_form(self):
        # Weibull(1, 1) is the same law as Exp(1) but takes the generic
        # quadrature path, giving an independent check of both routes.
        closed = true_model(MixingModel(Exponential(1.0), Exponential(1.0)))
        generic = true_model(MixingModel(Weibull(1.0, 1.0), Exponential(1.0)))
        for t in (0.2, 1.0, 3.0):
            assert generic.Fstar(t) == pytest.approx(closed.Fstar(t), rel=1e-9)

    def test_lambda_quantile_identity(self):
        truth = true_model(REF_MODEL)
        p = np.linspace(0.05, 0.95, 10)
        np.testing.assert_allclose(truth.Lambda(truth.Q(p)), -np.log1p(-p), rtol=1e-12)

    @pytest.mark.parametrize(
        "model",
        [
            MixingModel(Exponential(1.0), Exponential(3.0 / 7.0)),
            MixingModel(Weibull(1.5, 1.0), Uniform(3.0)),
        ],
        ids=["exp-exp", "weibull-uniform"],
    )
    def test_subdistributions_sum_to_one(self, model):
        truth = true_model(model)
        big = 60.0
        assert truth.Fstar(big) + truth.Gstar(big) == pytest.approx(1.0, abs=1e-8)

    def test_hbar_identity(self):
        truth = true_model(REF_MODEL)
        t = np.linspace(0.0, 4.0, 30)
        np.testing.assert_allclose(
            truth.Hbar(t), (1 - truth.F(t)) * (1 - truth.G(t)), rtol=1e-14
        )

    def test_tau_exponential_closed_form(self):
        truth = true_model(REF_MODEL)
        # Hbar(t) = e^{-(10/7) t}, so tau solves e^{-(10/7) tau} = eps.
        assert truth.tau(0.05) == pytest.approx(-math.log(0.05) * 0.7, abs=1e-9)

    def test_quantile_h_inverts_h(self):
        truth = true_model(REF_MODEL)
        for p in (0.2, 0.5, 0.9):
            assert truth.H(truth.quantile_H(p)) == pytest.approx(p, abs=1e-9)

    def test_hazard_is_density_over_survival(self):
        truth = true_model(REF_MODEL)
        t = np.linspace(0.1, 2.0, 7)
        np.testing.assert_allclose(truth.hazard(t), np.ones_like(t), rtol=1e-12)
