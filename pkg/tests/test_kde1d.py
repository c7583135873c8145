"""Gaussian KDE (exact and spectral) and the interval reflection kernel."""

import numpy as np
import pytest
from scipy.stats import ks_1samp

from diffkde import (
    Grid1D,
    bin_linear,
    gauss_kde_exact,
    gauss_kde_spectral,
    integrate,
    make_grid,
    mode_count,
    theta_estimator,
    theta_kernel,
    theta_kernel_cosine,
    theta_kernel_images,
    theta_sample,
)

SQRT_2PI = np.sqrt(2.0 * np.pi)


class TestGaussKdeExact:
    def test_kernel_peak(self):
        assert gauss_kde_exact([0.0], [0.0], 1.0)[0] == pytest.approx(1.0 / SQRT_2PI)

    def test_two_point_value(self):
        val = gauss_kde_exact([-1.0, 1.0], [0.0], 1.0)[0]
        assert val == pytest.approx(np.exp(-0.5) / SQRT_2PI, rel=1e-12)

    def test_mirror_symmetry(self):
        x = np.random.default_rng(0).normal(size=50)
        xs = np.linspace(-3, 3, 7)
        a = gauss_kde_exact(x, xs, 0.3)
        b = gauss_kde_exact(-x, -xs, 0.3)
        assert np.allclose(a, b, rtol=1e-13)

    def test_nonpositive_t(self):
        with pytest.raises(ValueError):
            gauss_kde_exact([0.0], [0.0], 0.0)


class TestGaussKdeSpectral:
    def test_large_t_uniform_limit(self):
        x = np.random.default_rng(1).normal(size=200)
        g = make_grid(x, n=2 ** 10)
        est = gauss_kde_spectral(bin_linear(x, g), 100.0 * g.range ** 2)
        assert np.allclose(est.values, 1.0 / g.range, rtol=1e-8)

    def test_interior_agreement_with_exact(self):
        x = np.random.default_rng(2).normal(size=500)
        t = 0.05
        # pad by more than 6 sqrt(t) so boundary images are negligible
        g = Grid1D(x.min() - 3.0, x.max() + 3.0, 2 ** 12)
        est = gauss_kde_spectral(bin_linear(x, g), t)
        exact = gauss_kde_exact(x, g.nodes, t)
        assert np.max(np.abs(est.values - exact)) <= 1e-4 * exact.max()

    def test_mass(self):
        x = np.random.default_rng(3).normal(size=300)
        g = make_grid(x, n=2 ** 12)
        est = gauss_kde_spectral(bin_linear(x, g), 0.1)
        assert est.integral == pytest.approx(1.0, abs=1e-9)

    def test_nonpositive_t(self):
        g = Grid1D(0.0, 1.0, 16)
        with pytest.raises(ValueError):
            gauss_kde_spectral(bin_linear([0.5], g), -1.0)


class TestThetaKernel:
    def test_dual_representations_agree(self):
        pts = np.linspace(0.0, 1.0, 11)
        for t in (1e-3, 1e-2, 0.1, 1.0, 10.0):
            ims = theta_kernel_images(pts[:, None], pts[None, :], t)
            cos = theta_kernel_cosine(pts[:, None], pts[None, :], t)
            assert np.max(np.abs(ims - cos)) < 1e-10

    def test_symmetry(self):
        assert theta_kernel_images(0.2, 0.9, 0.04) == pytest.approx(
            theta_kernel_images(0.9, 0.2, 0.04), rel=1e-13)

    def test_mass_by_quadrature(self):
        g = Grid1D(0.0, 1.0, 2 ** 12)
        for t in (1e-3, 0.05, 2.0):
            vals = theta_kernel(g.nodes, 0.3, t)
            assert integrate(vals, g) == pytest.approx(1.0, abs=1e-8)

    def test_large_t_cosine_form(self):
        t = 30.0
        x, y = 0.25, 0.6
        approx = 1.0 + 2.0 * np.exp(-0.5 * np.pi ** 2 * t) * np.cos(
            np.pi * x) * np.cos(np.pi * y)
        assert theta_kernel_cosine(x, y, t) == pytest.approx(approx, abs=1e-15)

    def test_cross_checks_at_reference_points(self):
        assert theta_kernel_cosine(0.0, 0.0, 1.0) == pytest.approx(
            theta_kernel_images(0.0, 0.0, 1.0), abs=1e-12)
        assert theta_kernel_cosine(0.3, 0.7, 0.01) == pytest.approx(
            theta_kernel_images(0.3, 0.7, 0.01), abs=1e-10)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            theta_kernel_images(1.5, 0.5, 0.1)
        with pytest.raises(ValueError):
            theta_kernel_cosine(0.5, -0.1, 0.1)


class TestThetaEstimator:
    def test_matches_spectral(self):
        x = np.random.default_rng(4).uniform(size=400)
        g = Grid1D(0.0, 1.0, 2 ** 10)
        t = 0.01
        a = theta_estimator(x, t, g).values
        b = gauss_kde_spectral(bin_linear(x, g), t).values
        assert np.max(np.abs(a - b)) < 1e-9

    def test_single_point_mass(self):
        g = Grid1D(0.0, 1.0, 2 ** 10)
        est = theta_estimator([0.5], 1e-3, g)
        assert est.integral == pytest.approx(1.0, abs=1e-6)

    def test_uniform_in_the_limit(self):
        g = Grid1D(0.0, 1.0, 2 ** 10)
        est = theta_estimator(np.random.default_rng(5).uniform(size=100), 50.0, g)
        assert np.allclose(est.values, 1.0, atol=1e-8)

    def test_boundary_value_versus_plain_kde(self):
        # beta-density data: reflection keeps the boundary value near f(0)=4
        # while the plain Gaussian KDE halves it
        rng = np.random.default_rng(6)
        x = rng.beta(1.0, 4.0, size=1000)
        t = 0.05248 ** 2
        g = Grid1D(0.0, 1.0, 2 ** 10)
        at0 = theta_estimator(x, t, g).values[0]
        plain = gauss_kde_exact(x, [0.0], t)[0]
        assert abs(at0 - 4.0) < 1.0  # within 25 percent of 4
        assert abs(plain - 2.0) < 0.5

    def test_data_outside_interval(self):
        g = Grid1D(0.0, 1.0, 2 ** 10)
        with pytest.raises(ValueError):
            theta_estimator([1.2], 0.01, g)


class TestThetaSample:
    def test_outputs_in_domain(self):
        rng = np.random.default_rng(7)
        draws = theta_sample(0.9, 4.0, rng, size=10 ** 4)
        assert draws.min() >= 0.0 and draws.max() <= 1.0

    def test_small_t_concentrates_at_y(self):
        rng = np.random.default_rng(8)
        draws = theta_sample(0.3, 1e-10, rng, size=1000)
        assert np.max(np.abs(draws - 0.3)) < 1e-3

    def test_ks_against_kernel_cdf(self):
        y, t = 0.5, 0.04
        rng = np.random.default_rng(9)
        draws = theta_sample(y, t, rng, size=10 ** 5)
        g = Grid1D(0.0, 1.0, 2 ** 12)
        pdf = theta_kernel_images(g.nodes, y, t)
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * g.step)))
        cdf /= cdf[-1]
        stat = ks_1samp(draws, lambda q: np.interp(q, g.nodes, cdf)).statistic
        assert stat < 0.01

    def test_y_validation(self):
        with pytest.raises(ValueError):
            theta_sample(1.5, 0.1, np.random.default_rng(0))


class TestModeCount:
    def _est(self, values):
        g = Grid1D(0.0, 1.0, 2 ** 4)
        v = np.asarray(values, dtype=float)
        v = np.resize(v, 16)
        from diffkde import DensityEstimate1D
        return DensityEstimate1D(g, v, 0.01)

    def test_constant(self):
        assert mode_count(self._est(np.ones(16))) == 0

    def test_single_bump(self):
        u = np.linspace(0, 1, 16)
        assert mode_count(self._est(np.exp(-20 * (u - 0.5) ** 2))) == 1

    def test_claw_sample_monotone_in_t(self):
        from diffkde.testbed import registry
        mix = registry()["claw"]
        x = mix.sample(2000, np.random.default_rng(10))
        g = make_grid(x, n=2 ** 12)
        b = bin_linear(x, g)
        counts = [mode_count(gauss_kde_spectral(b, t))
                  for t in (1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0)]
        assert counts[0] >= 5
        assert counts[-1] == 1
        assert all(a >= b for a, b in zip(counts, counts[1:]))
