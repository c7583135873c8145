"""Two-dimensional estimation: binning, mixed-derivative functionals
against a literal double-sum oracle, the fixed-point selector, spectral
smoothing, and the masked-domain heat solver."""

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermeval

from diffkde import (
    BinnedHistogram2D,
    DensityEstimate2D,
    DomainMask,
    Grid1D,
    Grid2D,
    bin_linear_2d,
    gamma_2d,
    gauss_kde_2d,
    integrate_2d,
    isj2d_select,
    make_grid_2d,
    normal_ref_2d_select,
    psi_hat,
    q_const,
    solve_heat_masked,
    t_stage_2d,
)


def _unit_grid(n=2 ** 8):
    return Grid2D(Grid1D(0.0, 1.0, n), Grid1D(0.0, 1.0, n))


def _gauss_deriv_factor(d, order, s):
    """phi^(order)(d; s) for even order, via probabilists' Hermite."""
    coef = np.zeros(order + 1)
    coef[-1] = 1.0
    z = d / np.sqrt(s)
    return s ** (-order / 2.0) * hermeval(z, coef) * np.exp(-0.5 * z * z) / np.sqrt(
        2.0 * np.pi * s)


def direct_psi(pts, i, j, t_ij):
    """Free-space double-sum oracle for the mixed derivative functional
    E[f^(2i,2j)(X)]: N^-2 sum_{k,m} phi^(2i)(dx; 2t) phi^(2j)(dy; 2t),
    which carries the sign (-1)^{i+j} on its own."""
    N = pts.shape[0]
    s = 2.0 * t_ij
    dx = pts[:, 0][:, None] - pts[:, 0][None, :]
    dy = pts[:, 1][:, None] - pts[:, 1][None, :]
    term = _gauss_deriv_factor(dx, 2 * i, s) * _gauss_deriv_factor(dy, 2 * j, s)
    return float(term.sum() / N ** 2)


class TestQConst:
    def test_values(self):
        r = 1.0 / np.sqrt(2.0 * np.pi)
        assert q_const(0) == pytest.approx(r)
        assert q_const(1) == pytest.approx(-r)
        assert q_const(2) == pytest.approx(3.0 * r)
        assert q_const(3) == pytest.approx(-15.0 * r)

    def test_invalid(self):
        with pytest.raises(ValueError):
            q_const(-1)


class TestBinning2D:
    def test_corner_split(self):
        g = _unit_grid(16)
        mid = 0.5 * (g.x1.nodes[4] + g.x1.nodes[5])
        b = bin_linear_2d([[mid, g.x2.nodes[7]]], g)
        assert b.weights[4, 7] == pytest.approx(0.5)
        assert b.weights[5, 7] == pytest.approx(0.5)
        assert b.weights.sum() == pytest.approx(1.0)

    def test_mass_and_means(self):
        p = np.random.default_rng(0).uniform(0.1, 0.9, size=(500, 2))
        g = _unit_grid(64)
        b = bin_linear_2d(p, g)
        assert b.weights.sum() == pytest.approx(1.0, abs=1e-12)
        m1 = (b.weights.sum(axis=1) @ g.x1.nodes)
        assert m1 == pytest.approx(p[:, 0].mean(), abs=1e-10)

    def test_outside_grid(self):
        with pytest.raises(ValueError, match="outside"):
            bin_linear_2d([[1.5, 0.5]], _unit_grid(16))

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            bin_linear_2d(np.ones((3, 3)), _unit_grid(16))
        with pytest.raises(ValueError):
            bin_linear_2d([[0.5, np.nan]], _unit_grid(16))

    def test_make_grid_2d_padding(self):
        p = np.array([[0.0, 10.0], [1.0, 20.0]])
        g = make_grid_2d(p, n=16, pad_fraction=0.1)
        assert g.x1.lo == pytest.approx(-0.1) and g.x1.hi == pytest.approx(1.1)
        assert g.x2.lo == pytest.approx(9.0) and g.x2.hi == pytest.approx(21.0)

    def test_integrate_2d_constant(self):
        g = Grid2D(Grid1D(0.0, 2.0, 32), Grid1D(0.0, 3.0, 64))
        assert integrate_2d(np.ones(g.shape), g) == pytest.approx(6.0)


class TestPsiHat:
    @pytest.mark.parametrize("i,j", [(1, 1), (2, 0), (0, 2), (2, 1)])
    def test_double_sum_oracle(self, i, j):
        rng = np.random.default_rng(30)
        pts = 0.35 + 0.3 * rng.beta(2.0, 2.0, size=(50, 2))
        b = bin_linear_2d(pts, _unit_grid(2 ** 10))
        t_ij = 2e-3
        assert psi_hat(i, j, t_ij, b) == pytest.approx(
            direct_psi(pts, i, j, t_ij), rel=1e-3)

    def test_index_symmetry_under_transpose(self):
        rng = np.random.default_rng(31)
        pts = rng.uniform(0.2, 0.8, size=(200, 2))
        b = bin_linear_2d(pts, _unit_grid(2 ** 8))
        bt = BinnedHistogram2D(b.grid, b.weights.T)
        assert psi_hat(1, 2, 3e-3, b) == pytest.approx(
            psi_hat(2, 1, 3e-3, bt), rel=1e-12)

    def test_invalid_t(self):
        b = bin_linear_2d([[0.5, 0.5]], _unit_grid(16))
        with pytest.raises(ValueError):
            psi_hat(1, 1, 0.0, b)


class TestStage2D:
    def test_formula(self):
        # q(1)q(2) < 0, so level-4 (positive) functionals give a positive bracket
        i, j, N = 1, 2, 800
        pa, pb = 0.4, 0.6  # psi_{i+1,j}, psi_{i,j+1}: i+j even, positive
        expect = ((1.0 + 2.0 ** (-i - j - 1)) / 3.0 * (
            -2.0 * q_const(i) * q_const(j)) / (N * (pa + pb))) ** (1.0 / (2 + i + j))
        assert t_stage_2d(i, j, pa, pb, N) == pytest.approx(expect, rel=1e-13)

    def test_nonpositive_bracket(self):
        # q(1)^2 > 0, so a positive psi sum makes the bracket negative
        with pytest.raises(ArithmeticError):
            t_stage_2d(1, 1, 0.4, 0.5, 800)


class TestSelector2D:
    def test_recursion_depth_insensitive(self):
        pts = np.random.default_rng(1).multivariate_normal(
            [0.0, 0.0], [[1.0, 0.3], [0.3, 1.0]], size=1000)
        z4 = isj2d_select(pts, k=4)[0]
        z5 = isj2d_select(pts, k=5)[0]
        assert abs(z4 - z5) / z4 < 0.15

    def test_isotropic_sample_gives_isotropic_bandwidths(self):
        pts = np.random.default_rng(1).normal(size=(4000, 2))
        _, t1, t2, rep = isj2d_select(pts)
        assert abs(t1 / t2 - 1.0) < 0.15
        assert rep.converged and rep.method == "isj2d"

    def test_axis_swap_swaps_bandwidths(self):
        pts = np.random.default_rng(2).normal(size=(600, 2)) * [1.0, 3.0]
        _, t1, t2, _ = isj2d_select(pts)
        _, s1, s2, _ = isj2d_select(pts[:, ::-1])
        assert s1 == pytest.approx(t2, rel=1e-8)
        assert s2 == pytest.approx(t1, rel=1e-8)

    def test_per_axis_affine_equivariance(self):
        pts = np.random.default_rng(3).normal(size=(800, 2))
        _, t1, t2, _ = isj2d_select(pts)
        scaled = pts * [2.5, 1.0] + [40.0, -7.0]
        _, s1, s2, _ = isj2d_select(scaled)
        assert s1 == pytest.approx(2.5 ** 2 * t1, rel=1e-6)
        assert s2 == pytest.approx(t2, rel=1e-6)

    def test_small_sample_rejected(self):
        with pytest.raises(ValueError):
            isj2d_select(np.random.default_rng(4).normal(size=(40, 2)))

    def test_normal_reference_agrees_on_gaussian(self):
        pts = np.random.default_rng(2).normal(size=(2000, 2))
        _, t1, t2, _ = isj2d_select(pts)
        _, s1, s2, rep = normal_ref_2d_select(pts)
        assert abs(s1 - t1) / t1 < 0.30
        assert abs(s2 - t2) / t2 < 0.30
        assert rep.method == "normal_ref_2d"

    def test_gamma_validation(self):
        b = bin_linear_2d([[0.5, 0.5], [0.4, 0.6]], _unit_grid(16))
        with pytest.raises(ValueError):
            gamma_2d(0.01, 2, b, 2)
        with pytest.raises(ValueError):
            gamma_2d(-1.0, 4, b, 2)


class TestGaussKde2D:
    def test_single_point_peak(self):
        g = _unit_grid(2 ** 8)
        b = bin_linear_2d([[0.5, 0.5]], g)
        t = 1e-3
        est = gauss_kde_2d(b, t)
        # far from the boundary the peak is the free-space kernel height
        assert est.values.max() == pytest.approx(1.0 / (2.0 * np.pi * t), rel=1e-2)

    def test_matches_free_space_oracle_in_interior(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0.35, 0.65, size=(60, 2))
        g = _unit_grid(2 ** 8)
        t = 2e-3
        est = gauss_kde_2d(bin_linear_2d(pts, g), t)
        ii = np.arange(80, 176)  # central window
        X1, X2 = np.meshgrid(g.x1.nodes[ii], g.x2.nodes[ii], indexing="ij")
        dx = X1[..., None] - pts[:, 0]
        dy = X2[..., None] - pts[:, 1]
        oracle = np.exp(-(dx ** 2 + dy ** 2) / (2.0 * t)).mean(-1) / (2.0 * np.pi * t)
        assert np.max(np.abs(est.values[np.ix_(ii, ii)] - oracle)) < 1e-3 * oracle.max()

    def test_anisotropic_pair(self):
        g = _unit_grid(2 ** 7)
        b = bin_linear_2d([[0.5, 0.5]], g)
        est = gauss_kde_2d(b, (4e-3, 1e-3))
        # wider in x1 than in x2: compare equal offsets along each axis
        v = est.values
        i0 = j0 = 2 ** 6
        assert v[i0 + 10, j0] > v[i0, j0 + 10]

    def test_mass(self):
        pts = np.random.default_rng(6).uniform(0.1, 0.9, size=(300, 2))
        est = gauss_kde_2d(bin_linear_2d(pts, _unit_grid(2 ** 8)), 0.01)
        assert est.integral == pytest.approx(1.0, abs=1e-8)

    def test_invalid_t(self):
        b = bin_linear_2d([[0.5, 0.5]], _unit_grid(16))
        with pytest.raises(ValueError):
            gauss_kde_2d(b, (0.01, 0.0))


class TestMaskedHeat:
    def test_full_rectangle_matches_spectral(self):
        rng = np.random.default_rng(7)
        pts = np.column_stack([rng.uniform(0.2, 0.8, 800),
                               rng.uniform(0.3, 0.7, 800)])
        g = _unit_grid(2 ** 8)
        b = bin_linear_2d(pts, g)
        mask = DomainMask(g, np.ones(g.shape, dtype=bool))
        t = 0.13
        masked = solve_heat_masked(b, mask, t)
        spectral = gauss_kde_2d(b, t)
        assert np.max(np.abs(masked.values - spectral.values)) <= 1e-4 * (
            spectral.values.max())

    def test_mass_conserved_and_outside_zero(self):
        g = _unit_grid(2 ** 7)
        inside = np.zeros(g.shape, dtype=bool)
        inside[20:100, 30:110] = True
        mask = DomainMask(g, inside)
        rng = np.random.default_rng(8)
        lo1, hi1 = g.x1.nodes[25], g.x1.nodes[95]
        lo2, hi2 = g.x2.nodes[35], g.x2.nodes[105]
        pts = np.column_stack([rng.uniform(lo1, hi1, 400),
                               rng.uniform(lo2, hi2, 400)])
        b = bin_linear_2d(pts, g)
        est = solve_heat_masked(b, mask, 0.05)
        assert est.integral == pytest.approx(1.0, abs=1e-9)
        assert np.all(est.values[~inside] == 0.0)

    def test_long_time_uniform_inside(self):
        g = _unit_grid(2 ** 7)
        inside = np.zeros(g.shape, dtype=bool)
        inside[30:90, 30:90] = True
        mask = DomainMask(g, inside)
        pts = np.column_stack([np.full(50, g.x1.nodes[60]),
                               np.full(50, g.x2.nodes[60])])
        b = bin_linear_2d(pts, g)
        est = solve_heat_masked(b, mask, 5.0, n_steps=256, rannacher=32)
        v = est.values[inside]
        assert np.ptp(v) < 1e-6 * v.mean()

    def test_data_outside_mask_rejected(self):
        g = _unit_grid(2 ** 7)
        inside = np.zeros(g.shape, dtype=bool)
        inside[40:80, 40:80] = True
        b = bin_linear_2d([[0.05, 0.05]], g)
        with pytest.raises(ValueError, match="outside the mask"):
            solve_heat_masked(b, DomainMask(g, inside), 0.01)

    def test_mask_validation(self):
        g = _unit_grid(16)
        with pytest.raises(ValueError):
            DomainMask(g, np.zeros(g.shape, dtype=bool))
        two = np.zeros(g.shape, dtype=bool)
        two[1:3, 1:3] = True
        two[10:12, 10:12] = True
        with pytest.warns(UserWarning, match="disconnected"):
            DomainMask(g, two)

    def test_grid_mismatch(self):
        b = bin_linear_2d([[0.5, 0.5]], _unit_grid(16))
        other = _unit_grid(32)
        with pytest.raises(ValueError):
            solve_heat_masked(b, DomainMask(other, np.ones(other.shape, bool)), 0.01)


class TestEstimate2DContainer:
    def test_shape_checks(self):
        g = _unit_grid(16)
        with pytest.raises(ValueError):
            DensityEstimate2D(g, np.ones((8, 8)), (0.01, 0.01))
        with pytest.raises(ValueError):
            BinnedHistogram2D(g, np.ones((8, 16)))
