"""Grid, transform, norm, and energy tests.

Oracles:
* a direct O(N^2) DFT implementing the normalization from the module docstring,
* closed-form norms/energies of single modes and constants,
* adaptive quadrature (scipy.integrate.quad) values for the built-in pulse
  data, frozen below as literals.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgmti.problems import get_problem
from kgmti.spectral import SpectralGrid, energy

RNG = np.random.default_rng(20260816)


def dft_direct(f: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """O(N^2) reference transform: f~_l = (1/N) sum_j f_j exp(-i mu_l (x_j - a))."""
    n = grid.n
    xj = grid.x - grid.a
    out = np.empty(n, dtype=complex)
    for k, mu in enumerate(grid.mu):
        out[k] = np.sum(f * np.exp(-1j * mu * xj)) / n
    return out


class TestGridGeometry:
    def test_nodes_and_spacing(self):
        g = SpectralGrid(-16.0, 16.0, 8)
        assert g.h == 4.0
        np.testing.assert_allclose(g.x, [-16, -12, -8, -4, 0, 4, 8, 12])

    def test_frequencies_match_definition(self):
        g = SpectralGrid(-16.0, 16.0, 8)
        ls = np.fft.fftfreq(8, d=1.0 / 8)  # 0,1,2,3,-4,-3,-2,-1
        np.testing.assert_allclose(g.mu, 2 * np.pi * ls / 32.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            SpectralGrid(1.0, -1.0, 8)
        with pytest.raises(ValueError):
            SpectralGrid(-1.0, 1.0, 7)
        with pytest.raises(ValueError):
            SpectralGrid(-1.0, 1.0, 8, dim=3)

    def test_mesh_2d_shapes(self):
        g = SpectralGrid(-20.0, 20.0, 16, dim=2)
        X, Y = g.mesh()
        assert X.shape == (16, 1) and Y.shape == (1, 16)
        assert g.mu_sq.shape == (16, 16)
        assert g.measure == 1600.0


class TestTransforms:
    def test_forward_matches_direct_dft(self):
        g = SpectralGrid(-16.0, 16.0, 32)
        f = RNG.normal(size=32) + 1j * RNG.normal(size=32)
        np.testing.assert_allclose(g.forward(f), dft_direct(f, g), atol=1e-13)

    def test_constant_field(self):
        g = SpectralGrid(-16.0, 16.0, 16)
        coef = g.forward(np.full(16, 3.25))
        assert coef[0] == pytest.approx(3.25)
        np.testing.assert_allclose(coef[1:], 0.0, atol=1e-15)

    def test_single_mode_lands_in_single_bin(self):
        g = SpectralGrid(-16.0, 16.0, 32)
        mu1 = 2 * np.pi / g.length
        f = np.exp(1j * mu1 * (g.x - g.a))
        coef = g.forward(f)
        assert coef[1] == pytest.approx(1.0)
        assert np.max(np.abs(np.delete(coef, 1))) < 1e-14

    def test_round_trip_2d(self):
        g = SpectralGrid(-20.0, 20.0, 16, dim=2)
        f = RNG.normal(size=(16, 16))
        np.testing.assert_allclose(g.inverse(g.forward(f)).real, f, atol=1e-13)

    def test_reflect_spectrum_is_conjugation_identity(self):
        # F(conj f)_l = conj( F(f)_{-l mod N} ), in 1D and 2D
        for g in (SpectralGrid(-16.0, 16.0, 16), SpectralGrid(-1.0, 3.0, 8, dim=2)):
            f = RNG.normal(size=g.shape) + 1j * RNG.normal(size=g.shape)
            lhs = g.forward(np.conj(f))
            rhs = np.conj(g.reflect_spectrum(g.forward(f)))
            np.testing.assert_allclose(lhs, rhs, atol=1e-13)

    def test_shape_mismatch_raises(self):
        g = SpectralGrid(-16.0, 16.0, 16)
        with pytest.raises(ValueError):
            g.forward(np.zeros(17))


class TestDerivatives:
    def test_derivative_of_smooth_function_is_spectral(self):
        g = SpectralGrid(-16.0, 16.0, 128)
        u = np.exp(-g.x**2)
        du = g.derivative(u)
        np.testing.assert_allclose(du, -2 * g.x * u, atol=1e-11)

    def test_laplacian_2d(self):
        g = SpectralGrid(-20.0, 20.0, 128, dim=2)
        X, Y = g.mesh()
        u = np.exp(-(X**2) - Y**2)
        lap = g.laplacian(u)
        exact = (4 * X**2 + 4 * Y**2 - 4) * u
        np.testing.assert_allclose(lap, exact, atol=1e-10)

    def test_odd_derivative_kills_nyquist(self):
        g = SpectralGrid(0.0, 2 * np.pi, 8)
        u = np.cos(4 * g.x)  # pure Nyquist mode
        np.testing.assert_allclose(g.derivative(u), 0.0, atol=1e-13)

    def test_resymmetrize_removes_nyquist_and_imag(self):
        g = SpectralGrid(0.0, 2 * np.pi, 8)
        u = 1.0 + np.cos(4 * g.x) + 0.3 * np.sin(2 * g.x)
        v = g.resymmetrize(u)
        assert np.isrealobj(v)
        np.testing.assert_allclose(v, 1.0 + 0.3 * np.sin(2 * g.x), atol=1e-13)
        coef = g.forward(v)
        assert abs(coef[4]) == 0.0


class TestNorms:
    def test_h1_of_constant(self):
        # ||c||_H1 = |c| * sqrt(b-a) on (-16,16): weight (1+0) on the only mode
        g = SpectralGrid(-16.0, 16.0, 64)
        assert g.h1_norm(np.full(64, 2.0)) == pytest.approx(2.0 * np.sqrt(32.0))

    def test_h1_of_single_mode(self):
        g = SpectralGrid(-16.0, 16.0, 64)
        mu1 = 2 * np.pi / 32.0
        f = np.exp(1j * mu1 * (g.x - g.a))
        assert g.h1_norm(f) == pytest.approx(np.sqrt(32.0 * (1.0 + mu1**2)))

    def test_l2_matches_trapezoid_for_periodic(self):
        g = SpectralGrid(-16.0, 16.0, 256)
        f = np.exp(-g.x**2) * np.sin(3 * g.x)
        # Parseval: spectral L2 equals the rectangle-rule L2 on the nodes
        rect = np.sqrt(g.h * np.sum(f**2))
        assert g.l2_norm(f) == pytest.approx(rect, rel=1e-12)

    def test_h1_frozen_quadrature_value(self):
        # ||phi1||_H1 with phi1 = sech(x^2)/2 on (-16,16); oracle: scipy.integrate.quad
        p = get_problem("sech-gauss")
        g = p.grid(256)
        phi1, _ = p.initial_profiles(g)
        assert g.h1_norm(phi1) == pytest.approx(0.9100895658420298, rel=1e-12)

    def test_l2_frozen_quadrature_value(self):
        p = get_problem("sech-gauss")
        g = p.grid(256)
        phi1, _ = p.initial_profiles(g)
        assert g.l2_norm(phi1) == pytest.approx(0.6902106456042069, rel=1e-12)

    @given(
        c=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda v: v == v),
        n=st.sampled_from([8, 16, 64]),
    )
    @settings(max_examples=25, deadline=None)
    def test_h1_dominates_l2(self, c, n):
        g = SpectralGrid(-16.0, 16.0, n)
        rng = np.random.default_rng(abs(hash((c, n))) % 2**32)
        f = c * rng.normal(size=n)
        assert g.h1_norm(f) >= g.l2_norm(f) - 1e-12 * max(1.0, abs(c))

    @given(s=st.floats(min_value=0.25, max_value=4.0, allow_nan=False))
    @settings(max_examples=25, deadline=None)
    def test_norms_are_homogeneous(self, s):
        g = SpectralGrid(-16.0, 16.0, 32)
        f = np.exp(-g.x**2)
        assert g.h1_norm(s * f) == pytest.approx(s * g.h1_norm(f), rel=1e-12)
        assert g.l2_norm(s * f) == pytest.approx(s * g.l2_norm(f), rel=1e-12)


class TestEnergy:
    def test_constant_state_closed_form(self):
        # u = 1, udot = 0, lam = 0, eps = 1 on (-16,16): E = |Omega| * 1 = 32
        g = SpectralGrid(-16.0, 16.0, 64)
        assert energy(np.ones(64), np.zeros(64), 1.0, 0.0, g) == pytest.approx(32.0)

    def test_constant_state_quartic_term(self):
        # adds (lam/2)|u|^4 = 1/2 per unit length
        g = SpectralGrid(-16.0, 16.0, 64)
        e = energy(np.ones(64), np.zeros(64), 1.0, 1.0, g)
        assert e == pytest.approx(32.0 + 16.0)

    def test_energy_frozen_quadrature_values(self):
        # E(0) for the built-in pulse data; oracle: scipy.integrate.quad, eps in {1, 0.5, 0.1}
        p = get_problem("sech-gauss")
        g = p.grid(512)
        phi1, phi2 = p.initial_profiles(g)
        expected = {1.0: 1.190465156662001, 0.5: 3.559622965564754, 0.1: 79.37267285045283}
        for eps, val in expected.items():
            e = energy(phi1, phi2 / eps**2, eps, p.lam, g)
            assert e == pytest.approx(val, rel=1e-12), f"eps={eps}"

    def test_energy_2d_separable_gaussian(self):
        # u = exp(-x^2-y^2), udot = 0, lam = 0, eps = 1 on (-20,20)^2.
        # With i2 := int e^{-2t^2} dt = sqrt(pi/2):
        #   int |u|^2     = i2^2
        #   int |du/dx|^2 = (int 4x^2 e^{-2x^2} dx) * i2 = i2 * i2   (per axis)
        # so E = i2^2 + 2*i2^2 = 3*pi/2.
        g = SpectralGrid(-20.0, 20.0, 256, dim=2)
        X, Y = g.mesh()
        u = np.exp(-(X**2) - Y**2)
        i2 = np.sqrt(np.pi / 2)
        expected = 3 * i2 * i2
        assert energy(u, np.zeros_like(u), 1.0, 0.0, g) == pytest.approx(expected, rel=1e-12)

    def test_eps_validation(self):
        g = SpectralGrid(-16.0, 16.0, 16)
        with pytest.raises(ValueError):
            energy(np.ones(16), np.zeros(16), 0.0, 1.0, g)


class TestProblems:
    def test_unknown_problem(self):
        with pytest.raises(ValueError):
            get_problem("no-such-problem")

    def test_grid_domain_mismatch_raises(self):
        p = get_problem("sech-gauss")
        with pytest.raises(ValueError):
            p.initial_profiles(SpectralGrid(-8.0, 8.0, 32))

    def test_2d_profiles(self):
        p = get_problem("twin-gauss-2d")
        g = p.grid(40)  # h = 1, so x = 0 and y = 2 are nodes
        phi1, phi2 = p.initial_profiles(g)
        assert phi1.shape == (40, 40) and phi2.shape == (40, 40)
        # the twin bumps sit at y = -2 and y = +2 on the x = 0 line
        ix = np.argmin(np.abs(g.x))
        iy = np.argmin(np.abs(g.x - 2.0))
        assert phi1[ix, iy] == pytest.approx(1.0 + np.exp(-16.0), rel=1e-6)
