import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from pdm_gk.model import (
    GridResolutionWarning,
    ModelParams,
    derive_params,
    eigenfunction,
    energy,
    envelope_extent,
    mass_profile,
    ode_residual,
    overlap_matrix,
    shifted_spectrum,
)

ALPHAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def quantized_energy(p: ModelParams, n: int) -> float:
    # eps - lam = n (n + 2 lam), eps = 2 m0 E / (alpha hbar^2)
    kappa = p.m0 * p.omega / (p.alpha * p.hbar)
    lam = 0.5 + 0.5 * math.sqrt(1.0 + 4.0 * kappa**2)
    return (lam + n * (n + 2.0 * lam)) * p.alpha * p.hbar**2 / (2.0 * p.m0)


class TestParams:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5, math.nan])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            ModelParams(alpha=alpha)

    @pytest.mark.parametrize("field", ["m0", "omega", "hbar"])
    def test_positive_constants(self, field):
        with pytest.raises(ValueError):
            ModelParams(**{field: 0.0})

    def test_spectrum_convention(self):
        with pytest.raises(ValueError):
            ModelParams(spectrum="other")

    def test_derived(self):
        d = derive_params(ModelParams(alpha=0.2))
        assert_allclose(d.kappa, 5.0)
        assert_allclose(d.lam, 0.5 + 0.5 * math.sqrt(101.0))
        assert_allclose(d.a, 0.1)
        assert_allclose(d.b, math.sqrt(1.01) + 0.2)
        assert d.lam * (d.lam - 1.0) == pytest.approx(d.kappa**2, rel=1e-14)

    def test_derived_exact_convention(self):
        d = derive_params(ModelParams(alpha=0.2, spectrum="exact"))
        assert_allclose(d.b, math.sqrt(1.01) + 0.1)


class TestMass:
    def test_origin(self):
        assert mass_profile(ModelParams(m0=2.5, alpha=0.3), 0.0) == 2.5

    def test_decreasing_in_alpha_and_x(self):
        x = np.linspace(0.01, 0.5, 50)
        curves = np.array([mass_profile(ModelParams(alpha=a), x) for a in ALPHAS])
        assert np.all(np.diff(curves, axis=0) < 0)
        assert np.all(np.diff(curves, axis=1) < 0)

    def test_even(self):
        p = ModelParams(alpha=0.4)
        assert_allclose(mass_profile(p, -0.3), mass_profile(p, 0.3))


class TestSpectrum:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_shifted_form(self, alpha):
        t = shifted_spectrum(ModelParams(alpha=alpha), 100)
        diff = t.E[1:] - t.E[0]
        assert_allclose(t.e[1:], diff, rtol=1e-12)
        assert t.e[0] == 0.0

    def test_default_closed_form(self):
        p = ModelParams(m0=1.3, omega=0.7, hbar=1.1, alpha=0.35)
        n = 4
        expected = (p.hbar * p.omega * (n + 0.5) * math.sqrt(1 + p.alpha**2 * p.hbar**2 / (4 * p.m0**2 * p.omega**2))
                     + p.alpha * p.hbar**2 / (2 * p.m0) * (n**2 + 2 * n + 0.5))
        assert_allclose(energy(p, n), expected, rtol=1e-15)

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("n", [0, 1, 7, 30])
    def test_exact_convention_matches_quantization(self, alpha, n):
        p = ModelParams(m0=0.8, omega=1.7, hbar=1.2, alpha=alpha, spectrum="exact")
        assert_allclose(energy(p, n), quantized_energy(p, n), rtol=1e-12)

    def test_conventions_differ_by_linear_term(self):
        p = ModelParams(alpha=0.3)
        q = ModelParams(alpha=0.3, spectrum="exact")
        for n in range(10):
            assert_allclose(energy(p, n) - energy(q, n), 0.3 * n / 2.0, rtol=1e-12, atol=1e-15)

    def test_zero_deformation_limit(self):
        t = shifted_spectrum(ModelParams(alpha=1e-10), 13)
        assert np.max(np.abs(t.E - (np.arange(14) + 0.5))) < 1e-8

    def test_increasing_in_n_and_alpha(self):
        E = np.array([shifted_spectrum(ModelParams(alpha=a), 20).E for a in ALPHAS])
        assert np.all(np.diff(E, axis=1) > 0)
        assert np.all(np.diff(E, axis=0) > 0)

    def test_read_only(self):
        t = shifted_spectrum(ModelParams(), 3)
        with pytest.raises(ValueError):
            t.E[0] = 1.0

    def test_negative_levels(self):
        with pytest.raises(ValueError):
            energy(ModelParams(), -1)
        with pytest.raises(ValueError):
            shifted_spectrum(ModelParams(), -1)


class TestEigenfunctions:
    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("n", [0, 1, 4, 9])
    def test_recurrence_matches_gegenbauer_form(self, alpha, n):
        p = ModelParams(alpha=alpha)
        f = eigenfunction(p, n)
        x = np.linspace(-6, 6, 41)
        assert_allclose(f(x), f.via_gegenbauer(x), rtol=1e-11, atol=1e-14)

    @pytest.mark.parametrize("n,m", [(0, 0), (3, 3), (2, 5), (1, 4), (6, 6)])
    def test_x_normalization_against_quadrature(self, n, m):
        p = ModelParams(alpha=0.5)
        fn, fm = eigenfunction(p, n), eigenfunction(p, m)
        val, _ = integrate.quad(lambda x: fn(x, "x") * fm(x, "x"), -np.inf, np.inf, epsabs=1e-13, limit=400)
        assert_allclose(val, float(n == m), atol=1e-9)

    def test_gegenbauer_weight_normalization_mpmath(self):
        lam = derive_params(ModelParams(alpha=0.7)).lam
        f = eigenfunction(ModelParams(alpha=0.7), 3)
        norm = f.norm_const
        integrand = lambda s: (1 - s**2) ** (lam - 0.5) * (norm * mp.gegenbauer(3, lam, s)) ** 2
        assert_allclose(float(mp.quad(integrand, [-1, 0, 1])), 1.0, rtol=1e-12)

    @pytest.mark.parametrize("alpha", [1e-10, 1e-4, 0.1, 0.5, 0.999])
    def test_orthonormal(self, alpha):
        M = overlap_matrix(ModelParams(alpha=alpha), 12)
        assert np.max(np.abs(M - np.eye(13))) < 1e-8

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(0, 15), alpha=st.floats(1e-3, 0.99), x=st.floats(0.0, 20.0))
    def test_parity(self, n, alpha, x):
        f = eigenfunction(ModelParams(alpha=alpha), n)
        assert f.psi(-x) == pytest.approx((-1) ** n * f.psi(x), rel=1e-12, abs=1e-300)

    def test_small_alpha_ground_state_is_gaussian(self):
        # psi_0 tends to the oscillator ground state, up to the alpha^(1/4) scale
        p = ModelParams(alpha=1e-8)
        f = eigenfunction(p, 0)
        x = np.linspace(-4, 4, 17)
        gauss = np.pi ** -0.25 * np.exp(-0.5 * x**2)
        assert_allclose(f(x, "x"), gauss, rtol=1e-6, atol=1e-12)

    def test_energy_property(self):
        p = ModelParams(m0=0.9, omega=1.4, hbar=0.8, alpha=0.25)
        assert_allclose(eigenfunction(p, 5).energy, quantized_energy(p, 5), rtol=1e-14)

    def test_normalization_mode(self):
        with pytest.raises(ValueError):
            eigenfunction(ModelParams(), 1)(0.3, normalization="q")

    def test_negative_level(self):
        with pytest.raises(ValueError):
            eigenfunction(ModelParams(), -2)

    def test_envelope_extent(self):
        p = ModelParams(alpha=0.3)
        x = envelope_extent(p, 1e-10)
        lam = derive_params(p).lam
        assert_allclose((1 + p.alpha * x * x) ** (-(lam + 1) / 2), 1e-10, rtol=1e-9)


class TestOdeResidual:
    @pytest.mark.parametrize("alpha", [0.1, 0.5])
    @pytest.mark.parametrize("n", range(11))
    def test_quantized_energy_solves_equation(self, alpha, n):
        with warnings.catch_warnings():
            warnings.simplefilter("error", GridResolutionWarning)
            assert ode_residual(ModelParams(alpha=alpha), n) < 1e-4

    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_default_energy_does_not(self, n):
        p = ModelParams(alpha=0.1)
        res = ode_residual(p, n, E=energy(p, n))
        # the default-convention level sits alpha hbar^2 n / (2 m0) above the eigenvalue
        assert_allclose(res, 0.1 * n / 2.0, rtol=0.02)

    def test_physical_units(self):
        p = ModelParams(m0=1.5, omega=0.8, hbar=1.2, alpha=0.2)
        grid = np.linspace(-8, 8, 4001)
        assert ode_residual(p, 4, grid=grid) < 1e-5

    def test_under_resolved_grid_warns(self):
        with pytest.warns(GridResolutionWarning):
            ode_residual(ModelParams(alpha=0.5), 10, grid=np.linspace(-8, 8, 61))

    @pytest.mark.parametrize("grid", [np.linspace(0, 1, 10), np.array([0.0, 1.0, 3.0] + list(range(4, 30))),
                                      np.linspace(1, 0, 50), np.zeros((5, 5))])
    def test_rejects_bad_grids(self, grid):
        with pytest.raises(ValueError):
            ode_residual(ModelParams(), 1, grid=grid)
