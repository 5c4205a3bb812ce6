"""Harmonic oscillator with mass profile m(x) = m0 / (1 + alpha x^2)^2.

The kinetic ordering is the symmetric one with exponents (-1/4, -1/2, -1/4).
After phi = (m/m0)^(1/4) psi the Hamiltonian reads

    H psi = -(hbar^2 / 2 m0) [(1 + alpha x^2) d/dx]^2 psi + m0 omega^2 x^2 psi / 2

and q = arctan(sqrt(alpha) x) turns it into a trigonometric Poschl-Teller
problem whose bound states are c^lam C_n^lam(s), c = cos q, s = sin q.

Two spectrum conventions are available.  ``"paper"`` (the default) uses
the closed form with the (n^2 + 2n + 1/2) deformation term; ``"exact"`` uses
the eigenvalue implied by the quantization condition eps - lam = n(n + 2 lam),
whose deformation term is (n^2 + n + 1/2).  The eigenfunctions satisfy the
differential equation only with the latter; see :func:`ode_residual`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .specfun import gauss_legendre, gegenbauer_c, log_pochhammer

__all__ = [
    "ModelParams",
    "DerivedParams",
    "SpectrumTable",
    "Eigenfunction",
    "GridResolutionWarning",
    "mass_profile",
    "derive_params",
    "energy",
    "shifted_spectrum",
    "eigenfunction",
    "envelope_extent",
    "overlap_matrix",
    "ode_residual",
]

SpectrumConvention = Literal["paper", "exact"]


class GridResolutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    m0: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    alpha: float = 0.2
    spectrum: SpectrumConvention = "paper"

    def __post_init__(self):
        for name in ("m0", "omega", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.spectrum not in ("paper", "exact"):
            raise ValueError(f"unknown spectrum convention {self.spectrum!r}")

    @property
    def deformation(self) -> float:
        """alpha * hbar / (m0 * omega): the deformation in units of the oscillator length."""
        return self.alpha * self.hbar / (self.m0 * self.omega)


@dataclass(frozen=True)
class DerivedParams:
    kappa: float
    lam: float
    a: float
    b: float


@dataclass(frozen=True)
class SpectrumTable:
    """Energies E (units of hbar*omega) and shifted energies e_n = a n^2 + b n."""

    n_max: int
    E: np.ndarray
    e: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        self.E.setflags(write=False)
        self.e.setflags(write=False)


def mass_profile(params: ModelParams, x):
    x = np.asarray(x, dtype=float)
    out = params.m0 / (1.0 + params.alpha * x * x) ** 2
    return out if out.ndim else float(out)


def _root_factor(params: ModelParams) -> float:
    d = params.deformation
    return math.sqrt(1.0 + 0.25 * d * d)


def derive_params(params: ModelParams) -> DerivedParams:
    kappa = params.m0 * params.omega / (params.alpha * params.hbar)
    lam = 0.5 + 0.5 * math.sqrt(1.0 + 4.0 * kappa * kappa)
    d = params.deformation
    a = 0.5 * d
    b = _root_factor(params) + (d if params.spectrum == "paper" else 0.5 * d)
    return DerivedParams(kappa=kappa, lam=lam, a=a, b=b)


def energy(params: ModelParams, n: int) -> float:
    """Energy of level n in the units of m0, omega, hbar."""
    if n < 0:
        raise ValueError("n must be non-negative")
    hw = params.hbar * params.omega
    linear = 2 * n if params.spectrum == "paper" else n
    return (hw * (n + 0.5) * _root_factor(params)
            + params.alpha * params.hbar**2 / (2.0 * params.m0) * (n * n + linear + 0.5))


def shifted_spectrum(params: ModelParams, n_max: int) -> SpectrumTable:
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    dp = derive_params(params)
    hw = params.hbar * params.omega
    n = np.arange(n_max + 1, dtype=float)
    E = np.array([energy(params, k) for k in range(n_max + 1)]) / hw
    e = dp.a * n * n + dp.b * n
    return SpectrumTable(n_max=n_max, E=E, e=e, a=dp.a, b=dp.b)


def _log_norm_const(n: int, lam: float) -> float:
    return 0.5 * (
        math.lgamma(n + 1) + math.log(n + lam) + 2.0 * math.lgamma(lam)
        - math.log(math.pi) - (1.0 - 2.0 * lam) * math.log(2.0) - math.lgamma(n + 2.0 * lam)
    )


@dataclass(frozen=True)
class Eigenfunction:
    """Bound state n of the deformed oscillator.

    Calling the object evaluates phi_n(x) = N c^(lam+1) C_n^lam(s).  With
    ``normalization="s"`` the states are orthonormal under the Gegenbauer
    weight (1 - s^2)^(lam - 1/2) ds; ``normalization="x"`` multiplies by
    alpha^(1/4) so that the integral of |phi_n|^2 over the real line is 1.
    """

    n: int
    lam: float
    params: ModelParams
    log_norm: float

    @property
    def norm_const(self) -> float:
        return math.exp(self.log_norm) if self.log_norm < 709.0 else math.inf

    @property
    def energy(self) -> float:
        """Eigenvalue fixed by eps - lam = n(n + 2 lam), in physical units."""
        p = self.params
        eps = self.lam + self.n * (self.n + 2.0 * self.lam)
        return eps * p.alpha * p.hbar**2 / (2.0 * p.m0)

    def _c_s(self, x):
        x = np.asarray(x, dtype=float)
        alpha = self.params.alpha
        c = 1.0 / np.sqrt(1.0 + alpha * x * x)
        return c, x * math.sqrt(alpha) * c

    def _log_c(self, x):
        # log1p keeps lam * log(c) accurate when c is within 1e-8 of 1
        x = np.asarray(x, dtype=float)
        return -0.5 * np.log1p(self.params.alpha * x * x)

    def _orthonormal(self, s, log_prefactor):
        # p_k = N_k C_k^lam obey s p_k = beta_{k+1} p_{k+1} + beta_k p_{k-1};
        # the recurrence runs on p_k / p_0 so huge lam stays finite.
        lam = self.lam
        log_p0 = -0.5 * (0.5 * math.log(math.pi) - float(log_pochhammer(lam + 0.5, 0.5)))
        prev = np.zeros_like(s)
        cur = np.ones_like(s)
        beta_k = 0.0
        for k in range(self.n):
            beta_next = 0.5 * math.sqrt((k + 1) * (k + 2.0 * lam) / ((k + 1 + lam) * (k + lam)))
            prev, cur = cur, (s * cur - beta_k * prev) / beta_next
            beta_k = beta_next
        with np.errstate(under="ignore"):
            return np.exp(log_prefactor + log_p0) * cur

    def psi(self, x):
        """Transformed wavefunction psi_n = N c^lam C_n^lam(s)."""
        _, s = self._c_s(x)
        out = self._orthonormal(s, self.lam * self._log_c(x))
        return out if out.ndim else float(out)

    def __call__(self, x, normalization: Literal["s", "x"] = "s"):
        _, s = self._c_s(x)
        out = self._orthonormal(s, (self.lam + 1.0) * self._log_c(x))
        if normalization == "x":
            out = out * self.params.alpha ** 0.25
        elif normalization != "s":
            raise ValueError(f"unknown normalization {normalization!r}")
        return out if out.ndim else float(out)

    def via_gegenbauer(self, x):
        """Direct N * c^(lam+1) * C_n^lam(s); overflows for large lam."""
        c, s = self._c_s(x)
        return self.norm_const * c ** (self.lam + 1.0) * gegenbauer_c(self.n, self.lam, s)


def eigenfunction(params: ModelParams, n: int) -> Eigenfunction:
    if n < 0:
        raise ValueError("n must be non-negative")
    lam = derive_params(params).lam
    return Eigenfunction(n=n, lam=lam, params=params, log_norm=_log_norm_const(n, lam))


def envelope_extent(params: ModelParams, rel: float = 1e-12) -> float:
    """|x| beyond which the envelope c^(lam+1) falls below ``rel`` of its peak."""
    lam = derive_params(params).lam
    return math.sqrt(math.expm1(-2.0 * math.log(rel) / (lam + 1.0)) / params.alpha)


def overlap_matrix(params: ModelParams, n_max: int, npts: int = 400) -> np.ndarray:
    """<psi_n|psi_m> for n, m <= n_max under the Gegenbauer weight.

    With s = sin q the weight (1 - s^2)^(lam - 1/2) ds becomes dq and
    psi_n = c^lam p_n(s), so the inner product is a plain integral over q.
    The q-range is clipped where cos(q)^(2 lam) drops below 1e-40.
    """
    lam = derive_params(params).lam
    q_max = min(0.5 * math.pi, math.acos(math.exp(math.log(1e-40) / (2.0 * lam))))
    rule = gauss_legendre(npts, -q_max, q_max)
    x = np.tan(rule.nodes) / math.sqrt(params.alpha)
    rows = np.array([eigenfunction(params, n).psi(x) for n in range(n_max + 1)])
    return (rows * rule.weights) @ rows.T


def _weighted_derivative(f, x, h, alpha):
    # (1 + alpha x^2) f'(x) with the 5-point central stencil; valid on f[2:-2]
    d = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    return (1.0 + alpha * x[2:-2] ** 2) * d


def _apply_h(params: ModelParams, psi, x):
    # H psi on x[4:-4]
    h = x[1] - x[0]
    inner = _weighted_derivative(psi, x, h, params.alpha)
    outer = _weighted_derivative(inner, x[2:-2], h, params.alpha)
    xi = x[4:-4]
    return -params.hbar**2 / (2.0 * params.m0) * outer + 0.5 * params.m0 * params.omega**2 * xi * xi * psi[4:-4]


def _on_common_points(values, step, lo, hi):
    # values live on fine indices step * (4, 5, ...); pick fine indices lo, lo + 4, ..., hi
    return values[(np.arange(lo, hi + 1, 4) // step) - 4]


def ode_residual(params: ModelParams, n: int, grid=None, E: float | None = None) -> float:
    """max |H psi_n - E psi_n| / max |psi_n| over the interior of a uniform grid.

    ``E`` defaults to the eigenvalue of :class:`Eigenfunction`.  H psi is also
    formed on every 2nd and every 4th grid point.  For a resolved 4th-order
    stencil successive differences shrink by ~16; when they shrink by less
    than 4 while still above rounding level, the grid is too coarse for the
    reported number to be trusted and a :class:`GridResolutionWarning` is
    issued.  The test does not involve E, so a wrong E is not mistaken for
    poor resolution.
    """
    x = np.linspace(-8.0, 8.0, 8001) if grid is None else np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 20:
        raise ValueError("grid must be one-dimensional with at least 20 points")
    steps = np.diff(x)
    if np.any(steps <= 0):
        raise ValueError("grid must be strictly increasing")
    if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
        raise ValueError("grid must be uniformly spaced")

    state = eigenfunction(params, n)
    if E is None:
        E = state.energy
    psi = state.psi(x)
    scale = float(np.max(np.abs(psi)))
    h_psi = _apply_h(params, psi, x)
    fine = float(np.max(np.abs(h_psi - E * psi[4:-4]))) / scale

    n_quarter = (x.size - 1) // 4 + 1
    if n_quarter >= 12:
        lo, hi = 16, 4 * (n_quarter - 5)
        by_step = {1: h_psi}
        for step in (2, 4):
            xs = x[::step]
            by_step[step] = _apply_h(params, state.psi(xs), xs)
        h1, h2, h4 = (_on_common_points(by_step[k], k, lo, hi) for k in (1, 2, 4))
        d_fine = float(np.max(np.abs(h1 - h2))) / scale
        d_coarse = float(np.max(np.abs(h2 - h4))) / scale
        # rounding in the twice-applied stencil grows like eps / h^2
        h = x[1] - x[0]
        weighted = np.max((1.0 + params.alpha * x * x) ** 2 * np.abs(psi)) / scale
        noise = 100.0 * np.finfo(float).eps * params.hbar**2 / (2.0 * params.m0) * weighted / h**2
        if d_fine > noise and d_coarse < 4.0 * d_fine:
            warnings.warn(
                f"ODE residual not resolved for n={n}: stencil differences shrink by "
                f"{d_coarse / d_fine:.3g} per halving instead of ~16",
                GridResolutionWarning,
                stacklevel=2,
            )
    return fine
