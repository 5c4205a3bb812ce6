"""Gazeau-Klauder coherent states on the shifted spectrum e_n = a n^2 + b n.

    |J, gamma> = N(J)^-1 sum_n J^(n/2) exp(-i gamma e_n) / sqrt(rho_n) |n>
    rho_n      = prod_{k<=n} e_k = n! a^n Gamma(n + 1 + b/a) / Gamma(1 + b/a)
    N(J)^2     = sum_n J^n / rho_n = 0F1(1 + b/a; J/a)

Everything is carried as logarithms until the final exponentiation, so
b/a of order 1e8 (alpha -> 0) is as safe as b/a of order 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import IncompatibleMomentsError, TruncationError
from .model import ModelParams, SpectrumTable, shifted_spectrum
from .specfun import hyp0f1, integrate_semi_infinite, log_bessel_k, log_pochhammer

__all__ = [
    "GKMoments",
    "GKState",
    "WeightFunction",
    "moments",
    "moments_from_params",
    "moments_from_coefficients",
    "normalization_sq",
    "log_normalization_sq",
    "radius_of_convergence",
    "build_state",
    "overlap",
    "label_continuity_check",
    "weight_function",
    "analytic_weight",
    "resolution_of_unity_check",
    "evolve",
]

DEFAULT_N_MAX = 2000
# a term J^n / rho_n below this fraction of N^2 ends the expansion
TERM_CUTOFF = 1e-18
MAX_TAIL = 1e-14


@dataclass(frozen=True)
class GKMoments:
    a: float
    b: float
    log_rho: np.ndarray
    e: np.ndarray
    n_max: int

    def __post_init__(self):
        self.log_rho.setflags(write=False)
        self.e.setflags(write=False)

    @property
    def nu(self) -> float:
        """b / a, the order of the Bessel functions in the weight."""
        return self.b / self.a if self.a > 0 else math.inf

    def log_rho_closed_form(self, n) -> np.ndarray:
        """ln rho_n from the gamma-function product; needs a > 0."""
        if not self.a > 0:
            raise ValueError("closed form needs a > 0")
        n = np.asarray(n, dtype=float)
        nu = self.nu
        return n * math.log(self.a) + special.gammaln(n + 1.0) + log_pochhammer(1.0 + nu, n)

    def compatible(self, other: "GKMoments") -> bool:
        return self.a == other.a and self.b == other.b


def moments(spectrum: SpectrumTable, n_max: int | None = None) -> GKMoments:
    """Cumulative log-products of the shifted energies.

    The cumulative sum is the primary route; the gamma closed form is
    checked against it to 1e-11 relative.
    """
    if n_max is None:
        n_max = spectrum.n_max
    if n_max > spectrum.n_max:
        raise ValueError(f"spectrum only reaches n={spectrum.n_max}, asked for {n_max}")
    e = np.asarray(spectrum.e[: n_max + 1], dtype=float)
    if e[0] != 0.0 or np.any(np.diff(e) <= 0):
        raise ValueError("shifted spectrum must start at 0 and increase strictly")
    log_rho = np.zeros(n_max + 1)
    log_rho[1:] = np.cumsum(np.log(e[1:]))
    result = GKMoments(a=spectrum.a, b=spectrum.b, log_rho=log_rho, e=e.copy(), n_max=n_max)
    if spectrum.a > 0 and n_max > 0:
        closed = result.log_rho_closed_form(np.arange(n_max + 1))
        scale = np.maximum(np.abs(log_rho), 1.0)
        worst = float(np.max(np.abs(closed - log_rho) / scale))
        if worst > 1e-11:
            raise ArithmeticError(f"rho_n product and closed form disagree by {worst:.2e}")
    return result


def moments_from_params(params: ModelParams, n_max: int = DEFAULT_N_MAX) -> GKMoments:
    return moments(shifted_spectrum(params, n_max), n_max)


def moments_from_coefficients(a: float, b: float, n_max: int = DEFAULT_N_MAX) -> GKMoments:
    """Moments for an arbitrary quadratic spectrum; a = 0 gives the undeformed oscillator."""
    if a < 0 or not b > 0:
        raise ValueError("need a >= 0 and b > 0")
    n = np.arange(n_max + 1, dtype=float)
    table = SpectrumTable(n_max=n_max, E=np.full(n_max + 1, np.nan), e=a * n * n + b * n, a=a, b=b)
    return moments(table, n_max)


def _log_terms(m: GKMoments, J: float) -> np.ndarray:
    n = np.arange(m.n_max + 1, dtype=float)
    if J == 0:
        out = np.full(m.n_max + 1, -np.inf)
        out[0] = 0.0
        return out
    return n * math.log(J) - m.log_rho


def _truncation(m: GKMoments, J: float):
    """Returns (log N^2, cut index, tail mass relative to N^2)."""
    if J < 0:
        raise ValueError(f"J must be non-negative, got {J!r}")
    logs = _log_terms(m, J)
    peak = float(np.max(logs))
    log_norm_sq = peak + math.log(math.fsum(np.exp(logs - peak)))
    rel = logs - log_norm_sq
    below = np.nonzero(rel < math.log(TERM_CUTOFF))[0]
    below = below[below > int(np.argmax(logs))]
    if below.size == 0:
        raise TruncationError(
            f"J={J}: coefficients have not decayed by n_max={m.n_max}; build moments with a larger n_max"
        )
    cut = int(below[0])
    # remaining terms fall at least geometrically with ratio J / e_{cut+1}
    ratio = J / m.e[cut + 1] if cut + 1 <= m.n_max else 0.0
    if ratio >= 1.0:
        raise TruncationError(f"J={J}: term ratio still {ratio:.3g} at the cut")
    tail = math.exp(rel[cut]) * ratio / (1.0 - ratio) if J > 0 else 0.0
    return log_norm_sq, cut, tail


def log_normalization_sq(m: GKMoments, J: float) -> float:
    return _truncation(m, J)[0]


def normalization_sq(m: GKMoments, J: float) -> float:
    """N^2(J) as the series sum of J^n / rho_n (always >= 1)."""
    log_value = _truncation(m, J)[0]
    if log_value > 709.0:
        raise OverflowError(f"N^2({J}) exceeds double precision; use log_normalization_sq")
    return math.exp(log_value)


def radius_of_convergence(m: GKMoments) -> float:
    """Radius of convergence of sum J^n / rho_n.

    Returns ``inf`` when rho_n^(1/n) is still growing over the last decade
    of available n, otherwise the last estimate of rho_n^(1/n).
    """
    if m.n_max < 10:
        raise ValueError("need at least 10 moments")
    n = np.arange(m.n_max // 10, m.n_max + 1)
    root = m.log_rho[n] / n
    if np.all(np.diff(root) > 0):
        return math.inf
    return float(math.exp(root[-1]))


@dataclass(frozen=True)
class GKState:
    """Truncated coherent state.

    ``amplitudes`` holds |c_n|; the phase is carried by ``gamma`` so that
    time evolution leaves the magnitudes untouched bit for bit.
    """

    J: float
    gamma: float
    amplitudes: np.ndarray
    energies: np.ndarray
    norm_sq: float
    truncation_tail: float
    moments: GKMoments = field(repr=False)

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    @property
    def coeffs(self) -> np.ndarray:
        return self.amplitudes * np.exp(-1j * self.gamma * self.energies)

    @property
    def probabilities(self) -> np.ndarray:
        return self.amplitudes**2


def build_state(m: GKMoments, J: float, gamma: float = 0.0) -> GKState:
    log_norm_sq, cut, tail = _truncation(m, J)
    if tail > MAX_TAIL:
        raise TruncationError(f"tail mass {tail:.2e} exceeds {MAX_TAIL:.0e}")
    logs = _log_terms(m, J)[: cut + 1]
    amplitudes = np.exp(0.5 * (logs - log_norm_sq))
    amplitudes.setflags(write=False)
    energies = m.e[: cut + 1].copy()
    energies.setflags(write=False)
    norm_sq = math.exp(log_norm_sq) if log_norm_sq < 709.0 else math.inf
    return GKState(J=float(J), gamma=float(gamma), amplitudes=amplitudes, energies=energies,
                   norm_sq=norm_sq, truncation_tail=tail, moments=m)


def overlap(s1: GKState, s2: GKState) -> complex:
    """<s1|s2> = sum conj(c1_n) c2_n."""
    if not s1.moments.compatible(s2.moments):
        raise IncompatibleMomentsError("states come from different spectra")
    k = min(s1.n_max, s2.n_max) + 1
    return complex(np.vdot(s1.coeffs[:k], s2.coeffs[:k]))


def label_continuity_check(m: GKMoments, J: float, gamma: float, delta: float) -> float:
    """Largest squared distance 2(1 - Re<J',g'|J,g>) over the moves J+-delta, gamma+-delta."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return 0.0
    ref = build_state(m, J, gamma)
    moves = [(J + delta, gamma), (J - delta, gamma), (J, gamma + delta), (J, gamma - delta)]
    worst = 0.0
    for Jp, gp in moves:
        if Jp < 0:
            continue
        # 1 - Re<.|.> cancels badly; the squared norm of the difference does not
        other = build_state(m, Jp, gp)
        k = max(ref.n_max, other.n_max) + 1
        diff = np.zeros(k, dtype=complex)
        diff[: ref.n_max + 1] -= ref.coeffs
        diff[: other.n_max + 1] += other.coeffs
        worst = max(worst, float(np.vdot(diff, diff).real))
    return worst


LARGE_ORDER = 1000.0


def _log_reduced_large_order(a: float, nu: float, J) -> np.ndarray:
    """ln[2 z^(nu/2) K_nu(2 sqrt z) / (a Gamma(1 + nu))] for nu > LARGE_ORDER.

    The Debye expansion of K_nu and the Stirling series of Gamma(1 + nu)
    are merged by hand; separately each log is O(nu ln nu) and their sum
    would keep only a few digits.  Tends to -J/b - ln b as J/b -> 0.
    """
    J = np.atleast_1d(np.asarray(J, dtype=float))
    t2 = 4.0 * J / (a * nu * nu)
    r = np.sqrt(1.0 + t2)
    t = 1.0 / r
    u1 = (3.0 * t - 5.0 * t**3) / 24.0
    u2 = (81.0 * t**2 - 462.0 * t**4 + 385.0 * t**6) / 1152.0
    u3 = (30375.0 * t**3 - 369603.0 * t**5 + 765765.0 * t**7 - 425425.0 * t**9) / 414720.0
    series = 1.0 - u1 / nu + u2 / nu**2 - u3 / nu**3
    exponent = nu * (-t2 / (1.0 + r) + np.log1p(t2 / (2.0 * (1.0 + r))))
    return (-math.log(a * nu) - 0.5 * np.log(r) + np.log(series) + exponent
            - 1.0 / (12.0 * nu) + 1.0 / (360.0 * nu**3))


@dataclass(frozen=True)
class WeightFunction:
    """Resolution-of-unity density W(J) and its reduced form W(J) / N^2(J).

    The reduced weight is c * 2 (J/a)^(nu/2) K_nu(2 sqrt(J/a)), the Meijer
    G^{2,0}_{0,2}(J/a | 0, nu) written through K_nu.  The constant c is held
    as ``log_calibration``; :func:`weight_function` fixes it numerically from
    the zeroth moment, and analytically it is 1 / (a Gamma(1 + nu)).
    """

    a: float
    b: float
    log_calibration: float
    moments: GKMoments = field(repr=False)

    @property
    def nu(self) -> float:
        return self.b / self.a

    @property
    def calibration(self) -> float:
        return math.exp(self.log_calibration)

    @property
    def analytic_log_calibration(self) -> float:
        return -math.log(self.a) - math.lgamma(1.0 + self.nu)

    def calibration_ratio(self) -> float:
        """Numerically fixed constant over its analytic value; 1 when the G-function form is right."""
        return math.exp(self.log_calibration - self.analytic_log_calibration)

    def log_meijer_g(self, J) -> np.ndarray:
        """ln G^{2,0}_{0,2}(J/a | 0, nu) = ln[2 z^(nu/2) K_nu(2 sqrt z)], z = J/a."""
        z = np.atleast_1d(np.asarray(J, dtype=float)) / self.a
        out = np.full(z.shape, special.gammaln(self.nu))  # z -> 0 limit: Gamma(nu)
        pos = z > 0
        zp = z[pos]
        out[pos] = math.log(2.0) + 0.5 * self.nu * np.log(zp) + log_bessel_k(self.nu, 2.0 * np.sqrt(zp))
        return out

    def log_reduced(self, J) -> np.ndarray:
        offset = self.log_calibration - self.analytic_log_calibration
        if self.nu > LARGE_ORDER:
            return offset + _log_reduced_large_order(self.a, self.nu, J)
        return offset + self.analytic_log_calibration + self.log_meijer_g(J)

    def reduced(self, J):
        """W(J) / N^2(J)."""
        with np.errstate(under="ignore"):
            out = np.exp(self.log_reduced(J))
        return out if np.ndim(J) else float(out[0])

    def __call__(self, J):
        """W(J) = N^2(J) * reduced(J), with N^2 = 0F1(1 + nu; J/a).  Underflows to 0 at large J."""
        J_arr = np.atleast_1d(np.asarray(J, dtype=float))
        logs = np.array([hyp0f1(1.0 + self.nu, j / self.a).log_value for j in J_arr])
        with np.errstate(under="ignore"):
            out = np.exp(logs + self.log_reduced(J_arr))
        return out if np.ndim(J) else float(out[0])

    def moment(self, n: int, rtol: float = 1e-10) -> float:
        """Integral of reduced(J) J^n over [0, inf)."""
        # z = J/a is distributed as a product of Gamma(n+1) and Gamma(n+1+nu) variates
        scale = self.a * (n + 1.0) * (n + 1.0 + self.nu)
        return integrate_semi_infinite(lambda J: self.reduced(J) * J**n, decay_hint=scale, rtol=rtol)


def weight_function(m: GKMoments) -> WeightFunction:
    trial = analytic_weight(m)
    zeroth = trial.moment(0)
    return WeightFunction(a=m.a, b=m.b, log_calibration=trial.log_calibration - math.log(zeroth), moments=m)


def analytic_weight(m: GKMoments) -> WeightFunction:
    """Weight with the closed-form constant 1 / (a Gamma(1 + nu)); no quadrature."""
    if not m.a > 0:
        raise ValueError("weight function needs a > 0")
    return WeightFunction(a=m.a, b=m.b, log_calibration=-math.log(m.a) - math.lgamma(1.0 + m.nu), moments=m)


def resolution_of_unity_check(m: GKMoments, n_check: int, weight: WeightFunction | None = None):
    """Relative errors of the reduced-weight moments against rho_n, n = 0..n_check.

    The weight used here carries the analytic calibration 1 / (a Gamma(1 + nu)),
    so the zeroth moment is a genuine test rather than a tautology.
    """
    if not 0 <= n_check <= 20:
        raise ValueError("n_check must lie in [0, 20]")
    if n_check > m.n_max:
        raise ValueError("not enough moments")
    analytic = analytic_weight(m) if weight is None else analytic_weight(weight.moments)
    errors = np.empty(n_check + 1)
    for n in range(n_check + 1):
        log_ratio = math.log(analytic.moment(n)) - m.log_rho[n]
        errors[n] = abs(math.expm1(log_ratio))
    return errors


def evolve(state: GKState, nu: float = 1.0, t: float = 0.0) -> GKState:
    """Time evolution: gamma -> gamma + nu t, magnitudes unchanged."""
    return GKState(J=state.J, gamma=state.gamma + nu * t, amplitudes=state.amplitudes,
                   energies=state.energies, norm_sq=state.norm_sq,
                   truncation_tail=state.truncation_tail, moments=state.moments)
