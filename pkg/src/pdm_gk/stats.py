"""Photon statistics and Wigner quasi-distributions of GK states.

Closed forms are ratios of 0F1(k + nu; J/a), nu = b/a, with the series
normalization N^2 = 0F1(1 + nu; J/a); each has a series counterpart
built from the photon distribution P_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

from .errors import TruncationError
from .gk import GKMoments, GKState, build_state
from .specfun import hyp0f1, log_pochhammer

__all__ = [
    "StatisticsReport",
    "WignerGrid",
    "photon_distribution",
    "mean_n",
    "mean_n2",
    "g2",
    "mandel_q",
    "series_moments",
    "statistics_report",
    "q_scale",
    "peak_J",
    "wigner_paper",
    "wigner_fock",
    "wigner_grid",
]

FOCK_CAP = 200


def _log_f(m: GKMoments, k: int, J: float) -> float:
    return hyp0f1(k + m.nu, J / m.a).log_value


def photon_distribution(m: GKMoments, J: float, n_max: int | None = None) -> np.ndarray:
    """P_n = J^n / (N^2(J) rho_n) for n = 0..n_max (default: the state's own cut)."""
    probs = build_state(m, J).probabilities
    if n_max is None:
        return probs.copy()
    out = np.zeros(n_max + 1)
    k = min(n_max, probs.size - 1) + 1
    out[:k] = probs[:k]
    return out


def mean_n(m: GKMoments, J: float) -> float:
    if J == 0:
        return 0.0
    return J / (m.a + m.b) * math.exp(_log_f(m, 2, J) - _log_f(m, 1, J))


def _factorial_moment2(m: GKMoments, J: float) -> float:
    # <N(N-1)>
    if J == 0:
        return 0.0
    return J * J / ((m.a + m.b) * (2 * m.a + m.b)) * math.exp(_log_f(m, 3, J) - _log_f(m, 1, J))


def mean_n2(m: GKMoments, J: float) -> float:
    return _factorial_moment2(m, J) + mean_n(m, J)


def g2(m: GKMoments, J: float) -> float:
    """Second-order correlation g2(0) = (a+b)/(2a+b) F1 F3 / F2^2; J = 0 gives (a + b)/(2a + b).

    F1/F2 and F3/F2 are formed as averages over the normalized terms p_i of F2
    (the term ratios are (1+nu+i)/(1+nu) and (2+nu)/(2+nu+i)), which avoids
    the rounding of exponentiated log-ratios.
    """
    if J < 0:
        raise ValueError("J must be non-negative")
    nu = m.nu
    if J == 0:
        idx, p = np.zeros(1), np.ones(1)
    else:
        idx, p = _normalized_terms(2.0 + nu, J / m.a)
    f1_over_f2 = float(p @ ((1.0 + nu + idx) / (1.0 + nu)))
    f3_over_f2 = float(p @ ((2.0 + nu) / (2.0 + nu + idx)))
    return (m.a + m.b) / (2 * m.a + m.b) * f1_over_f2 * f3_over_f2


def _normalized_terms(c: float, z: float) -> tuple[np.ndarray, np.ndarray]:
    # terms of 0F1(; c; z) divided by their sum, cut below e^-46 of the peak
    i = np.arange(64)
    while True:
        log_t = i * math.log(z) - special.gammaln(i + 1.0) - log_pochhammer(c, i)
        top = int(np.argmax(log_t))
        if log_t[-1] < log_t[top] - 46.0:
            break
        i = np.arange(2 * i.size)
    keep = log_t > log_t[top] - 46.0
    t = np.exp(log_t[keep] - log_t[top])
    return i[keep], t / t.sum()


def mandel_q(m: GKMoments, J: float) -> float:
    """Mandel Q = J/(a+b) * F2/F1 * S with S a cancellation-free double sum.

    Writing <N(N-1)> - <N>^2 over the terms p_i of 0F1(; 2+nu; J/a), the
    difference of products collapses to S = sum p_i p_j w_ij with
    w_ij = [(i-j)^2 - (2 nu + 4 + i + j)] / (2 (nu+2+i)(nu+2+j)), which keeps
    full relative accuracy as a -> 0 where Q itself is O(a).
    """
    if J == 0:
        return 0.0
    nu = m.nu
    idx, p = _normalized_terms(2.0 + nu, J / m.a)
    i = idx[:, None].astype(float)
    j = idx[None, :].astype(float)
    w = ((i - j) ** 2 - (2.0 * nu + 4.0 + i + j)) / (2.0 * (nu + 2.0 + i) * (nu + 2.0 + j))
    S = float(p @ w @ p)
    return J / (m.a + m.b) * math.exp(_log_f(m, 2, J) - _log_f(m, 1, J)) * S


def series_moments(m: GKMoments, J: float) -> dict[str, float]:
    """<N>, <N^2>, g2 and Q summed directly over P_n."""
    P = photon_distribution(m, J)
    n = np.arange(P.size, dtype=float)
    mean = math.fsum(n * P)
    fact2 = math.fsum(n * (n - 1.0) * P)
    if mean == 0:
        return {"mean_N": 0.0, "mean_N2": 0.0, "g2": math.nan, "mandel_Q": 0.0}
    return {
        "mean_N": mean,
        "mean_N2": fact2 + mean,
        "g2": fact2 / mean**2,
        "mandel_Q": fact2 / mean - mean,
    }


@dataclass(frozen=True)
class StatisticsReport:
    J: float
    a: float
    b: float
    P: np.ndarray
    mean_N: float
    mean_N2: float
    g2: float
    mandel_Q: float
    residual_series_vs_closed: float


# Q from rounded P_n carries absolute error ~ eps * <N^2>/<N>; below this
# fraction of <N^2>/<N> the Q comparison is made on that absolute scale
Q_FLOOR = 1e-4


def q_scale(mean: float, mean2: float, q: float) -> float:
    """Denominator for relative comparisons of Q, floored where Q is conditioning-limited."""
    return max(abs(q), Q_FLOOR * mean2 / mean) if mean > 0 else abs(q)


def statistics_report(m: GKMoments, J: float) -> StatisticsReport:
    closed = {"mean_N": mean_n(m, J), "mean_N2": mean_n2(m, J), "g2": g2(m, J), "mandel_Q": mandel_q(m, J)}
    series = series_moments(m, J)
    residual = 0.0
    for key, value in closed.items():
        other = series[key]
        if math.isnan(other):
            continue
        if key == "mandel_Q":
            scale = max(q_scale(closed["mean_N"], closed["mean_N2"], value), abs(other))
        else:
            scale = max(abs(value), abs(other))
        if scale > 0:
            residual = max(residual, abs(value - other) / scale)
    return StatisticsReport(J=J, a=m.a, b=m.b, P=photon_distribution(m, J), residual_series_vs_closed=residual,
                            **closed)


def peak_J(m: GKMoments, n_peak: int) -> float:
    """A J for which P_n peaks at ``n_peak``.

    P_n / P_{n-1} = J / e_n, so n_peak is the mode exactly when
    e_{n_peak} <= J <= e_{n_peak + 1}; the midpoint is returned.
    """
    if not 0 <= n_peak < m.n_max:
        raise ValueError("n_peak out of range")
    lo = m.e[n_peak]
    hi = m.e[n_peak + 1]
    return 0.5 * (lo + hi)


def _log_poisson(r2: np.ndarray, n: int) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return n * np.log(r2) - r2 - special.gammaln(n + 1.0)


def wigner_paper(state: GKState, z) -> np.ndarray:
    """(2/pi) sum_n (-1)^n |<z|n>|^2 |c_n|^2 with |<z|n>|^2 the Poisson weight of |z|^2.

    Depends on |z| only.
    """
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    P = state.probabilities
    total = np.zeros(r2.shape)
    for n in range(P.size):
        if P[n] == 0.0:
            continue
        with np.errstate(under="ignore"):
            weight = np.exp(_log_poisson(r2, n)) if n else np.exp(-r2)
        total += (-1) ** n * P[n] * weight
    out = 2.0 / math.pi * total
    return out if out.ndim else float(out)


def wigner_fock(state: GKState, z) -> np.ndarray:
    """Standard Wigner function of the pure state sum c_n |n>.

    W(z) = (2/pi) sum_{m,n} c_m conj(c_n) W_mn(z) with, for m >= n,
    W_mn = (-1)^n sqrt(n!/m!) (2 conj z)^(m-n) exp(-2|z|^2) L_n^(m-n)(4|z|^2)
    and W_nm = conj(W_mn).  The phase-space measure is d(Re z) d(Im z).
    """
    c = state.coeffs
    if c.size - 1 > FOCK_CAP:
        raise TruncationError(f"state needs {c.size - 1} Fock levels; cap is {FOCK_CAP}")
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    x = 4.0 * r2
    with np.errstate(under="ignore"):
        gauss = np.exp(-2.0 * r2)
    keep = np.nonzero(np.abs(c) > 1e-18)[0]
    total = np.zeros(z.shape)
    for i, n in enumerate(keep):
        for mm in keep[i:]:
            k = mm - n
            coef = c[mm] * np.conj(c[n])
            log_scale = 0.5 * (math.lgamma(n + 1) - math.lgamma(mm + 1)) + k * math.log(2.0)
            term = ((-1) ** n * math.exp(log_scale) * np.conj(z) ** k
                    * special.eval_genlaguerre(n, k, x) * gauss)
            contrib = coef * term
            total += contrib.real if k == 0 else 2.0 * contrib.real
    out = 2.0 / math.pi * total
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a square grid, ``values[i, j]`` at re_z[j] + 1j * im_z[i].

    ``noise_floor`` bounds the rounding error of a single grid value; only
    values below ``-noise_floor`` count as negative.
    """

    re_z: np.ndarray
    im_z: np.ndarray
    values: np.ndarray
    kernel: str
    noise_floor: float

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def negative_fraction(self) -> float:
        return float(np.count_nonzero(self.values < -self.noise_floor) / self.values.size)

    @property
    def is_negative(self) -> bool:
        return self.min_value < -self.noise_floor

    def integral(self) -> float:
        """Trapezoidal integral over the grid in d(Re z) d(Im z)."""
        inner = np.trapezoid(self.values, self.re_z, axis=1)
        return float(np.trapezoid(inner, self.im_z))


def _noise_floor(state: GKState, kernel: str) -> float:
    eps = np.finfo(float).eps
    if kernel == "paper":
        return 1e4 * eps * 2.0 / math.pi
    # the Fock double sum adds terms bounded by |c_m c_n|
    return 1e4 * eps * 2.0 / math.pi * float(np.sum(state.amplitudes)) ** 2


def wigner_grid(state: GKState, half_width: float = 3.0, npts: int = 201,
                kernel: Literal["paper", "fock"] = "paper") -> WignerGrid:
    if npts < 16:
        raise ValueError("npts must be at least 16")
    if not half_width > 0:
        raise ValueError("half_width must be positive")
    axis = np.linspace(-half_width, half_width, npts)
    z = axis[np.newaxis, :] + 1j * axis[:, np.newaxis]
    if kernel == "paper":
        values = wigner_paper(state, z)
    elif kernel == "fock":
        values = wigner_fock(state, z)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return WignerGrid(re_z=axis, im_z=axis.copy(), values=np.asarray(values), kernel=kernel,
                      noise_floor=_noise_floor(state, kernel))
