"""Special functions and quadrature used by the physics modules.

Nothing here knows about the oscillator; every routine is a pure function
of its arguments.  Series are summed with a running log-scale so that the
large parameters produced by a small deformation (``b/a`` of order 1e8)
neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import NonConvergenceError

__all__ = [
    "SeriesResult",
    "QuadratureRule",
    "log_gamma",
    "log_pochhammer",
    "hyp0f1",
    "bessel_k",
    "log_bessel_k",
    "gegenbauer_c",
    "gauss_legendre",
    "integrate_semi_infinite",
]

# |term| < SERIES_RTOL * |partial sum| for SERIES_QUIET consecutive terms ends a series.
SERIES_RTOL = 1e-16
SERIES_QUIET = 3
MAX_SERIES_TERMS = 10**6


@dataclass(frozen=True)
class SeriesResult:
    """Value of a summed series together with its truncation diagnostics.

    ``log_value`` is always finite for a convergent positive series, even
    when ``value`` itself overflows to ``inf``.
    """

    value: float
    terms_used: int
    tail_bound: float
    log_value: float

    def __post_init__(self):
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be non-negative")
        if self.terms_used < 1:
            raise ValueError("terms_used must be at least 1")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.domain
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(self.nodes < lo) or np.any(self.nodes > hi):
            raise ValueError("quadrature nodes fall outside the domain")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for positive real ``x``."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


_STIRLING_FROM = 30.0


def _stirling_difference(x, n):
    # ln Gamma(x + n) - ln Gamma(x) from the Stirling series; truncation < 1e-16 for x >= 30
    y = x + n
    out = (x - 0.5) * np.log1p(n / x) + n * np.log(y) - n - n / (12.0 * x * y)
    for coeff, power in ((1.0 / 360.0, 3), (-1.0 / 1260.0, 5), (1.0 / 1680.0, 7), (-1.0 / 1188.0, 9)):
        out = out + coeff * (x ** -power - y ** -power)
    return out


def log_pochhammer(x: float, n):
    """ln[Gamma(x + n) / Gamma(x)] for x > 0 and n >= 0 (array-valued n allowed).

    Differencing two log-gammas loses digits once ln Gamma(x) is large, so
    the Stirling series is differenced analytically instead; x below 30 is
    first shifted up with exact log1p terms.
    """
    if not x > 0:
        raise ValueError("log_pochhammer requires x > 0")
    n = np.asarray(n, dtype=float)
    shift = max(0, math.ceil(_STIRLING_FROM - x))
    out = _stirling_difference(x + shift, n)
    for k in range(shift):
        out = out - np.log1p(n / (x + k))
    return out


def hyp0f1(c: float, x: float, max_terms: int = MAX_SERIES_TERMS) -> SeriesResult:
    """Confluent hypergeometric limit function 0F1(; c; x) for c > 0, x >= 0.

    Terms t_n = x^n / ((c)_n n!) are generated by their ratio
    x / ((c + n)(n + 1)) and accumulated relative to a moving log-scale.
    The tail bound uses the fact that the term ratio decreases
    monotonically once n is past the peak.
    """
    if not c > 0:
        raise ValueError(f"hyp0f1 requires c > 0, got {c!r}")
    if x < 0:
        raise ValueError(f"hyp0f1 requires x >= 0, got {x!r}")
    if x == 0:
        return SeriesResult(1.0, 1, 0.0, 0.0)

    log_x = math.log(x)
    shift = 0.0  # log of the scale the partial sum is stored relative to
    total = 1.0
    log_term = 0.0
    quiet = 0
    n = 0
    while True:
        n += 1
        if n > max_terms:
            raise NonConvergenceError(
                f"0F1({c}; {x}) did not converge within {max_terms} terms"
            )
        log_term += log_x - math.log(c + n - 1) - math.log(n)
        if log_term - shift > 50.0:
            total *= math.exp(shift - log_term)
            shift = log_term
        term = math.exp(log_term - shift)
        total += term
        next_ratio = x / ((c + n) * (n + 1))
        quiet = quiet + 1 if term < SERIES_RTOL * total else 0
        if quiet >= SERIES_QUIET and next_ratio < 1.0:
            tail = term * next_ratio / (1.0 - next_ratio)
            if tail <= 1e-14 * total:
                break

    log_value = shift + math.log(total)
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    log_tail = shift + math.log(tail) if tail > 0 else -math.inf
    tail_bound = math.exp(log_tail) if log_tail < 709.0 else math.inf
    return SeriesResult(value, n + 1, tail_bound, log_value)


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0."""
    if not x > 0:
        raise ValueError(f"bessel_k requires x > 0, got {x!r}")
    if nu < 0:
        raise ValueError(f"bessel_k requires nu >= 0, got {nu!r}")
    value = float(special.kv(nu, x))
    if not math.isfinite(value):
        raise OverflowError(f"K_{nu}({x}) overflows double precision")
    return value


def _log_bessel_k_debye(nu: float, x: np.ndarray) -> np.ndarray:
    # uniform large-order expansion K_nu(nu z), three correction terms
    z = x / nu
    root = np.sqrt(1.0 + z * z)
    eta = root + np.log(z / (1.0 + root))
    t = 1.0 / root
    u1 = (3.0 * t - 5.0 * t**3) / 24.0
    u2 = (81.0 * t**2 - 462.0 * t**4 + 385.0 * t**6) / 1152.0
    u3 = (30375.0 * t**3 - 369603.0 * t**5 + 765765.0 * t**7 - 425425.0 * t**9) / 414720.0
    series = 1.0 - u1 / nu + u2 / nu**2 - u3 / nu**3
    return 0.5 * math.log(math.pi / (2.0 * nu)) - nu * eta - 0.5 * np.log(root) + np.log(series)


def _log_bessel_k_recurrence(nu: float, x: np.ndarray) -> np.ndarray:
    # upward recurrence K_{m+1} = K_{m-1} + (2m/x) K_m is stable for K;
    # it is run on the ratios r_m = K_{m+1}/K_m to stay in range
    mu = nu - math.floor(nu)
    with np.errstate(over="ignore"):
        k_mu = special.kve(mu, x)
        ratio = special.kve(mu + 1.0, x) / k_mu
    if not (np.all(np.isfinite(ratio)) and np.all(np.isfinite(k_mu))):
        raise OverflowError(f"K_{nu} recurrence cannot start at x={x.min()}")
    out = np.log(k_mu) - x
    order = mu
    for _ in range(int(round(nu - mu))):
        out = out + np.log(ratio)
        order += 1.0
        ratio = 1.0 / ratio + 2.0 * order / x
    return out


def log_bessel_k(nu: float, x: np.ndarray | float) -> np.ndarray:
    """ln K_nu(x), finite even where K_nu itself over- or underflows.

    Uses the exponentially scaled kve.  Where that overflows, orders up to
    1000 fall back on the upward order recurrence from nu - floor(nu) and
    larger orders on the uniform large-order expansion.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_bessel_k requires x > 0")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        scaled = special.kve(nu, x)
        out = np.log(scaled) - x
    bad = ~np.isfinite(out)
    if np.any(bad):
        if nu > 1000.0:
            out[bad] = _log_bessel_k_debye(nu, x[bad])
        else:
            out[bad] = _log_bessel_k_recurrence(nu, x[bad])
    return out


def gegenbauer_c(n: int, lam: float, s):
    """Gegenbauer polynomial C_n^lam(s) by the three-term recurrence.

    Accepts scalar or array ``s`` in [-1, 1].
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    if not lam > -0.5 or lam == 0:
        raise ValueError(f"lambda must exceed -1/2 and be nonzero, got {lam!r}")
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) > 1.0):
        raise ValueError("gegenbauer_c requires |s| <= 1")

    prev = np.ones_like(s_arr)
    if n == 0:
        return prev if s_arr.ndim else float(prev)
    cur = 2.0 * lam * s_arr
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(2, n + 1):
            prev, cur = cur, (2.0 * (k + lam - 1.0) * s_arr * cur - (k + 2.0 * lam - 2.0) * prev) / k
    if not np.all(np.isfinite(cur)):
        raise OverflowError(f"C_{n}^{lam} overflows double precision")
    return cur if s_arr.ndim else float(cur)


def gauss_legendre(npts: int, lo: float, hi: float) -> QuadratureRule:
    if npts < 1:
        raise ValueError("npts must be positive")
    if not lo < hi:
        raise ValueError("need lo < hi")
    x, w = np.polynomial.legendre.leggauss(npts)
    half = 0.5 * (hi - lo)
    return QuadratureRule(lo + half * (x + 1.0), half * w, (lo, hi))


_PANEL_RULE = np.polynomial.legendre.leggauss(20)


def _panel(g, lo, hi):
    x, w = _PANEL_RULE
    half = 0.5 * (hi - lo)
    return half * float(np.dot(w, g(lo + half * (x + 1.0))))


def _adaptive(g, lo, hi, whole, tol, depth):
    mid = 0.5 * (lo + hi)
    left, right = _panel(g, lo, mid), _panel(g, mid, hi)
    if abs(left + right - whole) <= tol:
        return left + right
    if depth >= 40:
        raise NonConvergenceError(f"panel [{lo}, {hi}] failed to converge")
    return (_adaptive(g, lo, mid, left, 0.5 * tol, depth + 1)
            + _adaptive(g, mid, hi, right, 0.5 * tol, depth + 1))


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    decay_hint: float = 1.0,
    rtol: float = 1e-9,
    max_panels: int = 2000,
) -> float:
    """Integrate ``f`` over [0, inf).

    ``f`` is called on numpy arrays.  ``decay_hint`` is the J-scale over
    which the integrand carries its mass; it sets the panel width.  The
    substitution J = u**2 softens log or square-root behaviour at the
    origin and turns exp(-c sqrt(J)) tails into plain exponentials.
    Panels of geometrically growing width are marched outwards until the
    contributions become negligible, then each is refined adaptively.
    """
    if not decay_hint > 0:
        raise ValueError("decay_hint must be positive")

    def g(u):
        return 2.0 * u * f(u * u)

    width = 0.25 * math.sqrt(decay_hint)
    edges = [0.0]
    coarse = []
    total = 0.0
    quiet = 0
    while True:
        if len(coarse) >= max_panels:
            raise NonConvergenceError("integrand did not decay within the panel cap")
        lo = edges[-1]
        hi = lo + width
        piece = _panel(g, lo, hi)
        if not math.isfinite(piece):
            raise NonConvergenceError(f"non-finite integrand on [{lo**2}, {hi**2}]")
        coarse.append(piece)
        edges.append(hi)
        total += piece
        negligible = total != 0.0 and abs(piece) <= 1e-3 * rtol * abs(total)
        quiet = quiet + 1 if negligible else 0
        if quiet >= 3:
            break
        width *= 1.15

    tol = 0.1 * rtol * abs(total) / len(coarse)
    if tol == 0.0:
        return 0.0
    refined = [
        _adaptive(g, edges[i], edges[i + 1], coarse[i], tol, 0)
        for i in range(len(coarse))
    ]
    return math.fsum(refined)
