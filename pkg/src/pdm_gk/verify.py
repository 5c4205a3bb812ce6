"""Named battery of numerical checks on the model and its coherent states.

Each check reduces to one measured number compared with a threshold.
``kind="error"`` passes when measured <= threshold; ``kind="sign"`` passes
when measured < threshold strictly (used for sign claims, threshold 0).
A check that raises is recorded as failed with the exception text; it
never aborts the battery.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import special

from .gk import (
    GKMoments,
    build_state,
    evolve,
    label_continuity_check,
    moments,
    moments_from_params,
    overlap,
    resolution_of_unity_check,
)
from .model import ModelParams, ode_residual, overlap_matrix, shifted_spectrum
from .stats import g2, mandel_q, mean_n, mean_n2, photon_distribution, q_scale, statistics_report, wigner_grid

__all__ = ["CheckResult", "VerificationReport", "run_battery", "CLAIM_REFS", "FAULTS", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1"

Level = Literal["fast", "full"]
FAULTS = ("spectrum",)

# claim identifiers carried by every CheckResult
CLAIM_REFS = {
    "spectrum_consistency": "energy-spectrum/shifted-form",
    "zero_deformation_limit": "energy-spectrum/alpha-to-zero",
    "orthonormality": "eigenfunctions/normalization",
    "ode_residual": "eigenfunctions/schrodinger-equation",
    "normalizability": "gk/normalizability",
    "label_continuity": "gk/continuity",
    "resolution_of_unity": "gk/resolution-of-unity",
    "temporal_stability": "gk/temporal-stability",
    "photon_normalization": "statistics/photon-distribution",
    "dual_path_statistics": "statistics/closed-forms",
    "mandel_identity": "statistics/mandel-q",
    "sub_poissonian": "statistics/sub-poissonian",
    "poisson_limit": "statistics/alpha-to-zero",
    "wigner_negativity": "wigner/negativity",
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    claim_ref: str
    measured: float
    threshold: float
    passed: bool
    kind: Literal["error", "sign"] = "error"
    detail: str = ""

    @classmethod
    def evaluate(cls, name: str, measured: float, threshold: float,
                 kind: Literal["error", "sign"] = "error", detail: str = "") -> "CheckResult":
        if math.isnan(measured):
            passed = False
        elif kind == "error":
            passed = measured <= threshold
        else:
            passed = measured < threshold
        return cls(name, CLAIM_REFS[name], float(measured), float(threshold), bool(passed), kind, detail)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if not math.isfinite(self.measured):
            out["measured"] = None
        return out


@dataclass(frozen=True)
class VerificationReport:
    params: ModelParams
    level: Level
    checks: tuple[CheckResult, ...]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "params": dataclasses.asdict(self.params),
            "level": self.level,
            "overall": self.overall,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _rel(x: np.ndarray, y: np.ndarray) -> float:
    scale = np.maximum(np.abs(x), np.abs(y))
    diff = np.abs(x - y)
    ok = scale > 0
    return float(np.max(diff[ok] / scale[ok])) if np.any(ok) else 0.0


def _j_grid(level: Level) -> np.ndarray:
    step = 0.5 if level == "fast" else 0.1
    return np.round(np.arange(1, int(round(20.0 / step)) + 1) * step, 12)


def _spectrum_consistency(params, level, fault):
    table = shifted_spectrum(params, 100)
    e = np.array(table.e)
    if fault == "spectrum":
        e[1] += 0.1
    err = _rel(table.E[1:] - table.E[0], e[1:])
    return CheckResult.evaluate("spectrum_consistency", err, 1e-12)


def _zero_deformation_limit(params, level, fault):
    # dimensionless deformation 1e-10; the term d (n^2 + 2n + 1/2) / 2 exceeds 1e-8 beyond n = 13
    limit = dataclasses.replace(params, alpha=1e-10 * params.m0 * params.omega / params.hbar)
    table = shifted_spectrum(limit, 10)
    err = float(np.max(np.abs(table.E - (np.arange(11) + 0.5))))
    return CheckResult.evaluate("zero_deformation_limit", err, 1e-8, detail="alpha=1e-10, n<=10")


def _orthonormality(params, level, fault):
    M = overlap_matrix(params, 12)
    return CheckResult.evaluate("orthonormality", float(np.max(np.abs(M - np.eye(13)))), 1e-8)


def _ode_residual(params, level, fault):
    n_top = 5 if level == "fast" else 10
    worst = max(ode_residual(params, n) for n in range(n_top + 1))
    return CheckResult.evaluate("ode_residual", worst, 1e-4, detail=f"n<={n_top}")


def _normalizability(m: GKMoments):
    def check(params, level, fault):
        worst = 0.0
        for J in (0.1, 1.0, 5.0, 20.0):
            worst = max(worst, abs(math.fsum(build_state(m, J).probabilities) - 1.0))
        return CheckResult.evaluate("normalizability", worst, 1e-12)
    return check


def _label_continuity(m: GKMoments):
    def check(params, level, fault):
        d = [label_continuity_check(m, 1.0, 0.0, delta) for delta in (1e-2, 1e-3, 1e-4)]
        ratio = min(d[0] / d[1], d[1] / d[2])
        # reported as the reciprocal so that "error" semantics apply: 1/ratio <= 1/5
        return CheckResult.evaluate("label_continuity", 1.0 / ratio, 0.2,
                                    detail=f"min shrink factor {ratio:.6g} per decade of delta")
    return check


def _resolution_of_unity(m: GKMoments):
    def check(params, level, fault):
        n_top = 5 if level == "fast" else 10
        err = float(np.max(resolution_of_unity_check(m, n_top)))
        return CheckResult.evaluate("resolution_of_unity", err, 1e-5, detail=f"n<={n_top}")
    return check


def _temporal_stability(m: GKMoments):
    def check(params, level, fault):
        s = build_state(m, 1.0, 0.3)
        t = 2.7
        forward = evolve(s, t=t)
        back = evolve(forward, t=-t)
        same = np.array_equal(forward.amplitudes, s.amplitudes)
        err = abs(overlap(back, s) - 1.0) if same else math.inf
        return CheckResult.evaluate("temporal_stability", err, 1e-12,
                                    detail="magnitudes bit-identical" if same else "magnitudes changed")
    return check


def _photon_normalization(m: GKMoments):
    def check(params, level, fault):
        worst = max(abs(math.fsum(photon_distribution(m, J)) - 1.0) for J in _j_grid(level))
        return CheckResult.evaluate("photon_normalization", worst, 1e-10)
    return check


def _dual_path(m: GKMoments):
    def check(params, level, fault):
        worst = max(statistics_report(m, J).residual_series_vs_closed for J in (0.5, 1.0, 5.0, 10.0, 20.0))
        return CheckResult.evaluate("dual_path_statistics", worst, 1e-9)
    return check


def _mandel_identity(m: GKMoments):
    def check(params, level, fault):
        worst = 0.0
        for J in (0.5, 1.0, 5.0, 10.0, 20.0):
            q = mandel_q(m, J)
            mean = mean_n(m, J)
            other = mean * (g2(m, J) - 1.0)
            worst = max(worst, abs(q - other) / max(q_scale(mean, mean_n2(m, J), q), abs(other)))
        return CheckResult.evaluate("mandel_identity", worst, 1e-10)
    return check


def _sub_poissonian(m: GKMoments):
    def check(params, level, fault):
        grid = _j_grid(level)
        worst_q = max(mandel_q(m, J) for J in grid)
        worst_g = max(g2(m, J) - 1.0 for J in grid)
        return CheckResult.evaluate("sub_poissonian", max(worst_q, worst_g), 0.0, kind="sign",
                                    detail=f"max Q={worst_q:.6g}, max g2-1={worst_g:.6g} on J in (0, 20]")
    return check


def _poisson_limit(params, level, fault):
    m = moments_from_params(dataclasses.replace(params, alpha=1e-8))
    worst = 0.0
    for J in (1.0, 5.0):
        P = photon_distribution(m, J, n_max=30)
        n = np.arange(31)
        poisson = np.exp(n * math.log(J) - J - special.gammaln(n + 1.0))
        worst = max(worst, abs(g2(m, J) - 1.0), abs(mandel_q(m, J)), float(np.max(np.abs(P - poisson))))
    return CheckResult.evaluate("poisson_limit", worst, 1e-6, detail="alpha=1e-8, J in {1, 5}, n<=30")


def _wigner_negativity(m: GKMoments):
    def check(params, level, fault):
        grid = wigner_grid(build_state(m, 1.0), 3.0, 101 if level == "fast" else 201, kernel="paper")
        return CheckResult.evaluate("wigner_negativity", grid.min_value, -grid.noise_floor, kind="sign",
                                    detail=f"J=1, |z|<=3, negative fraction {grid.negative_fraction:.6g}")
    return check


def run_battery(params: ModelParams, level: Level = "fast", inject_fault: str | None = None) -> VerificationReport:
    """Run every check in a fixed order.

    ``inject_fault="spectrum"`` perturbs e_1 by 0.1 inside the spectrum
    consistency check only; it exists to show the battery can fail.
    """
    if level not in ("fast", "full"):
        raise ValueError(f"unknown level {level!r}")
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ValueError(f"unknown fault {inject_fault!r}")

    checks: list[CheckResult] = []

    def run(name: str, fn: Callable) -> None:
        try:
            checks.append(fn(params, level, inject_fault))
        except (ArithmeticError, ValueError) as exc:
            checks.append(CheckResult(name, CLAIM_REFS[name], math.nan, math.nan, False, "error",
                                      f"{type(exc).__name__}: {exc}"))

    run("spectrum_consistency", _spectrum_consistency)
    run("zero_deformation_limit", _zero_deformation_limit)
    run("orthonormality", _orthonormality)
    run("ode_residual", _ode_residual)

    gk_checks = ("normalizability", "label_continuity", "resolution_of_unity", "temporal_stability",
                 "photon_normalization", "dual_path_statistics", "mandel_identity", "sub_poissonian")
    try:
        m = moments(shifted_spectrum(params, 2000))
    except (ArithmeticError, ValueError) as exc:
        for name in gk_checks + ("wigner_negativity",):
            checks.append(CheckResult(name, CLAIM_REFS[name], math.nan, math.nan, False, "error",
                                      f"moments unavailable: {type(exc).__name__}: {exc}"))
    else:
        run("normalizability", _normalizability(m))
        run("label_continuity", _label_continuity(m))
        run("resolution_of_unity", _resolution_of_unity(m))
        run("temporal_stability", _temporal_stability(m))
        run("photon_normalization", _photon_normalization(m))
        run("dual_path_statistics", _dual_path(m))
        run("mandel_identity", _mandel_identity(m))
        run("sub_poissonian", _sub_poissonian(m))
        run("wigner_negativity", _wigner_negativity(m))
    run("poisson_limit", _poisson_limit)
    return VerificationReport(params=params, level=level, checks=tuple(checks))
