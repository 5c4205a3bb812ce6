"""Acceptance criteria 1-12, one test each; every test prints a PASS/FAIL line."""

import csv
import io
import math

import numpy as np
from scipy import special

from pdm_gk.cli import main
from pdm_gk.gk import (
    build_state,
    evolve,
    label_continuity_check,
    moments_from_params,
    overlap,
    resolution_of_unity_check,
)
from pdm_gk.model import ModelParams, eigenfunction, ode_residual, overlap_matrix, shifted_spectrum
from pdm_gk.stats import g2, mandel_q, mean_n, mean_n2, photon_distribution, series_moments, wigner_grid

ALPHAS = [round(0.1 * k, 12) for k in range(1, 10)]
J_GRID = [round(0.1 * k, 12) for k in range(1, 201)]


def cli_table(capsys, *argv):
    assert main(list(argv)) == 0
    text = capsys.readouterr().out
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def by_alpha(rows, key, value):
    out: dict[float, list[float]] = {}
    for r in rows:
        out.setdefault(float(r["alpha"]), []).append((float(r[key]), float(r[value])))
    return {a: np.array(v) for a, v in sorted(out.items())}


def test_criterion_01_spectrum(criterion):
    worst = 0.0
    for alpha in ALPHAS:
        t = shifted_spectrum(ModelParams(alpha=alpha), 100)
        diff = t.E[1:] - t.E[0]
        worst = max(worst, float(np.max(np.abs(diff - t.e[1:]) / np.abs(t.e[1:]))))
    criterion.check("e_n = E_n - E_0 = a n^2 + b n", worst <= 1e-12, f"max rel {worst:.2e}")
    E = shifted_spectrum(ModelParams(alpha=1e-10), 100).E
    dev = np.abs(E - (np.arange(101) + 0.5))
    reach = int(np.argmax(dev >= 1e-8)) - 1
    criterion.check("alpha=1e-10 limit for n<=100", dev.max() < 1e-8,
                    f"max |E_n-(n+1/2)| {dev.max():.2e}, below 1e-8 up to n={reach}")
    criterion.conclude()


def test_criterion_02_eigenpairs(criterion):
    worst_res = 0.0
    for alpha in (0.1, 0.5):
        p = ModelParams(alpha=alpha)
        for n in range(11):
            worst_res = max(worst_res, ode_residual(p, n, E=eigenfunction(p, n).energy))
    criterion.check("ODE residual n<=10", worst_res < 1e-4, f"max {worst_res:.2e}")
    worst_orth = max(float(np.max(np.abs(overlap_matrix(ModelParams(alpha=a), 12) - np.eye(13))))
                     for a in ALPHAS)
    criterion.check("orthonormality n,m<=12", worst_orth <= 1e-8, f"max {worst_orth:.2e}")
    criterion.conclude()


def test_criterion_03_normalizability(criterion):
    worst = 0.0
    for alpha in (0.1, 0.5, 0.9):
        m = moments_from_params(ModelParams(alpha=alpha))
        for J in (0.1, 1.0, 5.0, 20.0):
            worst = max(worst, abs(math.fsum(np.abs(build_state(m, J).coeffs) ** 2) - 1.0))
    criterion.check("sum |c_n|^2 = 1", worst <= 1e-12, f"max dev {worst:.2e}")
    criterion.conclude()


def test_criterion_04_continuity(criterion):
    m = moments_from_params(ModelParams())
    d = [label_continuity_check(m, 1.0, 0.0, delta) for delta in (1e-2, 1e-3, 1e-4)]
    ratios = [d[0] / d[1], d[1] / d[2]]
    criterion.check("distance^2 shrinks >= 5x per decade", min(ratios) >= 5,
                    f"ratios {ratios[0]:.1f}, {ratios[1]:.1f}")
    criterion.conclude()


def test_criterion_05_resolution_of_unity(criterion):
    for alpha in (0.2, 0.5):
        err = float(np.max(resolution_of_unity_check(moments_from_params(ModelParams(alpha=alpha)), 10)))
        criterion.check(f"moments n<=10 alpha={alpha}", err <= 1e-5, f"max rel {err:.2e}")
    criterion.conclude()


def test_criterion_06_temporal_stability(criterion):
    m = moments_from_params(ModelParams())
    s = build_state(m, 2.0, 0.3)
    t = evolve(s, nu=1.0, t=7.25)
    criterion.check("|c_n| bit-identical", np.array_equal(t.amplitudes, s.amplitudes))
    # moduli recomputed from the complex coefficients carry the rounding of exp(-i gamma e_n)
    drift = float(np.max(np.abs(np.abs(t.coeffs) - s.amplitudes) / s.amplitudes))
    criterion.check("moduli of evolved coefficients", drift <= 4 * np.finfo(float).eps, f"max rel {drift:.1e}")
    back = abs(overlap(evolve(t, nu=1.0, t=-7.25), s) - 1.0)
    criterion.check("round trip overlap", back <= 1e-12, f"|<.|.>-1| {back:.2e}")
    criterion.conclude()


def test_criterion_07_closed_forms(criterion):
    worst = dict.fromkeys(("mean_N", "mean_N2", "g2", "mandel_Q"), 0.0)
    worst_id = 0.0
    for alpha in ALPHAS:
        m = moments_from_params(ModelParams(alpha=alpha))
        for J in J_GRID:
            closed = {"mean_N": mean_n(m, J), "mean_N2": mean_n2(m, J), "g2": g2(m, J), "mandel_Q": mandel_q(m, J)}
            series = series_moments(m, J)
            for key, value in closed.items():
                worst[key] = max(worst[key], abs(value - series[key]) / abs(value))
            q = closed["mandel_Q"]
            worst_id = max(worst_id, abs(q - closed["mean_N"] * (closed["g2"] - 1.0)) / abs(q))
    for key, err in worst.items():
        criterion.check(f"{key} closed vs series", err <= 1e-9, f"{err:.2e}")
    criterion.check("Q = <N>(g2-1)", worst_id <= 1e-10, f"{worst_id:.2e}")
    criterion.conclude()


def test_criterion_08_sub_poissonian(criterion):
    max_q = max_g = -math.inf
    for alpha in ALPHAS:
        m = moments_from_params(ModelParams(alpha=alpha))
        for J in J_GRID:
            max_q = max(max_q, mandel_q(m, J))
            max_g = max(max_g, g2(m, J) - 1.0)
    criterion.check("Q < 0", max_q < 0, f"max Q {max_q:.3e}")
    criterion.check("g2 < 1", max_g < 0, f"max g2-1 {max_g:.3e}")
    criterion.conclude()


def test_criterion_09_poisson_recovery(criterion):
    m = moments_from_params(ModelParams(alpha=1e-8))
    worst_g = worst_q = worst_p = 0.0
    n = np.arange(31)
    for J in (0.5, 1.0, 5.0, 10.0):
        worst_g = max(worst_g, abs(g2(m, J) - 1.0))
        worst_q = max(worst_q, abs(mandel_q(m, J)))
        poisson = np.exp(n * math.log(J) - J - special.gammaln(n + 1.0))
        worst_p = max(worst_p, float(np.max(np.abs(photon_distribution(m, J, 30) - poisson))))
    criterion.check("|g2-1| < 1e-5", worst_g < 1e-5, f"{worst_g:.2e}")
    criterion.check("|Q| < 1e-5", worst_q < 1e-5, f"{worst_q:.2e}")
    criterion.check("P_n Poisson n<=30", worst_p <= 1e-6, f"{worst_p:.2e}")
    criterion.conclude()


def test_criterion_10_wigner(criterion):
    state = build_state(moments_from_params(ModelParams(alpha=0.1)), 1.0)
    paper = wigner_grid(state, 3.0, 201, kernel="paper")
    criterion.check("paper kernel min < 0", paper.min_value < -paper.noise_floor, f"min {paper.min_value:.3e}")
    fock = wigner_grid(state, 3.0, 201, kernel="fock")
    integral = fock.integral()
    criterion.check("fock kernel integral", abs(integral - 1.0) <= 1e-3, f"{integral:.6f}")
    criterion.check("fock kernel negative", fock.is_negative,
                    f"min {fock.min_value:.3e}, noise floor {fock.noise_floor:.1e}")
    criterion.conclude()


def test_criterion_11_figure_shapes(capsys, criterion):
    alpha_args = [f"--alpha={a}" for a in ALPHAS]

    mass = by_alpha(cli_table(capsys, "mass", *alpha_args), "x", "m")
    curves = np.array([v[:, 1] for v in mass.values()])
    x = next(iter(mass.values()))[:, 0]
    inside = x > 0
    criterion.check("mass decreases in alpha",
                    bool(np.all(np.diff(curves[:, inside], axis=0) < 0)) and np.ptp(curves[:, ~inside]) == 0)

    spec = by_alpha(cli_table(capsys, "spectrum", "--n-max=10", *alpha_args), "n", "E_n")
    levels = np.array([v[:, 1] for v in spec.values()])
    criterion.check("E_n increases in alpha", bool(np.all(np.diff(levels, axis=0) > 0)))

    weight = by_alpha(cli_table(capsys, "weight", *alpha_args), "J", "W")
    w = np.array([v[:, 1] for v in weight.values()])
    criterion.check("W(J) decreases in alpha", bool(np.all(np.diff(w, axis=0) < 0)),
                    f"{w.shape[1]} J points, J in [0, 10]")
    criterion.conclude()


def test_criterion_12_determinism(capsys, criterion, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    codes = [main(["verify", "--level=full", f"--out={path}"]) for path in (first, second)]
    capsys.readouterr()
    same = first.read_bytes() == second.read_bytes()
    criterion.check("verify report byte-identical", same and codes == [0, 0], f"exit codes {codes}")
    criterion.conclude()
