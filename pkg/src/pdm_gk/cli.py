"""Command-line front end: ``pdm-gk <command> [options]``.

Tables are written as CSV (or JSON with ``--format json``), grids and
verification reports as JSON.  Every float is printed with 17 significant
digits so that identical inputs give byte-identical output.  With ``--out``
a sidecar ``<out>.meta.json`` carries axis labels and the parameter legend.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import NonConvergenceError, TruncationError
from .gk import analytic_weight, build_state, moments_from_params
from .model import ModelParams, mass_profile, shifted_spectrum
from .stats import g2, mandel_q, mean_n, peak_J, photon_distribution, wigner_grid
from .verify import FAULTS, SCHEMA_VERSION, run_battery

__all__ = ["main", "build_parser", "RunConfig", "UsageError"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

MAX_N = 100_000
MAX_GRID_POINTS = 1_000_001
MAX_WIGNER_POINTS = 1001
MAX_J = 1e4

DEFAULTS: dict[str, Any] = {
    "alpha": [0.2],
    "m0": 1.0,
    "omega": 1.0,
    "hbar": 1.0,
    "spectrum": "paper",
    "J": None,
    "gamma": 0.0,
    "n_max": None,
    "grid": None,
    "kernel": "paper",
    "format": None,
    "out": None,
    "peak_at": None,
    "level": "fast",
    "inject_fault": None,
}

GRID_DEFAULTS = {
    "mass": "0:0.5:51",
    "stats": "0.5:20:40",
    "weight": "0:10:101",
    "wigner": "-3:3:201",
}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    npts: int

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = str(text).split(":")
        if len(parts) != 3:
            raise UsageError(f"grid must be lo:hi:npts, got {text!r}")
        try:
            lo, hi, npts = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"grid must be lo:hi:npts, got {text!r}") from None
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise UsageError(f"grid needs finite lo < hi, got {text!r}")
        if not 2 <= npts <= MAX_GRID_POINTS:
            raise UsageError(f"grid npts must lie in [2, {MAX_GRID_POINTS}]")
        return cls(lo, hi, npts)

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.npts)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: tuple[ModelParams, ...]
    options: dict[str, Any] = field(default_factory=dict)

    @property
    def alphas(self) -> list[float]:
        return [p.alpha for p in self.params]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    footer: dict[str, Any] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        for key, value in self.footer.items():
            buf.write(f"# {key}={_fmt(value)}\n")
        return buf.getvalue()

    def to_json(self, command: str) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "columns": self.columns,
            "rows": _jsonable(self.rows),
            "footer": _jsonable(self.footer),
        }
        return json.dumps(doc, indent=2) + "\n"


def _params_dict(p: ModelParams) -> dict:
    return dataclasses.asdict(p)


def _legend(cfg: RunConfig) -> list[str]:
    return [f"alpha={_fmt(a)}" for a in cfg.alphas]


def _single(cfg: RunConfig) -> ModelParams:
    if len(cfg.params) != 1:
        raise UsageError(f"{cfg.command} takes exactly one --alpha")
    return cfg.params[0]


def cmd_spectrum(cfg: RunConfig) -> Table:
    n_max = cfg.options["n_max"]
    table = Table(["alpha", "n", "E_n", "e_n"],
                  meta={"x_label": "n", "y_label": "E_n / (hbar omega)"})
    for p in cfg.params:
        spec = shifted_spectrum(p, n_max)
        for n in range(n_max + 1):
            table.rows.append([p.alpha, n, spec.E[n], spec.e[n]])
    return table


def cmd_mass(cfg: RunConfig) -> Table:
    x = cfg.options["grid"].points()
    table = Table(["alpha", "x", "m"], meta={"x_label": "x", "y_label": "m(x)"})
    for p in cfg.params:
        for xi, mi in zip(x, mass_profile(p, x)):
            table.rows.append([p.alpha, xi, mi])
    return table


def cmd_pn(cfg: RunConfig) -> Table:
    table = Table(["alpha", "J", "n", "P_n"], meta={"x_label": "n", "y_label": "P_n"})
    for p in cfg.params:
        m = moments_from_params(p)
        peak = cfg.options["peak_at"]
        if peak is not None:
            if peak >= m.n_max:
                raise UsageError(f"--peak-at must be below {m.n_max}")
            J = peak_J(m, peak)
        else:
            J = cfg.options["J"] if cfg.options["J"] is not None else 1.0
        P = photon_distribution(m, J)
        n_rows = cfg.options["n_max"]
        if n_rows is None:
            significant = np.nonzero(P >= 1e-16)[0]
            n_rows = int(significant[-1]) if significant.size else 0
        P_rows = photon_distribution(m, J, n_max=n_rows)
        for n in range(n_rows + 1):
            table.rows.append([p.alpha, J, n, P_rows[n]])
        table.footer[f"alpha={_fmt(p.alpha)} sum_P"] = math.fsum(P)
    return table


def cmd_stats(cfg: RunConfig) -> Table:
    J_values = cfg.options["grid"].points()
    table = Table(["alpha", "J", "g2", "Q", "mean_N"], meta={"x_label": "J", "y_label": "g2(0), Q"})
    for p in cfg.params:
        m = moments_from_params(p)
        for J in J_values:
            table.rows.append([p.alpha, J, g2(m, J), mandel_q(m, J), mean_n(m, J)])
    return table


def cmd_weight(cfg: RunConfig) -> Table:
    J_values = cfg.options["grid"].points()
    table = Table(["alpha", "J", "W", "W_reduced"], meta={"x_label": "J", "y_label": "W(J)"})
    for p in cfg.params:
        w = analytic_weight(moments_from_params(p))
        full, reduced = w(J_values), w.reduced(J_values)
        for J, wf, wr in zip(J_values, full, reduced):
            table.rows.append([p.alpha, J, wf, wr])
        table.footer[f"alpha={_fmt(p.alpha)} integral_W_reduced"] = w.moment(0)
    return table


def cmd_wigner(cfg: RunConfig) -> dict:
    p = _single(cfg)
    grid: Grid = cfg.options["grid"]
    if not math.isclose(grid.lo, -grid.hi, rel_tol=1e-12, abs_tol=0.0):
        raise UsageError("wigner grid must be symmetric, lo = -hi")
    if not 16 <= grid.npts <= MAX_WIGNER_POINTS:
        raise UsageError(f"wigner npts must lie in [16, {MAX_WIGNER_POINTS}]")
    J = cfg.options["J"] if cfg.options["J"] is not None else 1.0
    state = build_state(moments_from_params(p), J, cfg.options["gamma"])
    wg = wigner_grid(state, grid.hi, grid.npts, kernel=cfg.options["kernel"])
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "wigner",
        "params": _params_dict(p),
        "J": J,
        "gamma": cfg.options["gamma"],
        "kernel": wg.kernel,
        "re_z": wg.re_z,
        "im_z": wg.im_z,
        "values": wg.values,
        "min_value": wg.min_value,
        "negative_fraction": wg.negative_fraction,
        "noise_floor": wg.noise_floor,
        "integral": wg.integral(),
    }


def _wigner_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["re_z", "im_z", "W"])
    for i, y in enumerate(doc["im_z"]):
        for j, x in enumerate(doc["re_z"]):
            writer.writerow([_fmt(x), _fmt(y), _fmt(doc["values"][i][j])])
    for key in ("min_value", "negative_fraction", "noise_floor", "integral"):
        buf.write(f"# {key}={_fmt(doc[key])}\n")
    return buf.getvalue()


def _check_range(name: str, value, lo, hi, *, lo_open: bool = False) -> None:
    if value is None:
        return
    ok = math.isfinite(value) and (value > lo if lo_open else value >= lo) and value <= hi
    if not ok:
        bracket = "(" if lo_open else "["
        raise UsageError(f"--{name.replace('_', '-')} must lie in {bracket}{lo}, {hi}], got {value!r}")


def _merge(args: argparse.Namespace) -> dict[str, Any]:
    merged = dict(DEFAULTS)
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        if "alpha" in loaded and not isinstance(loaded["alpha"], list):
            loaded["alpha"] = [loaded["alpha"]]
        merged.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _config(command: str, merged: dict[str, Any]) -> RunConfig:
    try:
        alphas = [float(a) for a in merged["alpha"]]
        params = tuple(
            ModelParams(m0=float(merged["m0"]), omega=float(merged["omega"]), hbar=float(merged["hbar"]),
                        alpha=a, spectrum=merged["spectrum"])
            for a in alphas
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if not params:
        raise UsageError("at least one --alpha is required")

    opts = {k: merged[k] for k in ("J", "gamma", "n_max", "kernel", "peak_at", "level", "inject_fault", "out")}
    _check_range("J", opts["J"], 0.0, MAX_J)
    _check_range("gamma", opts["gamma"], -1e6, 1e6)
    if opts["n_max"] is not None:
        if int(opts["n_max"]) != opts["n_max"] or not 0 <= opts["n_max"] <= MAX_N:
            raise UsageError(f"--n-max must be an integer in [0, {MAX_N}]")
        opts["n_max"] = int(opts["n_max"])
    if opts["peak_at"] is not None and (int(opts["peak_at"]) != opts["peak_at"] or opts["peak_at"] < 0):
        raise UsageError("--peak-at must be a non-negative integer")
    if opts["peak_at"] is not None and merged["J"] is not None:
        raise UsageError("--J and --peak-at are mutually exclusive")
    if opts["kernel"] not in ("paper", "fock"):
        raise UsageError("--kernel must be paper or fock")
    if opts["level"] not in ("fast", "full"):
        raise UsageError("--level must be fast or full")
    if opts["inject_fault"] is not None and opts["inject_fault"] not in FAULTS:
        raise UsageError(f"--inject-fault must be one of {', '.join(FAULTS)}")

    if command == "spectrum" and opts["n_max"] is None:
        opts["n_max"] = 10
    if command in GRID_DEFAULTS:
        grid = Grid.parse(merged["grid"] if merged["grid"] is not None else GRID_DEFAULTS[command])
        if command in ("stats", "weight") and grid.lo < 0:
            raise UsageError("J grid must start at a non-negative value")
        if command in ("stats", "weight") and grid.hi > MAX_J:
            raise UsageError(f"J grid must end at or below {MAX_J}")
        opts["grid"] = grid
    elif merged["grid"] is not None:
        raise UsageError(f"{command} takes no --grid")

    fmt = merged["format"] or ("json" if command in ("wigner", "verify") else "csv")
    if fmt not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    opts["format"] = fmt
    return RunConfig(command=command, params=params, options=opts)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, action="append", help="deformation in (0, 1); repeatable")
    common.add_argument("--m0", type=float)
    common.add_argument("--omega", type=float)
    common.add_argument("--hbar", type=float)
    common.add_argument("--spectrum", choices=("paper", "exact"), help="energy convention")
    common.add_argument("--config", metavar="PATH", help="JSON file of defaults; flags override it")
    common.add_argument("--out", metavar="PATH", help="write here instead of stdout, plus PATH.meta.json")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(prog="pdm-gk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="energies E_n and e_n")
    p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("mass", parents=[common], help="mass profile m(x)")
    p.add_argument("--grid", metavar="lo:hi:npts")

    p = sub.add_parser("pn", parents=[common], help="photon distribution P_n")
    p.add_argument("--J", type=float)
    p.add_argument("--peak-at", dest="peak_at", type=int, metavar="N", help="choose J so that P_n peaks at N")
    p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("stats", parents=[common], help="g2(0), Mandel Q and <N> over a J grid")
    p.add_argument("--grid", metavar="lo:hi:npts")

    p = sub.add_parser("weight", parents=[common], help="resolution-of-unity weight W(J)")
    p.add_argument("--grid", metavar="lo:hi:npts")

    p = sub.add_parser("wigner", parents=[common], help="Wigner function on a square grid")
    p.add_argument("--J", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--kernel", choices=("paper", "fock"))
    p.add_argument("--grid", metavar="lo:hi:npts")

    p = sub.add_parser("verify", parents=[common], help="run the verification battery")
    p.add_argument("--level", choices=("fast", "full"))
    p.add_argument("--inject-fault", dest="inject_fault", choices=FAULTS, help="negative control")
    return parser


def _emit(text: str, out: str | None, meta: dict | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    if meta is not None:
        Path(f"{out}.meta.json").write_text(json.dumps(_jsonable(meta), indent=2) + "\n")


def run(cfg: RunConfig) -> int:
    fmt = cfg.options["format"]
    out = cfg.options["out"]
    base_meta = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "legend": _legend(cfg),
                 "params": [_params_dict(p) for p in cfg.params]}

    if cfg.command == "verify":
        p = _single(cfg)
        report = run_battery(p, cfg.options["level"], cfg.options["inject_fault"])
        if fmt == "json":
            text = report.to_json()
        else:
            table = Table(["name", "claim_ref", "measured", "threshold", "passed"])
            for c in report.checks:
                table.rows.append([c.name, c.claim_ref, c.measured, c.threshold, str(c.passed).lower()])
            table.footer["overall"] = str(report.overall).lower()
            text = table.to_csv()
        _emit(text, out, None)
        return EXIT_OK if report.overall else EXIT_VERIFY

    if cfg.command == "wigner":
        doc = cmd_wigner(cfg)
        text = json.dumps(_jsonable(doc), indent=2) + "\n" if fmt == "json" else _wigner_csv(doc)
        _emit(text, out, {**base_meta, "x_label": "Re z", "y_label": "Im z", "value_label": "W(z)"})
        return EXIT_OK

    handler = {"spectrum": cmd_spectrum, "mass": cmd_mass, "pn": cmd_pn,
               "stats": cmd_stats, "weight": cmd_weight}[cfg.command]
    table = handler(cfg)
    text = table.to_csv() if fmt == "csv" else table.to_json(cfg.command)
    _emit(text, out, {**base_meta, **table.meta, "columns": table.columns})
    return EXIT_OK


def _attach_grid_values(argv: list[str]) -> list[str]:
    # argparse reads "--grid -3:3:201" as two options; fold it into "--grid=-3:3:201"
    out: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] == "--grid" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--grid={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _attach_grid_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args.command, _merge(args))
        return run(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pdm-gk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergenceError, TruncationError, OverflowError) as exc:
        print(f"pdm-gk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
