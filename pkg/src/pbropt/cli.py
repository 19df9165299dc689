"""Command-line front end.

Sub-commands compute the optimal optical depth, sweep the productivity
curves to CSV tables, run the alternating depth/concentration optimization,
and simulate the closed-loop dilution controller. Output files are
deterministic (9 significant digits, no timestamps); every run finishes by
writing a manifest.json recording the inputs and produced files.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .controller import (
    ControlConfig,
    convergence_time,
    default_x_bar,
    simulate_closed_loop,
)
from .errors import (
    BracketMiss,
    ConfigError,
    DegenerateRange,
    DomainError,
    InfeasibleRespiration,
    InvalidBracket,
    NonConvergence,
    ParameterFileError,
    StepUnderflow,
)
from .growth import SECONDS_PER_DAY, haldane_mu
from .light import ExtinctionModel, extinction, fit_alpha0
from .optimizer import (
    alternate,
    compensation_concentration,
    dPi_dX,
    optimal_depth_for_X,
    optimal_X_for_h,
    y_opt,
    y_opt_scan,
)
from .params import PRESET_NAMES, ParameterSet, load_params_file, preset
from .productivity import (
    mean_growth_optical,
    optical_productivity,
    surface_productivity,
)

_H_MIN_PRESETS = {"raceway": 0.1, "tubular": 0.01, "biofilm": 1e-4}

SWEEP_KINDS = ("P_of_Y", "Pi_of_h", "Pi_of_X", "Pi_surface", "Pi_vs_alpha1", "eps_of_X")


def _fmt(x: float) -> str:
    """9 significant digits, scientific notation below 1e-4, stable across runs."""
    if x == 0.0:
        return "0"
    return f"{x:.9g}"


def _jnum(x: float) -> float:
    return 0.0 if x == 0.0 else float(f"{x:.9g}")


class _Run:
    """Collects output files for one command and writes the manifest last."""

    def __init__(self, args: argparse.Namespace) -> None:
        self.command: str = args.command
        self.out_dir = Path(args.out)
        self.params_file = getattr(args, "params", None)
        self.preset_name = None if self.params_file else args.preset
        self.fmt: str = getattr(args, "format", "csv")
        self.outputs: list[str] = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def write_table(self, name: str, columns: list[str], rows: list[list]) -> None:
        """Write one curve/trace either as CSV (default) or a JSON record list."""
        if self.fmt == "json":
            path = self.out_dir / f"{name}.json"
            records = [
                {col: (v if isinstance(v, int) else _jnum(v)) for col, v in zip(columns, row)}
                for row in rows
            ]
            path.write_text(json.dumps(records, indent=1) + "\n")
        else:
            path = self.out_dir / f"{name}.csv"
            lines = [f"# {self.command}: columns {', '.join(columns)}"]
            lines.append(",".join(columns))
            for row in rows:
                lines.append(
                    ",".join(str(v) if isinstance(v, int) else _fmt(v) for v in row)
                )
            path.write_text("\n".join(lines) + "\n")
        self.outputs.append(path.name)

    def write_json(self, name: str, payload: dict) -> None:
        path = self.out_dir / f"{name}.json"
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
        self.outputs.append(path.name)

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "params_file": str(self.params_file) if self.params_file else None,
            "preset": self.preset_name,
            "outputs": self.outputs,
            "tool_version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        (self.out_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=1, sort_keys=True) + "\n"
        )


def _load(args: argparse.Namespace) -> ParameterSet:
    if getattr(args, "params", None):
        return load_params_file(args.params)
    return preset(args.preset)


def _range(lo: float, hi: float, n: int, what: str) -> np.ndarray:
    if not lo < hi:
        raise ConfigError(f"malformed {what} range: lo={lo} must be < hi={hi}")
    if n < 2:
        raise ConfigError(f"malformed {what} range: n={n} must be >= 2")
    return np.linspace(lo, hi, n)


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {what} list: {text!r}") from None
    if not values:
        raise ConfigError(f"empty {what} list")
    return values


def cmd_yopt(args: argparse.Namespace) -> int:
    pset = _load(args)
    run = _Run(args)
    p = pset.haldane
    i_s = args.I_s if args.I_s is not None else pset.I_s
    res = y_opt(p, i_s)
    payload = {
        "Y_opt": _jnum(res.Y_opt),
        "branch": res.branch,
        "I_bottom": _jnum(res.I_bottom),
        "mu_at_bottom": _jnum(haldane_mu(p, res.I_bottom)),
        "R": _jnum(p.R),
        "I_s": _jnum(i_s),
        "mu_max_per_d": _jnum(p.mu_max),
        "I_star": _jnum(p.I_star),
        "theta_per_s": _jnum(p.theta / SECONDS_PER_DAY),
    }
    if args.scan:
        y_scan, p_scan = y_opt_scan(p, i_s, y_max=args.scan_y_max, step=args.scan_step)
        payload["Y_opt_scan"] = _jnum(y_scan)
        payload["P_max_scan"] = _jnum(p_scan)
        payload["closed_minus_scan"] = _jnum(res.Y_opt - y_scan)
    print(json.dumps(payload, indent=1, sort_keys=True))
    run.write_json("yopt", payload)
    run.finish()
    return 0


def _sweep_p_of_y(pset: ParameterSet, args, run: _Run) -> None:
    y_grid = _range(args.lo if args.lo is not None else 0.0,
                    args.hi if args.hi is not None else 20.0,
                    args.n if args.n is not None else 2001, "Y")
    p = pset.haldane
    rows = []
    for y in y_grid:
        mu_local = haldane_mu(p, pset.I_s * float(np.exp(-y)))
        mu_bar = mean_growth_optical(p, pset.I_s, float(y))
        rows.append([float(y), mu_local, mu_bar, optical_productivity(p, pset.I_s, float(y))])
    run.write_table("P_of_Y", ["Y", "mu_per_d", "mu_bar_per_d", "P_per_d"], rows)


def _sweep_pi_of_h(pset: ParameterSet, args, run: _Run) -> None:
    x = args.X if args.X is not None else 50.0
    h_grid = _range(args.lo if args.lo is not None else 0.01,
                    args.hi if args.hi is not None else 1.0,
                    args.n if args.n is not None else 500, "h")
    if h_grid[0] <= 0.0:
        raise ConfigError("depth range must be positive")
    p, m = pset.haldane, pset.extinction
    eps = extinction(m, x)
    rows = []
    for h in h_grid:
        h = float(h)
        pi = surface_productivity(p, m, x, h, pset.I_s)
        bottom_net = haldane_mu(p, pset.I_s * float(np.exp(-eps * h))) - p.R
        rows.append([h, pi, bottom_net])
    run.write_table("Pi_of_h", ["h_m", "Pi_g_per_m2_d", "bottom_net_growth_per_d"], rows)


def _sweep_pi_of_x(pset: ParameterSet, args, run: _Run) -> None:
    h = args.h if args.h is not None else 0.15
    x_grid = _range(args.lo if args.lo is not None else 0.0,
                    args.hi if args.hi is not None else 1000.0,
                    args.n if args.n is not None else 1001, "X")
    p, m = pset.haldane, pset.extinction
    rows = []
    for x in x_grid:
        x = float(x)
        y = extinction(m, x) * h
        pi = surface_productivity(p, m, x, h, pset.I_s)
        bottom_net = haldane_mu(p, pset.I_s * float(np.exp(-y))) - p.R
        rows.append([x, y, pi, bottom_net])
    run.write_table(
        "Pi_of_X", ["X_g_per_m3", "Y", "Pi_g_per_m2_d", "bottom_net_growth_per_d"], rows
    )


def _sweep_pi_surface(pset: ParameterSet, args, run: _Run) -> None:
    x_grid = _range(args.lo if args.lo is not None else 1.0,
                    args.hi if args.hi is not None else 1000.0,
                    args.n if args.n is not None else 100, "X")
    h_grid = _range(args.h_lo, args.h_hi, args.h_n, "h")
    if h_grid[0] <= 0.0:
        raise ConfigError("depth range must be positive")
    p, m = pset.haldane, pset.extinction
    rows = []
    for x in x_grid:
        for h in h_grid:
            rows.append(
                [float(x), float(h), surface_productivity(p, m, float(x), float(h), pset.I_s)]
            )
    run.write_table("Pi_surface", ["X_g_per_m3", "h_m", "Pi_g_per_m2_d"], rows)


def _sweep_pi_vs_alpha1(pset: ParameterSet, args, run: _Run) -> None:
    x = args.X if args.X is not None else 50.0
    alpha1_values = _parse_floats(
        args.alpha1_values if args.alpha1_values else "0,5,10,15,20,25", "alpha1"
    )
    p = pset.haldane
    rows = []
    for a1 in alpha1_values:
        if a1 < 0.0:
            raise ConfigError(f"alpha1 must be >= 0, got {a1}")
        m = ExtinctionModel(alpha0=pset.extinction.alpha0, alpha1=a1, s=pset.extinction.s)
        h_opt = optimal_depth_for_X(p, m, pset.I_s, x)
        rows.append([a1, h_opt, surface_productivity(p, m, x, h_opt, pset.I_s)])
    run.write_table("Pi_vs_alpha1", ["alpha1_per_m", "h_opt_m", "Pi_opt_g_per_m2_d"], rows)


def _sweep_eps_of_x(pset: ParameterSet, args, run: _Run) -> None:
    s_values = _parse_floats(
        args.s_values if args.s_values else "0.2,0.4,0.6,0.8,1.0", "s"
    )
    x_grid = _range(args.lo if args.lo is not None else 0.0,
                    args.hi if args.hi is not None else 1000.0,
                    args.n if args.n is not None else 1001, "X")
    reference = ExtinctionModel(alpha0=pset.alpha0_ref, alpha1=0.0, s=1.0)
    for s in s_values:
        if not 0.0 < s <= 1.0:
            raise ConfigError(f"s must lie in (0, 1], got {s}")
        alpha0 = fit_alpha0(reference, s, (float(x_grid[0]), float(x_grid[-1])), x_grid.size)
        m = ExtinctionModel(alpha0=alpha0, alpha1=pset.extinction.alpha1, s=s)
        rows = [[float(x), extinction(m, float(x))] for x in x_grid]
        run.write_table(f"eps_of_X_s{_fmt(s)}", ["X_g_per_m3", "eps_per_m"], rows)


def cmd_sweep(args: argparse.Namespace) -> int:
    pset = _load(args)
    run = _Run(args)
    dispatch = {
        "P_of_Y": _sweep_p_of_y,
        "Pi_of_h": _sweep_pi_of_h,
        "Pi_of_X": _sweep_pi_of_x,
        "Pi_surface": _sweep_pi_surface,
        "Pi_vs_alpha1": _sweep_pi_vs_alpha1,
        "eps_of_X": _sweep_eps_of_x,
    }
    dispatch[args.kind](pset, args, run)
    run.finish()
    print(f"wrote {len(run.outputs)} file(s) to {run.out_dir}")
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    pset = _load(args)
    run = _Run(args)
    p, m = pset.haldane, pset.extinction
    if args.X is not None:
        h_star = optimal_depth_for_X(p, m, pset.I_s, args.X)
        res = y_opt(p, pset.I_s)
        payload = {
            "mode": "depth_for_X",
            "X": _jnum(args.X),
            "h_star_m": _jnum(h_star),
            "Y_opt": _jnum(res.Y_opt),
            "bottom_net_growth_per_d": _jnum(haldane_mu(p, res.I_bottom) - p.R),
            "Pi_at_h_star": _jnum(surface_productivity(p, m, args.X, h_star, pset.I_s)),
        }
    else:
        try:
            x_star, pi_star = optimal_X_for_h(p, m, pset.I_s, args.h)
        except BracketMiss as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        payload = {
            "mode": "X_for_h",
            "h_m": _jnum(args.h),
            "X_star": _jnum(x_star),
            "Pi_star": _jnum(pi_star),
            "stationarity_residual": _jnum(dPi_dX(p, m, pset.I_s, x_star, args.h)),
            "X_compensation": _jnum(compensation_concentration(p, m, pset.I_s, args.h)),
        }
    print(json.dumps(payload, indent=1, sort_keys=True))
    run.write_json("optimize", payload)
    run.finish()
    return 0


def _growth_exponent(steps) -> float | None:
    """ln Pi vs ln X slope over the last decade of iterates, if well posed."""
    n_last = steps[-1].n
    tail = [s for s in steps if s.n >= n_last / 10 and s.Pi > 0.0 and s.X > 0.0]
    if len(tail) < 3:
        return None
    xs = np.log([s.X for s in tail])
    ys = np.log([s.Pi for s in tail])
    if xs.max() - xs.min() < 0.1:
        return None
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


def cmd_alternate(args: argparse.Namespace) -> int:
    pset = _load(args)
    run = _Run(args)
    p, m = pset.haldane, pset.extinction
    h_min = None
    if args.h_min is not None:
        h_min = _H_MIN_PRESETS.get(args.h_min)
        if h_min is None:
            try:
                h_min = float(args.h_min)
            except ValueError:
                raise ConfigError(
                    f"--h-min must be a depth in m or one of {sorted(_H_MIN_PRESETS)}, "
                    f"got {args.h_min!r}"
                ) from None
    trace = alternate(p, m, pset.I_s, args.X0, args.n_max, h_min=h_min)
    rows = [
        [s.n, s.X, s.h, s.Y, s.Pi, s.bottom_net_growth] for s in trace.steps
    ]
    run.write_table(
        "alternate_trace",
        ["n", "X_g_per_m3", "h_m", "Y", "Pi_g_per_m2_d", "bottom_net_growth_per_d"],
        rows,
    )
    res = y_opt(p, pset.I_s)
    p_opt = optical_productivity(p, pset.I_s, res.Y_opt)
    limit_pi = p_opt / m.alpha0
    summary: dict = {
        "X0": _jnum(args.X0),
        "n_iterates": len(trace.steps),
        "stop_reason": trace.stop_reason,
        "converged": trace.converged,
        "Y_opt": _jnum(res.Y_opt),
        "P_at_Y_opt": _jnum(p_opt),
        "limit_Pi_g_per_m2_d": _jnum(limit_pi),
        "limit_surface_biomass_g_per_m2": _jnum(res.Y_opt / m.alpha0),
        "s": _jnum(m.s),
    }
    if trace.steps:
        last = trace.steps[-1]
        summary.update(
            {
                "X_last": _jnum(last.X),
                "h_last": _jnum(last.h),
                "Y_last": _jnum(last.Y),
                "Pi_last": _jnum(last.Pi),
                "Xh_last": _jnum(last.X * last.h),
                "bottom_net_growth_last": _jnum(last.bottom_net_growth),
                "pi_gap_rel": _jnum((limit_pi - last.Pi) / limit_pi),
            }
        )
        exponent = _growth_exponent(trace.steps)
        summary["growth_exponent"] = None if exponent is None else _jnum(exponent)
        summary["diverging"] = bool(m.s < 1.0 and trace.stop_reason != "fixed_point")
    print(json.dumps(summary, indent=1, sort_keys=True))
    run.write_json("alternate_summary", summary)
    run.finish()
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    pset = _load(args)
    run = _Run(args)
    p, m = pset.haldane, pset.extinction
    d_max = args.D_max if args.D_max is not None else 10.0 * p.mu_max
    if args.X_star is not None:
        x_star = args.X_star
    else:
        x_star, _ = optimal_X_for_h(p, m, pset.I_s, args.h)
    x_bar = (
        args.X_bar
        if args.X_bar is not None
        else default_x_bar(p, m, pset.I_s, args.h, x_star, d_max)
    )
    cfg = ControlConfig(X_star=x_star, D_max=d_max, X_bar=x_bar)
    trace = simulate_closed_loop(cfg, p, m, pset.I_s, args.X0, args.h, args.t_end)
    rows = [
        [float(trace.t[i]), float(trace.X[i]), float(trace.D[i]),
         float(trace.mu_bar[i]), float(trace.Phi[i]), float(trace.Pi[i])]
        for i in range(trace.t.size)
    ]
    run.write_table(
        "simulate_trace",
        ["t_d", "X_g_per_m3", "D_per_d", "mu_bar_per_d", "Phi", "Pi"],
        rows,
    )
    t_conv = convergence_time(trace, x_star, band=1e-3)
    summary = {
        "X0": _jnum(args.X0),
        "h_m": _jnum(args.h),
        "t_end_d": _jnum(args.t_end),
        "X_star": _jnum(x_star),
        "X_bar": _jnum(x_bar),
        "D_max_per_d": _jnum(d_max),
        "band_rel": 0.001,
        "convergence_time_d": None if t_conv is None else _jnum(t_conv),
        "final_X": _jnum(float(trace.X[-1])),
        "final_D": _jnum(float(trace.D[-1])),
    }
    print(json.dumps(summary, indent=1, sort_keys=True))
    run.write_json("simulate_summary", summary)
    run.finish()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--params", help="parameter file (flat TOML)")
    source.add_argument(
        "--preset",
        default="table1-R-x10",
        choices=PRESET_NAMES,
        help="bundled parameter set (default: table1-R-x10)",
    )
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument(
        "--format", choices=("csv", "json"), default="csv",
        help="table output format (default: csv)",
    )

    parser = argparse.ArgumentParser(
        prog="pbropt",
        description="Optimal operating points and dilution control for "
        "light-limited microalgae photobioreactors",
    )
    parser.add_argument("--version", action="version", version=f"pbropt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_yopt = sub.add_parser("yopt", parents=[common], help="closed-form optimal optical depth")
    p_yopt.add_argument("--I-s", dest="I_s", type=float, help="surface light override")
    p_yopt.add_argument("--scan", action="store_true", help="add brute-force grid argmax")
    p_yopt.add_argument("--scan-y-max", type=float, default=30.0)
    p_yopt.add_argument("--scan-step", type=float, default=1e-5)
    p_yopt.set_defaults(func=cmd_yopt)

    p_sweep = sub.add_parser("sweep", parents=[common], help="tabulate productivity curves")
    p_sweep.add_argument("kind", choices=SWEEP_KINDS)
    p_sweep.add_argument("--lo", type=float, help="range start (kind-specific default)")
    p_sweep.add_argument("--hi", type=float, help="range end (kind-specific default)")
    p_sweep.add_argument("--n", type=int, help="grid points (kind-specific default)")
    p_sweep.add_argument("--X", type=float, help="fixed biomass [g/m^3] where applicable")
    p_sweep.add_argument("--h", type=float, help="fixed depth [m] where applicable")
    p_sweep.add_argument("--h-lo", type=float, default=0.01, help="Pi_surface depth start")
    p_sweep.add_argument("--h-hi", type=float, default=1.0, help="Pi_surface depth end")
    p_sweep.add_argument("--h-n", type=int, default=100, help="Pi_surface depth points")
    p_sweep.add_argument("--s-values", help="comma list of exponents for eps_of_X")
    p_sweep.add_argument("--alpha1-values", help="comma list of turbidities for Pi_vs_alpha1")
    p_sweep.set_defaults(func=cmd_sweep)

    p_opt = sub.add_parser("optimize", parents=[common], help="directional optimum")
    target = p_opt.add_mutually_exclusive_group(required=True)
    target.add_argument("--X", type=float, help="optimize depth for this biomass")
    target.add_argument("--h", type=float, help="optimize biomass for this depth")
    p_opt.set_defaults(func=cmd_optimize)

    p_alt = sub.add_parser(
        "alternate", parents=[common], help="alternating depth/concentration optimization"
    )
    p_alt.add_argument("--X0", type=float, default=50.0, help="starting biomass [g/m^3]")
    p_alt.add_argument("--n-max", type=int, default=10_000)
    p_alt.add_argument(
        "--h-min", help="depth floor in m, or raceway/tubular/biofilm"
    )
    p_alt.set_defaults(func=cmd_alternate)

    p_sim = sub.add_parser("simulate", parents=[common], help="closed-loop dilution control")
    p_sim.add_argument("--X0", type=float, default=50.0, help="initial biomass [g/m^3]")
    p_sim.add_argument("--h", type=float, default=0.1, help="reactor depth [m]")
    p_sim.add_argument("--t-end", type=float, default=30.0, help="horizon [d]")
    p_sim.add_argument("--D-max", dest="D_max", type=float, help="max dilution [1/d]")
    p_sim.add_argument("--X-star", dest="X_star", type=float, help="target biomass")
    p_sim.add_argument("--X-bar", dest="X_bar", type=float, help="saturation threshold")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        ParameterFileError,
        ConfigError,
        InfeasibleRespiration,
        DegenerateRange,
        DomainError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergence, StepUnderflow, BracketMiss, InvalidBracket) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
