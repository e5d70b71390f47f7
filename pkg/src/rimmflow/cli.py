"""Command-line front end: ``python -m rimmflow <command> [flags]``.

Commands write plot-ready CSV and JSON into ``--out`` (default
``rimmflow_out``, or ``$RIMMFLOW_OUT`` when set).  Every CSV starts with a
``# config_sha256=...`` comment followed by a header row.

Exit codes: 0 success, 1 verification failures, 2 Newton did not converge,
3 invalid configuration, 4 spectral gap violated, 5 no bracket while
tracing, 6 time integration blew up.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BlowUp, GapViolation, LostPositivity, NoBracket, NoConvergence
from .evolve import evolve, perturbed_state
from .hopf import curve_csv, fitted_slope, trace_E2
from .linear import spectrum, spectrum_csv
from .perturbation import VARIANTS, e2_asymptotic, e2_slope, hessian_model
from .spectral import Params, rescale_physical
from .steady import mean_mass, solve_steady, steady_csv, taylor_steady

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CONFIG = 3
EXIT_GAP = 4
EXIT_NO_BRACKET = 5
EXIT_BLOWUP = 6

COMMANDS = ("steady", "spectrum", "trace", "evolve", "verify")
DEFAULT_OUT = "rimmflow_out"

DEFAULTS = {
    "b": 1.0, "eps1": 0.0, "eps2": 0.0,
    "beta": None, "gamma": None, "delta": None,
    "n_max": 32, "tol": 1e-12,
    "dt": 1e-3, "t_end": 50.0, "amplitude": 1e-3, "phase": None, "max_periods": 40,
    "grid_start": 0.0025, "grid_stop": 0.02, "grid_count": 4,
    "variant": "published", "seed": 0, "quick": False, "golden": None,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: Params
    physical: tuple[float, float, float] | None
    n_max: int = 32
    tol: float = 1e-12
    dt: float = 1e-3
    t_end: float = 50.0
    amplitude: float = 1e-3
    phase: float | None = None
    max_periods: int | None = 40
    grid: tuple[float, ...] = ()
    variant: str = "published"
    seed: int = 0
    quick: bool = False
    golden: str | None = None
    out: str = DEFAULT_OUT
    extra: dict = field(default_factory=dict, compare=False)

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        d.pop("out")
        d["params"] = self.params.as_dict()
        return d

    def sha256(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rimmflow",
        description="Steady states, spectra, Hopf curve and time integration for rimming flow.",
        epilog="Flags override values from --config; the output directory defaults to "
               "$RIMMFLOW_OUT or ./rimmflow_out.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with flag values (keys use underscores)")
    common.add_argument("--out", help="output directory")
    g = common.add_argument_group("parameters")
    g.add_argument("--b", type=float, help="surface-tension parameter (default 1)")
    g.add_argument("--eps1", type=float, help="gravity parameter (default 0)")
    g.add_argument("--eps2", type=float, help="inertia parameter (default 0)")
    g.add_argument("--beta", type=float, help="physical surface tension (with --gamma, --delta)")
    g.add_argument("--gamma", type=float, help="physical inertia")
    g.add_argument("--delta", type=float, help="physical film thickness ratio")
    g.add_argument("--n-max", dest="n_max", type=int, help="Fourier truncation N (default 32)")
    g.add_argument("--tol", type=float, help="Newton / root tolerance (default 1e-12)")
    g.add_argument("--seed", type=int, help="seed for random perturbation phases (default 0)")

    sub.add_parser("steady", parents=[common], help="steady state and Taylor comparison")
    sub.add_parser("spectrum", parents=[common], help="linearized spectrum and leading pair")

    p_trace = sub.add_parser("trace", parents=[common], help="trace the Hopf curve E2(eps1)")
    p_trace.add_argument("--grid-start", dest="grid_start", type=float, help="first eps1 (default 0.0025)")
    p_trace.add_argument("--grid-stop", dest="grid_stop", type=float, help="last eps1 (default 0.02)")
    p_trace.add_argument("--grid-count", dest="grid_count", type=int,
                         help="number of eps1 values, geometric spacing (default 4)")
    p_trace.add_argument("--variant", choices=VARIANTS, help="closed-form coefficient set (default published)")

    p_evolve = sub.add_parser("evolve", parents=[common], help="time integration from a perturbed steady state")
    p_evolve.add_argument("--dt", type=float, help="time step (default 1e-3)")
    p_evolve.add_argument("--t-end", dest="t_end", type=float, help="final time (default 50)")
    p_evolve.add_argument("--amplitude", type=float, help="perturbation amplitude (default 1e-3)")
    p_evolve.add_argument("--phase", type=float, help="perturbation phase; drawn from --seed when absent")
    p_evolve.add_argument("--max-periods", dest="max_periods", type=int,
                          help="stop after this many signal periods; 0 disables (default 40)")

    p_verify = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p_verify.add_argument("--quick", action="store_true", default=None, help="fast subset")
    p_verify.add_argument("--golden", help="golden JSON file to compare against")
    return parser


def _grid(start: float, stop: float, count: int) -> tuple[float, ...]:
    if count < 1:
        raise ConfigError("grid is empty")
    if not (start > 0 and stop > 0):
        raise ConfigError("grid values must be positive")
    if count == 1:
        return (float(start),)
    return tuple(float(x) for x in np.geomspace(start, stop, count))


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    """Merge defaults, the ``--config`` file and explicit flags (in that order)."""
    values = dict(DEFAULTS)
    explicit = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config")}
    file_values: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_values = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_values) - set(DEFAULTS) - {"out"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    values.update(file_values)
    values.update(explicit)

    given = set(file_values) | set(explicit)
    phys_keys = {"beta", "gamma", "delta"} & given
    param_keys = {"b", "eps1", "eps2"} & given
    if phys_keys and param_keys:
        raise ConfigError("give either (b, eps1, eps2) or (beta, gamma, delta), not both")
    physical = None
    try:
        if phys_keys:
            if phys_keys != {"beta", "gamma", "delta"}:
                raise ConfigError("physical parameters need all of beta, gamma, delta")
            physical = (float(values["beta"]), float(values["gamma"]), float(values["delta"]))
            params = rescale_physical(*physical)
        else:
            params = Params(float(values["b"]), float(values["eps1"]), float(values["eps2"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if int(values["n_max"]) < 8:
        raise ConfigError("n_max must be at least 8")
    for key in ("tol", "dt", "t_end", "amplitude"):
        if not float(values[key]) > 0:
            raise ConfigError(f"{key} must be positive")
    if not all(math.isfinite(x) for x in (params.b, params.eps1, params.eps2)):
        raise ConfigError("parameters must be finite")
    grid = ()
    if args.command == "trace":
        grid = _grid(float(values["grid_start"]), float(values["grid_stop"]), int(values["grid_count"]))
    mp = values["max_periods"]
    out = values.get("out") or environ.get("RIMMFLOW_OUT") or DEFAULT_OUT
    if "out" in explicit:
        out = explicit["out"]
    return RunConfig(
        command=args.command,
        params=params,
        physical=physical,
        n_max=int(values["n_max"]),
        tol=float(values["tol"]),
        dt=float(values["dt"]),
        t_end=float(values["t_end"]),
        amplitude=float(values["amplitude"]),
        phase=None if values["phase"] is None else float(values["phase"]),
        max_periods=None if not mp else int(mp),
        grid=grid,
        variant=str(values["variant"]),
        seed=int(values["seed"]),
        quick=bool(values["quick"]),
        golden=values["golden"],
        out=str(out),
    )


# -- output helpers ------------------------------------------------------------------


def _outdir(cfg: RunConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path: Path, cfg: RunConfig, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_sha256={cfg.sha256()}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_json(path: Path, cfg: RunConfig, payload: dict) -> None:
    doc = {"config_sha256": cfg.sha256(), "config": cfg.canonical(), **payload}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"not serializable: {type(x).__name__}")


# -- commands ------------------------------------------------------------------------


def _echo(cfg: RunConfig) -> None:
    p = cfg.params
    src = "" if cfg.physical is None else " (from beta={:g} gamma={:g} delta={:g})".format(*cfg.physical)
    print(f"params b={p.b:g} eps1={p.eps1:g} eps2={p.eps2:g}{src}", flush=True)


def run_steady(cfg: RunConfig) -> int:
    _echo(cfg)
    s = solve_steady(cfg.params, tol=cfg.tol, n_max=cfg.n_max)
    taylor = taylor_steady(cfg.params, cfg.n_max)
    e1, e2 = cfg.params.eps
    out = _outdir(cfg)
    write_csv(out / "steady.csv", cfg, ["theta", "H"], steady_csv(s))
    summary = s.summary()
    summary["taylor_l2_difference"] = (s.H - taylor).l2_norm()
    summary["mean_mass_expansion"] = 1 + e1 * e1 / 6 + e1 * e2 / 6
    summary["mean_mass_difference"] = abs(mean_mass(s) - summary["mean_mass_expansion"])
    write_json(out / "steady.json", cfg, {"steady": summary})
    print(f"residual {s.residual_norm:.3e} after {s.newton_iters} Newton steps; "
          f"mean mass {mean_mass(s):.12g}; min height {s.min_height:.6g}")
    print(f"|H - Taylor| = {summary['taylor_l2_difference']:.3e}")
    return EXIT_OK


def run_spectrum(cfg: RunConfig) -> int:
    _echo(cfg)
    s = solve_steady(cfg.params, tol=cfg.tol, n_max=cfg.n_max)
    rep = spectrum(s)
    out = _outdir(cfg)
    write_csv(out / "spectrum.csv", cfg, ["re", "im"], spectrum_csv(rep))
    pair_err = rep.conjugate_pairing_error()
    status = "unstable" if rep.r > 0 else "stable" if rep.r < 0 else "critical"
    write_json(out / "report.json", cfg, {"spectrum": rep.summary(), "classification": status})
    lp = rep.lambda_plus
    print(f"lambda+ = {lp.real:.6e} {lp.imag:+.12f}i  ({status}{', POSITIVE REAL PART' if rep.r > 0 else ''})")
    print(f"next real part {rep.eigenvalues[2].real:.6g}; gap ok: {rep.gap_ok}")
    print(f"conjugate pairing: {'pass' if pair_err <= 1e-9 else 'FAIL'} ({pair_err:.1e})")
    return EXIT_OK


def run_trace(cfg: RunConfig) -> int:
    _echo(cfg)
    b = cfg.params.b
    out = _outdir(cfg)
    header = ["eps1", "E2_numeric", "E2_asymptotic", "residual", "gap_ok",
              "E2_asym_published", "E2_asym_rederived"]

    def rows(samples):
        return [row + [e2_asymptotic(b, row[0], "published"), e2_asymptotic(b, row[0], "rederived")]
                for row in curve_csv(samples)]

    try:
        samples = trace_E2(b, list(cfg.grid), tol=max(cfg.tol, 1e-12), n_max=cfg.n_max, variant=cfg.variant)
    except NoBracket as exc:
        write_csv(out / "hopf_curve.csv", cfg, header, rows(getattr(exc, "partial", [])))
        raise
    write_csv(out / "hopf_curve.csv", cfg, header, rows(samples))
    model = hessian_model(b, cfg.variant)
    slope_ref = e2_slope(b, cfg.variant)
    summary = {"variant": cfg.variant, "model": dataclasses.asdict(model), "e2_slope_closed_form": slope_ref}
    if len(samples) >= 2:
        slope = fitted_slope(samples)
        summary["fitted_slope"] = slope
        summary["relative_difference"] = abs(slope - slope_ref) / slope_ref
        print(f"fitted slope {slope:.5f} vs closed form ({cfg.variant}) {slope_ref:.5f}: "
              f"relative difference {summary['relative_difference']:.2%}")
    write_json(out / "trace.json", cfg, summary)
    for smp in samples:
        print(f"eps1={smp.eps1:.6g}  E2={smp.e2_numeric:.10g}  asymptote={smp.e2_asymptotic:.6g}")
    return EXIT_OK


def run_evolve(cfg: RunConfig) -> int:
    _echo(cfg)
    s = solve_steady(cfg.params, tol=cfg.tol, n_max=cfg.n_max)
    phase = cfg.phase
    if phase is None:
        phase = float(np.random.default_rng(cfg.seed).uniform(0.0, 2 * math.pi))
    h0 = perturbed_state(s, cfg.amplitude, phase)
    out = _outdir(cfg)
    try:
        tr = evolve(h0, cfg.params, cfg.t_end, cfg.dt, steady=s, max_periods=cfg.max_periods)
    except BlowUp as exc:
        write_json(out / "summary.json", cfg, {"blowup_time": exc.time, "error": str(exc)})
        raise
    write_csv(out / "timeseries.csv", cfg, ["t", "mass", "dist", "signal"], tr.rows())
    rep = spectrum(s, strict=False)
    summary = tr.summary()
    summary.update({"phase": phase, "r_numeric": rep.r,
                    "period_linear": 2 * math.pi / rep.lambda_plus.imag})
    write_json(out / "summary.json", cfg, {"evolve": summary})
    print(f"t_end {tr.times[-1]:g}; mass drift {summary['mass_drift']:.1e}; "
          f"fitted rate {tr.measured_rate:.4e} vs r {rep.r:.4e}")
    cyc = tr.cycle
    print("cycle: none" if cyc is None else
          f"cycle: period {cyc.period:.5f} (linear {summary['period_linear']:.5f}), amplitude {cyc.amplitude:.3e}")
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    from .verify import run_checks

    results = run_checks(quick=cfg.quick, golden=cfg.golden, log=print)
    failed = [r.id for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed")
    if failed:
        print("failed: " + ", ".join(failed))
        return EXIT_FAILED
    return EXIT_OK


RUNNERS = {
    "steady": run_steady,
    "spectrum": run_spectrum,
    "trace": run_trace,
    "evolve": run_evolve,
    "verify": run_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return RUNNERS[cfg.command](cfg)
    except (NoConvergence, LostPositivity) as exc:
        print(f"steady state failed: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except GapViolation as exc:
        print(f"spectral gap violated: {exc}", file=sys.stderr)
        return EXIT_GAP
    except NoBracket as exc:
        print(f"tracing failed: {exc}", file=sys.stderr)
        return EXIT_NO_BRACKET
    except BlowUp as exc:
        print(f"integration blew up at t={exc.time:g}: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
