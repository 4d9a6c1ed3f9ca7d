"""Command-line entry point: ``qreset simulate | sweep | purcell``.

Model parameters are dimensionless, in units of the primary coupling (g, or
g~ for the ``ibm`` model). Physical frequencies are ordinary frequencies
(``10MHz`` means g/2pi = 10 MHz) and pass through 2*pi only at this boundary.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import io
from .config import RunConfig, load_config, validate
from .engine import IntegrationError, integrate
from .metrics import APPROACHES, PULSED, STEADY, detect_pulsed, detect_steady
from .purcell import PurcellQuery, effective_decay, purcell_time, required_detuning
from .sweep import ModelFamily, find_optimum, refine_optimum, sweep
from .validation import ConfigError

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

# flag dest -> model parameter name
PARAM_FLAGS = {"gamma": "gamma", "lam": "lambda", "kappa": "kappa", "omega": "omega",
               "alpha": "alpha", "delta_q": "delta_q", "delta_c": "delta_c",
               "n_cavity": "n_cavity", "n_transmon": "n_transmon"}
RUN_FLAGS = ("model", "approach", "threshold", "horizon", "coupling_freq", "workers", "out")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file; flags override its values")
    p.add_argument("--model", choices=["two_qubit", "two_qubit_cavity", "ibm"])
    p.add_argument("--gamma", type=float, help="auxiliary-qubit decay gamma/g")
    p.add_argument("--lambda", dest="lam", type=float, help="qubit-cavity coupling lambda/g")
    p.add_argument("--kappa", type=float, help="cavity decay kappa/g")
    p.add_argument("--omega", type=float, help="drive amplitude Omega/g~ (ibm)")
    p.add_argument("--alpha", type=float, help="anharmonicity alpha/g~ (ibm)")
    p.add_argument("--delta-q", type=float, help="transmon detuning delta_q/g~ (ibm)")
    p.add_argument("--delta-c", type=float,
                   help="cavity detuning delta_c/g~ (ibm); default is the f0-g1 resonance")
    p.add_argument("--n-cavity", type=int, help="highest cavity Fock level kept")
    p.add_argument("--n-transmon", type=int, help="transmon levels kept (ibm)")
    p.add_argument("--approach", choices=APPROACHES)
    p.add_argument("--threshold", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--coupling-freq",
                   help="physical coupling as an ordinary frequency, e.g. 67MHz, for ns reports")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output path stem; writes <out>.csv and <out>.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qreset", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate one configuration and report reset times")
    _add_run_flags(sim)

    sw = sub.add_parser("sweep", help="reset time over a 1-D or 2-D parameter grid")
    _add_run_flags(sw)
    sw.add_argument("--axis1", metavar="NAME:LO:HI:COUNT")
    sw.add_argument("--axis2", metavar="NAME:LO:HI:COUNT")
    sw.add_argument("--refine", type=int, nargs="?", const=2, metavar="PASSES",
                    help="refinement passes around the optimum (default 2 when given bare)")

    pu = sub.add_parser(
        "purcell", help="closed-form Purcell estimates",
        description="Bare numbers are in units of g. A frequency suffix (Hz, kHz, MHz, GHz) "
                    "marks an ordinary frequency nu, converted to an angular rate 2*pi*nu; "
                    "times accept s, ms, us, ns. Physical and dimensionless inputs cannot be "
                    "mixed.")
    pu.add_argument("--detuning", help="qubit detuning Delta")
    pu.add_argument("--g", help="coupling g")
    pu.add_argument("--rate", help="induced decay rate gamma")
    pu.add_argument("--lambda", dest="lam", help="resonant coupling lambda (for Gamma_eff)")
    pu.add_argument("--kappa", help="cavity decay kappa (for Gamma_eff)")
    pu.add_argument("--t-target", help="target Purcell time, for the required detuning")
    pu.add_argument("--compare-detuning",
                    help="a quoted detuning to check against the required one")
    pu.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def _overrides(args) -> dict:
    over = {k: getattr(args, k) for k in RUN_FLAGS if getattr(args, k, None) is not None}
    params = {PARAM_FLAGS[k]: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k) is not None}
    if params:
        over["params"] = params
    axes = [a for a in (getattr(args, "axis1", None), getattr(args, "axis2", None)) if a is not None]
    if axes:
        over["axes"] = axes
    if getattr(args, "refine", None) is not None:
        over["refine"] = args.refine
    return over


def resolve_config(args) -> RunConfig:
    over = _overrides(args)
    if args.config:
        return load_config(args.config, over)
    return validate(over)


def _paths(out: str) -> tuple[Path, Path]:
    stem = Path(out)
    if stem.suffix in (".csv", ".json"):
        stem = stem.with_suffix("")
    stem.parent.mkdir(parents=True, exist_ok=True)
    return stem.with_name(stem.name + ".csv"), stem.with_name(stem.name + ".json")


def _family(cfg: RunConfig) -> ModelFamily:
    return ModelFamily(cfg.model, dict(cfg.params))


def cmd_simulate(cfg: RunConfig) -> dict:
    """Integrate to the horizon, write ``t,pg`` CSV and a JSON summary; returns the summary."""
    model = _family(cfg).build()
    traj = integrate(model, cfg.horizon, cfg.sample_dt, atol=cfg.atol, rtol=cfg.rtol)
    outcomes = {PULSED: detect_pulsed(traj, cfg.threshold),
                STEADY: detect_steady(traj, cfg.threshold, cfg.horizon)}
    summary = {"config": cfg.to_dict(), "threshold": cfg.threshold}
    for name, o in outcomes.items():
        rec = io.outcome_record(o)
        if cfg.coupling_hz is not None:
            rec["ns"] = io.ns_report(cfg.model, o.t_stop, cfg.coupling_hz)
        summary[name] = rec
    csv_path, json_path = _paths(cfg.out)
    io.write_trajectory_csv(csv_path, traj)
    io.write_json(json_path, summary)
    return summary


def cmd_sweep(cfg: RunConfig) -> dict:
    """Evaluate the grid, write the cell CSV and a JSON sidecar with the optimum."""
    if not 1 <= len(cfg.axes) <= 2:
        raise ConfigError("a sweep needs one or two axes (--axis1, --axis2)", "axes")
    family = _family(cfg)
    opts = dict(sample_dt=cfg.sample_dt, atol=cfg.atol, rtol=cfg.rtol, workers=cfg.workers)
    grid = sweep(family, cfg.parsed_axes(), cfg.approach, cfg.threshold, cfg.horizon, **opts)
    summary = {"config": cfg.to_dict(), "threshold": cfg.threshold, "approach": cfg.approach,
               "counts": {s: int((grid.status_array() == s).sum()) for s in ("ok", "unreset", "error")}}
    try:
        best = find_optimum(grid)
    except ValueError:
        best = None
    summary["optimum"] = io.optimum_record(best)
    summary["refinement"] = None
    final = best
    if best is not None and cfg.refine > 0:
        refined, last = refine_optimum(family, grid, best, passes=cfg.refine, **opts)
        summary["refinement"] = {
            "passes": cfg.refine, "optimum": io.optimum_record(refined),
            "axes": {ax.name: [ax.lo, ax.hi] for ax in last.axes},
            "step": {ax.name: (ax.hi - ax.lo) / (len(ax) - 1) for ax in last.axes}}
        final = refined
    if final is not None and cfg.coupling_hz is not None:
        summary["ns"] = io.ns_report(cfg.model, final.t_stop, cfg.coupling_hz)
    csv_path, json_path = _paths(cfg.out)
    io.write_sweep_csv(csv_path, grid)
    io.write_json(json_path, summary)
    return summary


# purcell ------------------------------------------------------------------

def _purcell_inputs(args) -> tuple[dict, bool]:
    """Parse purcell flags into one unit system; returns (values, physical)."""
    freq_names = ("detuning", "g", "rate", "lam", "kappa", "compare_detuning")
    parsed = {}
    for name in freq_names:
        text = getattr(args, name)
        if text is not None:
            parsed[name] = io.parse_quantity(text, io.FREQ_UNITS)
    if args.t_target is not None:
        parsed["t_target"] = io.parse_quantity(args.t_target, io.TIME_UNITS)
    kinds = {scale is not None for _, scale in parsed.values()}
    if len(kinds) > 1:
        raise ValueError("mix of values with and without units; give all quantities with unit "
                         "suffixes or all as multiples of g")
    physical = kinds == {True}
    values = {}
    for name, (v, scale) in parsed.items():
        if not physical:
            values[name] = v
        elif name == "t_target":
            values[name] = v * scale
        else:
            values[name] = 2 * math.pi * v * scale
    return values, physical


def cmd_purcell(args) -> dict:
    v, physical = _purcell_inputs(args)
    report = {"units": "SI (rad/s, s)" if physical else "dimensionless (units of g)"}
    rate = v.get("rate")
    if "lam" in v or "kappa" in v:
        if "lam" not in v or "kappa" not in v:
            raise ValueError("Gamma_eff needs both --lambda and --kappa")
        report["gamma_eff"] = effective_decay(v["lam"], v["kappa"])
        if rate is None:
            rate = report["gamma_eff"]
    if "detuning" in v:
        if "g" not in v or rate is None:
            raise ValueError("T_Purcell needs --detuning, --g and --rate (or --lambda/--kappa)")
        q = PurcellQuery(v["detuning"], v["g"], rate)
        t = purcell_time(q)
        report["t_purcell"] = t
        report["round_trip_detuning"] = required_detuning(t, q.coupling, q.induced_rate)
    if "t_target" in v:
        if "g" not in v or rate is None:
            raise ValueError("the required detuning needs --t-target, --g and --rate")
        delta = required_detuning(v["t_target"], v["g"], rate)
        report["required_detuning"] = delta
        if physical:
            report["required_detuning_hz"] = delta / (2 * math.pi)
        if "compare_detuning" in v:
            claimed = v["compare_detuning"]
            rel = abs(claimed - delta) / delta
            report["compare"] = {"claimed": claimed, "relative_difference": rel,
                                 "discrepancy": rel > 0.01}
            if physical:
                # would the quoted value match if it were an angular rate written as a frequency?
                report["compare"]["relative_difference_if_angular"] = \
                    abs(claimed / (2 * math.pi) - delta) / delta
    if len(report) == 1:
        raise ValueError("nothing to compute; see --help")
    return report


def _print_purcell(report: dict) -> None:
    labels = [("t_purcell", "T_Purcell"), ("gamma_eff", "Gamma_eff"),
              ("round_trip_detuning", "Delta (round trip)"),
              ("required_detuning", "required Delta"), ("required_detuning_hz", "required Delta/2pi [Hz]")]
    print(f"{'quantity':<26}value  [{report['units']}]")
    for key, label in labels:
        if key in report:
            print(f"{label:<26}{io.fmt(report[key])}")
    if "compare" in report:
        c = report["compare"]
        flag = "DISCREPANCY" if c["discrepancy"] else "consistent"
        print(f"{'quoted Delta':<26}{io.fmt(c['claimed'])}  relative difference "
              f"{c['relative_difference']:.3g} ({flag})")
        if "relative_difference_if_angular" in c:
            print(f"{'':<26}if quoted as angular: relative difference "
                  f"{c['relative_difference_if_angular']:.3g}")


def _summary_line(summary: dict) -> str:
    parts = []
    for name in (PULSED, STEADY):
        if name in summary:
            o = summary[name]
            parts.append(f"{name}: {o['status']}" + (f" t_stop={o['t_stop']:.6g}" if o["t_stop"] is not None else ""))
    return ", ".join(parts)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "purcell":
            report = cmd_purcell(args)
            if args.json:
                print(json.dumps(report, indent=2, sort_keys=True))
            else:
                _print_purcell(report)
            return EXIT_OK
        cfg = resolve_config(args)
        if args.command == "simulate":
            summary = cmd_simulate(cfg)
            print(_summary_line(summary))
        else:
            summary = cmd_sweep(cfg)
            opt = (summary["refinement"] or {}).get("optimum") or summary["optimum"]
            print("optimum: " + (json.dumps(opt, sort_keys=True) if opt else "none (no cell reset)"))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed at t={exc.time:.6g}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
