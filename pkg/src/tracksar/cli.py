"""
Command-line front end.

Subcommands: bounds, simulate, sweep, spectrum, energy.
Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import reports
from .adc_model import AdcConfig, ConfigError, Mode, parse_config_text
from .bounds import StepPolicy, max_delta_approx, max_delta_codes, max_delta_exact, initial_step
from .energy import Accounting, EnergyModelParams, sweep_energy_vs_osr, tracking_trend_ok
from .engine import cycles_for
from .experiment import PRESETS, AnalysisError, ExperimentSpec, StimulusSpec, execute
from .metrics import spectrum

SEED_ENV = "TRACKSAR_SEED"


def _common_flags(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", metavar="PATH", default=d(None), help="flat key=value config file")
    p.add_argument("--seed", type=int, default=d(None), help=f"RNG seed (fallback: ${SEED_ENV})")
    p.add_argument("--out", metavar="DIR", default=d("tracksar-out"), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default=d("json"))
    p.add_argument("--trace", action="store_true", default=d(False),
                   help="embed per-cycle traces in JSON records")


def _osr_list(text):
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad OSR list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("OSR list is empty")
    return values


def _config_args(p):
    g = p.add_argument_group("converter")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--mode", choices=[m.value for m in Mode])
    g.add_argument("--osr", type=int)
    g.add_argument("--policy", help="coverage | eq13 | explicit:N")
    g.add_argument("--bits", type=int)
    g.add_argument("--noise-sigma", type=float, dest="comparator_noise_sigma")
    g.add_argument("--comparator-offset", type=float, dest="comparator_offset")
    g.add_argument("--mismatch-sigma", type=float, dest="cap_mismatch_sigma")


def _stimulus_args(p):
    g = p.add_argument_group("stimulus")
    g.add_argument("--stimulus", choices=("sine", "ramp", "csv"))
    g.add_argument("--csv", dest="csv_path", metavar="PATH")
    g.add_argument("--samples", type=int)
    g.add_argument("--amplitude", type=float)
    g.add_argument("--offset", type=float)
    g.add_argument("--frequency", type=float)
    g.add_argument("--cycles", type=int, help="coherent cycle count (odd)")
    g.add_argument("--phase", type=float)
    g.add_argument("--ramp-start", type=float)
    g.add_argument("--ramp-end", type=float)
    g.add_argument("--sample-rate", type=float)


def _energy_args(p):
    g = p.add_argument_group("energy model")
    g.add_argument("--comparator-energy", type=float, help="joules per decision")
    g.add_argument("--logic-energy", type=float, help="joules per cycle")
    g.add_argument("--accounting", choices=[a.value for a in Accounting])


def build_parser():
    parser = argparse.ArgumentParser(prog="tracksar", description=__doc__.strip().splitlines()[0])
    _common_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="print sample-to-sample bounds and initial steps")
    _common_flags(p, suppress=True)
    p.add_argument("--osr", type=_osr_list, required=True)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--policy", default="coverage")
    p.add_argument("--amplitude", type=float, help="volts (default vref/2)")

    for name, help_ in (("simulate", "convert a stimulus and write reports"),
                        ("energy", "convert a stimulus and write the energy report"),
                        ("spectrum", "spectral metrics of a simulated run or a codes file")):
        p = sub.add_parser(name, help=help_)
        _common_flags(p, suppress=True)
        _config_args(p)
        _stimulus_args(p)
        if name != "spectrum":
            _energy_args(p)
        if name == "simulate":
            p.add_argument("--analyses", help="comma list of trace,energy,spectrum,linearity")
        if name != "energy":
            p.add_argument("--window", choices=("rectangular", "hann"))
            p.add_argument("--fft-size", type=int)
        if name == "spectrum":
            p.add_argument("--codes", metavar="PATH", help="analyze codes from a file instead")

    p = sub.add_parser("sweep", help="energy and cycles versus OSR")
    _common_flags(p, suppress=True)
    p.add_argument("--osr", type=_osr_list, required=True, dest="osr_list")
    p.add_argument("--policy", default="table2", help="table2 | coverage | eq13 | explicit:N")
    p.add_argument("--bits", type=int)
    p.add_argument("--samples", type=int, default=4096)
    _energy_args(p)
    return parser


def _resolve_seed(args, config):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return config.rng_seed


def _resolve_config(args, preset=None):
    values = {}
    if preset:
        values.update(PRESETS[preset]["config"])
    if args.config:
        path = Path(args.config)
        values.update(parse_config_text(path.read_text(encoding="utf-8"), str(path)))
    for key in ("bits", "osr", "comparator_noise_sigma", "comparator_offset", "cap_mismatch_sigma"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "mode", None):
        values["mode"] = Mode(args.mode)
    policy = getattr(args, "policy", None)
    if policy and policy != "table2":
        values["step_policy"] = StepPolicy.parse(policy)
    config = AdcConfig(**values)
    return config.replace(rng_seed=_resolve_seed(args, config))


def _energy_params(args):
    kwargs = {}
    if getattr(args, "comparator_energy", None) is not None:
        kwargs["comparator_energy_per_decision"] = args.comparator_energy
    if getattr(args, "logic_energy", None) is not None:
        kwargs["logic_energy_per_cycle"] = args.logic_energy
    if getattr(args, "accounting", None):
        kwargs["accounting"] = Accounting(args.accounting)
    return EnergyModelParams(**kwargs)


def _stimulus(args, preset, parser):
    base = dict(PRESETS[preset]["stimulus"]) if preset else {}
    if args.stimulus:
        base["kind"] = args.stimulus
    if not base:
        parser.error("a stimulus is required (--stimulus or --preset)")
    mapping = {"samples": "count", "amplitude": "amplitude", "offset": "offset",
               "frequency": "frequency", "cycles": "cycles", "phase": "phase",
               "ramp_start": "v_start", "ramp_end": "v_end", "csv_path": "path",
               "sample_rate": "sample_rate"}
    for arg, key in mapping.items():
        v = getattr(args, arg, None)
        if v is not None:
            base[key] = v
    if base.get("kind") == "csv" and not base.get("path"):
        parser.error("--stimulus csv requires --csv PATH")
    if base.get("kind") == "ramp" and "count" not in base:
        base["count"] = 65536
    return StimulusSpec(**base)


def cmd_bounds(args):
    policy = StepPolicy.parse(args.policy)
    amp = args.amplitude if args.amplitude is not None else 0.5
    cols = ("osr", "bits", "policy", "dmax_exact_v", "dmax_approx_v", "dmax_codes",
            "initial", "register", "cycles")
    rows = []
    for m in args.osr:
        step = initial_step(m, args.bits, policy)
        rows.append((m, args.bits, str(policy), f"{max_delta_exact(amp, m):.6f}",
                     f"{max_delta_approx(amp, m):.6f}", max_delta_codes(m, args.bits),
                     step, f"{step:0{args.bits}b}", cycles_for(step)))
    if args.format == "csv":
        sys.stdout.write(reports.csv_text([cols, *rows]))
    else:
        widths = [max(len(str(c)), *(len(str(r[i])) for r in rows)) for i, c in enumerate(cols)]
        print("  ".join(str(c).rjust(w) for c, w in zip(cols, widths)))
        for r in rows:
            print("  ".join(str(v).rjust(w) for v, w in zip(r, widths)))
    return 0


def _spec_from_args(args, parser, analyses):
    preset = getattr(args, "preset", None)
    config = _resolve_config(args, preset)
    stim = _stimulus(args, preset, parser)
    return ExperimentSpec(
        config=config,
        stimulus=stim,
        analyses=analyses,
        output_dir=Path(args.out),
        formats=(args.format,),
        trace=args.trace,
        energy_params=_energy_params(args),
        window=getattr(args, "window", None) or "rectangular",
        fft_size=getattr(args, "fft_size", None),
    )


def cmd_simulate(args, parser):
    if args.analyses:
        analyses = tuple(a.strip() for a in args.analyses.split(",") if a.strip())
    elif args.preset:
        analyses = PRESETS[args.preset]["analyses"]
    else:
        analyses = ("energy",)
    outcome = execute(_spec_from_args(args, parser, analyses))
    print(outcome.summary)
    return 0


def cmd_energy(args, parser):
    outcome = execute(_spec_from_args(args, parser, ("energy",)))
    print(outcome.summary)
    return 0


def cmd_spectrum(args, parser):
    if args.codes:
        codes = reports.read_codes(args.codes)
        bits = args.bits or 8
        fs = args.sample_rate or 1e6
        sp = spectrum(codes, fs, args.window or "rectangular", args.fft_size, bits=bits)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        head = {"source": str(args.codes), "bits": bits, "sample_rate": fs}
        if args.format == "json":
            reports.write_json(out / "spectrum.json", {**head, **sp.to_dict()})
        else:
            reports.write_csv(out / "spectrum.csv", sp.csv_rows())
        print(f"samples={len(codes)} enob={sp.enob_bits:.3f} sndr={sp.sndr_db:.2f}dB "
              f"sfdr={sp.sfdr_db:.2f}dB")
        return 0
    outcome = execute(_spec_from_args(args, parser, ("spectrum",)))
    print(outcome.summary)
    return 0


def cmd_sweep(args):
    config = _resolve_config(args)
    policy = args.policy if args.policy == "table2" else StepPolicy.parse(args.policy)
    rows = sweep_energy_vs_osr(config, args.osr_list, policy, _energy_params(args),
                               min_samples=args.samples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        reports.write_csv(out / "sweep.csv", reports.sweep_rows(rows))
        reports.write_json(out / "manifest.json", {"config": config.to_dict(),
                                                   "policy": str(args.policy),
                                                   "energy_params": _energy_params(args).to_dict()})
    else:
        reports.write_json(out / "sweep.json", {
            "config": config.to_dict(), "policy": str(args.policy),
            "energy_params": _energy_params(args).to_dict(),
            "unit_note": "pJ per sample; acquisition sample excluded",
            "rows": [r.to_dict() for r in rows]})
    sys.stdout.write(reports.csv_text(reports.sweep_rows(rows)))
    ok = tracking_trend_ok(rows)
    if len(args.osr_list) > 1:
        print(f"tracking energy strictly decreasing with OSR: {'PASS' if ok else 'FAIL'}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bounds":
            return cmd_bounds(args)
        if args.command == "simulate":
            return cmd_simulate(args, parser)
        if args.command == "energy":
            return cmd_energy(args, parser)
        if args.command == "spectrum":
            return cmd_spectrum(args, parser)
        if args.command == "sweep":
            return cmd_sweep(args)
    except ConfigError as exc:
        print(f"tracksar: config error: {exc}", file=sys.stderr)
        return 1
    except AnalysisError as exc:
        print(f"tracksar: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"tracksar: error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
