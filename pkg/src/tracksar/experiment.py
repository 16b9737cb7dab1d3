"""
Experiment descriptions, named presets and the pipeline that turns them
into report files.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import reports
from .adc_model import AdcConfig, Mode
from .bounds import StepPolicy
from .energy import EnergyModelParams, energy_report
from .engine import run
from .metrics import dnl_inl, spectrum
from .signals import coherent_cycles_for_osr, from_csv, gen_ramp, gen_sine

ANALYSES = ("trace", "energy", "spectrum", "linearity")
FORMATS = ("csv", "json")


class AnalysisError(RuntimeError):
    """Failure inside one analysis stage; the message names the stage."""


@dataclass(frozen=True)
class StimulusSpec:
    kind: str = "sine"
    count: int = 4096
    amplitude: float | None = None  # default: vref/2
    offset: float | None = None  # default: vref/2
    frequency: float | None = None
    cycles: int | None = None  # coherent cycle count; default derived from osr
    phase: float = 0.0
    v_start: float | None = None
    v_end: float | None = None
    path: str | None = None
    sample_rate: float | None = None  # default: config.max_sample_rate

    def build(self, config: AdcConfig):
        fs = self.sample_rate or config.max_sample_rate
        if self.kind == "sine":
            amp = config.vref / 2 if self.amplitude is None else self.amplitude
            off = config.vref / 2 if self.offset is None else self.offset
            if self.frequency is not None:
                return gen_sine(amp, self.frequency, fs, self.phase, off, self.count)
            cycles = self.cycles or coherent_cycles_for_osr(config.osr, self.count)
            return gen_sine(amp, None, fs, self.phase, off, self.count, coherent_cycles=cycles)
        if self.kind == "ramp":
            lo = 0.0 if self.v_start is None else self.v_start
            hi = config.vref if self.v_end is None else self.v_end
            return gen_ramp(lo, hi, self.count, fs)
        if self.kind == "csv":
            if not self.path:
                raise ValueError("csv stimulus needs a path")
            return from_csv(self.path, fs)
        raise ValueError(f"unknown stimulus kind {self.kind!r}")

    def to_dict(self):
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


@dataclass(frozen=True)
class ExperimentSpec:
    config: AdcConfig
    stimulus: StimulusSpec
    analyses: tuple = ("energy",)
    output_dir: Path = Path("tracksar-out")
    formats: tuple = ("json",)
    trace: bool = False
    energy_params: EnergyModelParams = field(default_factory=EnergyModelParams)
    window: str = "rectangular"
    fft_size: int | None = None
    linearity_stimulus: str | None = None

    def __post_init__(self):
        if not self.analyses:
            raise ValueError("at least one analysis is required")
        bad = set(self.analyses) - set(ANALYSES)
        if bad:
            raise ValueError(f"unknown analyses: {', '.join(sorted(bad))}")
        bad = set(self.formats) - set(FORMATS)
        if bad or not self.formats:
            raise ValueError(f"formats must be a non-empty subset of {FORMATS}")

    def describe(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "stimulus": self.stimulus.to_dict(),
            "analyses": list(self.analyses),
            "energy_params": self.energy_params.to_dict(),
            "window": self.window,
            "fft_size": self.fft_size,
        }


def _table2(osr, policy):
    return {
        "config": {"mode": Mode.TRACKING, "osr": osr, "step_policy": policy},
        "stimulus": {"kind": "sine", "count": 4096},
        "analyses": ("energy",),
    }


# Each preset pins what is needed to reproduce one published artifact.
PRESETS = {
    "table2-osr32": _table2(32, StepPolicy.explicit(32)),
    "table2-osr64": _table2(64, StepPolicy.coverage()),
    "table2-osr256": _table2(256, StepPolicy.coverage()),
    "fig2": {
        "config": {"mode": Mode.TRACKING, "osr": 64, "step_policy": StepPolicy.coverage()},
        "stimulus": {"kind": "sine", "count": 4096},
        "analyses": ("spectrum",),
    },
}


@dataclass
class Outcome:
    summary: str
    files: list
    results: dict


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, RuntimeError) as exc:
        raise AnalysisError(f"{name}: {exc}") from exc


def execute(spec: ExperimentSpec) -> Outcome:
    """Run the stimulus through the converter and write every requested report."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    head = spec.describe()
    files = []
    results = {}

    wave = _stage("signals", spec.stimulus.build, spec.config)
    want_trace = spec.trace or "trace" in spec.analyses
    res = _stage("engine", run, wave, spec.config, trace=want_trace)
    results["run"] = res

    if "json" in spec.formats:
        files.append(reports.write_json(out / "records.json", {
            **head, "records": reports.records_json(res, with_traces=want_trace)}))
    if "csv" in spec.formats:
        files.append(reports.write_csv(out / "records.csv", reports.record_rows(res)))

    line = [f"mode={spec.config.mode.value}", f"samples={len(res)}"]
    steady = res.steady_cycles
    line.append(f"cycles/sample={float(np.mean(steady)) if len(steady) else float('nan'):g}")
    line.append(f"overloads={int(res.overload[1:].sum() if spec.config.mode is Mode.TRACKING else res.overload.sum())}")

    if "energy" in spec.analyses:
        rep = _stage("energy", energy_report, res, spec.energy_params)
        results["energy"] = rep
        if "json" in spec.formats:
            files.append(reports.write_json(out / "energy.json", {**head, **rep.to_dict()}))
        if "csv" in spec.formats:
            files.append(reports.write_csv(out / "energy.csv", reports.energy_rows(rep)))
        line.append(f"energy/sample={rep.per_sample_avg * 1e12:.4g}pJ")

    if "spectrum" in spec.analyses:
        sp = _stage("metrics", spectrum, res.codes, wave.sample_rate, spec.window,
                    spec.fft_size, bits=spec.config.bits)
        results["spectrum"] = sp
        if "json" in spec.formats:
            files.append(reports.write_json(out / "spectrum.json", {**head, **sp.to_dict()}))
        if "csv" in spec.formats:
            files.append(reports.write_csv(out / "spectrum.csv", sp.csv_rows()))
        line.append(f"enob={sp.enob_bits:.3f}")
        line.append(f"sfdr={sp.sfdr_db:.2f}dB")

    if "linearity" in spec.analyses:
        kind = spec.linearity_stimulus or ("ramp" if spec.stimulus.kind == "ramp" else "sine")
        lin = _stage("metrics", dnl_inl, res.codes, spec.config.bits, kind)
        results["linearity"] = lin
        if "json" in spec.formats:
            files.append(reports.write_json(out / "linearity.json", {**head, **lin.to_dict()}))
        if "csv" in spec.formats:
            files.append(reports.write_csv(out / "linearity.csv", reports.linearity_rows(lin)))
        line.append(f"max_dnl={lin.max_dnl:.3f}")
        line.append(f"max_inl={lin.max_inl:.3f}")

    if "json" not in spec.formats:
        # CSV files cannot carry the configuration themselves
        files.append(reports.write_json(out / "manifest.json", head))
    return Outcome(" ".join(line), files, results)
