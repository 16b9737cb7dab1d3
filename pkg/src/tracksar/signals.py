"""
Analog stimulus generation and ingestion.

Voltages are unipolar (0..vref). A full-scale sinusoid is expressed with
``offset = vref/2`` and ``amplitude = vref/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled voltage sequence.

    :param samples: voltages in volts
    :param sample_rate: sampling rate in Hz
    :param meta: free-form description of the source
    """

    samples: np.ndarray
    sample_rate: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be positive and finite, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)


def _check_finite(**params):
    for name, value in params.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value}")


def coherent_frequency(cycles: int, count: int, sample_rate: float) -> float:
    """Frequency placing exactly ``cycles`` periods in ``count`` samples.

    ``cycles`` must be odd and coprime with ``count`` so that every sample
    lands on a distinct phase.
    """
    if cycles < 1 or cycles % 2 == 0:
        raise ValueError(f"coherent cycle count must be odd and positive, got {cycles}")
    if math.gcd(cycles, count) != 1:
        raise ValueError(f"cycles={cycles} and count={count} are not coprime")
    if 2 * cycles >= count:
        raise ValueError("coherent frequency would reach the Nyquist limit")
    return cycles * sample_rate / count


def coherent_cycles_for_osr(osr: int, count: int) -> int:
    """Largest odd cycle count coprime with ``count`` whose tone stays at or
    below the band edge ``sample_rate / (2 * osr)``."""
    j = count // (2 * max(osr, 2))
    if osr <= 1:
        j = count // 4
    if j % 2 == 0:
        j -= 1
    while j >= 1 and math.gcd(j, count) != 1:
        j -= 2
    if j < 1:
        raise ValueError(f"record of {count} samples is too short for osr={osr}")
    return j


def gen_sine(amplitude, frequency=None, sample_rate=1e6, phase=0.0, offset=0.0,
             count=1024, *, coherent_cycles=None) -> Waveform:
    """Sampled cosine ``offset + amplitude*cos(2*pi*frequency*k/sample_rate + phase)``.

    Passing ``coherent_cycles`` (odd, coprime with ``count``) snaps the
    frequency to ``coherent_cycles * sample_rate / count``; ``frequency`` is
    then ignored.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if coherent_cycles is not None:
        frequency = coherent_frequency(coherent_cycles, count, sample_rate)
    if frequency is None:
        raise ValueError("either frequency or coherent_cycles is required")
    _check_finite(amplitude=amplitude, frequency=frequency, sample_rate=sample_rate,
                  phase=phase, offset=offset)
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if frequency < 0 or frequency >= sample_rate / 2:
        raise ValueError(
            f"frequency {frequency} Hz is not below Nyquist ({sample_rate / 2} Hz)")
    k = np.arange(count)
    samples = offset + amplitude * np.cos(2 * np.pi * frequency * k / sample_rate + phase)
    meta = {"kind": "sine", "amplitude": amplitude, "frequency": frequency,
            "phase": phase, "offset": offset, "count": count}
    if coherent_cycles is not None:
        meta["coherent_cycles"] = coherent_cycles
    return Waveform(samples, sample_rate, meta)


def gen_ramp(v_start, v_end, count, sample_rate=1e6) -> Waveform:
    """Linear ramp from ``v_start`` to ``v_end`` inclusive."""
    if count < 2:
        raise ValueError(f"ramp needs at least 2 samples, got {count}")
    _check_finite(v_start=v_start, v_end=v_end)
    samples = np.linspace(v_start, v_end, count)
    return Waveform(samples, sample_rate,
                    {"kind": "ramp", "v_start": v_start, "v_end": v_end, "count": count})


def from_csv(path, sample_rate) -> Waveform:
    """Read one decimal voltage per line; a single non-numeric first line is
    treated as a header."""
    path = Path(path)
    values = []
    header = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                value = float(line)
            except ValueError:
                if lineno == 1 and not _looks_numeric(line):
                    header = line
                    continue
                raise ValueError(f"{path}: line {lineno}: cannot parse {line!r} as a voltage") from None
            if not math.isfinite(value):
                raise ValueError(f"{path}: line {lineno}: non-finite value {line!r}")
            values.append(value)
    if not values:
        if header is not None:
            # a lone non-numeric line is bad data, not a header
            raise ValueError(f"{path}: line 1: cannot parse {header!r} as a voltage")
        raise ValueError(f"{path}: no samples")
    return Waveform(np.array(values), sample_rate, {"kind": "csv", "path": str(path)})


def _looks_numeric(text):
    return any(ch.isdigit() for ch in text)
