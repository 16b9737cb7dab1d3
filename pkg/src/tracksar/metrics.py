"""
Spectral and static performance of output code streams.

Spectral conventions: the stream is centered on mid-scale, optionally
Hann-windowed (periodic), and transformed with one FFT. ``power`` holds the
one-sided mean-square per bin for bins ``0 .. K/2-1``; the Nyquist bin is
kept apart in ``nyquist_power`` so ``power.sum() + nyquist_power`` equals the
mean square of the windowed stream. The carrier occupies bins ``c +/- w``
and DC bins ``0 .. w``, with ``w = 1`` (rectangular) or ``3`` (Hann).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_FLOOR = 1e-300


@dataclass
class SpectrumReport:
    freq_bins: np.ndarray
    power: np.ndarray
    psd_db: np.ndarray
    nyquist_power: float
    carrier_bin: int
    sndr_db: float
    sfdr_db: float
    thd_db: float
    enob_bits: float
    window: str
    fft_size: int
    sample_rate: float
    fom_j_per_conv: float | None = None
    fom_nyquist_j_per_conv: float | None = None
    settings: dict = field(default_factory=dict)

    def to_dict(self, include_bins=True) -> dict:
        out = {
            "sndr_db": self.sndr_db,
            "sfdr_db": self.sfdr_db,
            "thd_db": self.thd_db,
            "enob_bits": self.enob_bits,
            "carrier_bin": self.carrier_bin,
            "carrier_hz": float(self.freq_bins[self.carrier_bin]),
            "fft_size": self.fft_size,
            "window": self.window,
            "sample_rate": self.sample_rate,
            "fom_j_per_conv": self.fom_j_per_conv,
            "fom_nyquist_j_per_conv": self.fom_nyquist_j_per_conv,
            "settings": self.settings,
        }
        if include_bins:
            out["freq_hz"] = self.freq_bins.tolist()
            out["psd_db"] = self.psd_db.tolist()
        return out

    def csv_rows(self):
        yield ("freq_hz", "psd_db")
        for f, p in zip(self.freq_bins.tolist(), self.psd_db.tolist()):
            yield (repr(f), repr(p))


def _db(x):
    return 10.0 * math.log10(max(x, _FLOOR))


def _window(kind, n):
    kind = kind.lower()
    if kind in ("rect", "rectangular", "none"):
        return np.ones(n), "rectangular", 1
    if kind in ("hann", "hanning"):
        k = np.arange(n)
        return 0.5 - 0.5 * np.cos(2 * np.pi * k / n), "hann", 3
    raise ValueError(f"unknown window {kind!r}")


def _fold(bin_, n):
    bin_ %= n
    return n - bin_ if bin_ > n // 2 else bin_


def spectrum(codes, sample_rate, window="rectangular", fft_size=None, *, bits=8,
             power=None, bandwidth=None) -> SpectrumReport:
    """Periodogram and dynamic metrics (SNDR, SFDR, THD over harmonics 2-5, ENOB).

    :param codes: output codes (fractional values allowed, e.g. decimated)
    :param sample_rate: rate of ``codes`` in Hz
    :param fft_size: power of two <= len(codes); defaults to the largest such
    :param bits: resolution used for mid-scale centering
    :param power: optional converter power (W) for the figure of merit
    :param bandwidth: optional signal bandwidth (Hz) for the figure of merit
    """
    x = np.asarray(codes, dtype=float)
    if fft_size is None:
        if len(x) < 2:
            raise ValueError("need at least 2 samples")
        fft_size = 1 << (len(x).bit_length() - 1)
    if fft_size < 8 or fft_size & (fft_size - 1):
        raise ValueError(f"fft_size must be a power of two >= 8, got {fft_size}")
    if len(x) < fft_size:
        raise ValueError(f"{len(x)} samples is fewer than fft_size={fft_size}")
    x = x[:fft_size] - 2 ** (bits - 1)
    w, wname, guard = _window(window, fft_size)
    xw = x * w

    spec = np.fft.rfft(xw)
    mag2 = np.abs(spec) ** 2 / fft_size ** 2
    half = fft_size // 2
    pwr = mag2[:half].copy()
    pwr[1:] *= 2.0
    nyq = float(mag2[half])

    search = pwr.copy()
    search[: guard + 1] = 0.0
    c = int(np.argmax(search))
    rest = np.delete(search, range(0, guard + 1))
    median = float(np.median(rest)) if len(rest) else 0.0
    # carrier must stand >= 6 dB above the median bin
    if search[c] <= 0.0 or search[c] < 10 ** 0.6 * median:
        raise ValueError("missing carrier: no bin stands 6 dB above the median")

    lo, hi = max(c - guard, guard + 1), min(c + guard, half - 1)
    signal = float(pwr[lo:hi + 1].sum())
    dc = float(pwr[: guard + 1].sum())
    total = float(pwr.sum()) + nyq
    noise_dist = max(total - signal - dc, _FLOOR)
    sndr = _db(signal / noise_dist)

    spur_mask = np.ones(half, dtype=bool)
    spur_mask[: guard + 1] = False
    spur_mask[lo:hi + 1] = False
    spur = float(pwr[spur_mask].max()) if spur_mask.any() else 0.0
    spur = max(spur, nyq)
    sfdr = _db(pwr[c] / spur) if spur > 0 else _db(pwr[c] / _FLOOR)

    harm = 0.0
    for h in range(2, 6):
        hb = _fold(h * c, fft_size)
        if hb <= guard or abs(hb - c) <= guard:
            continue
        if hb == half:
            harm += nyq
            continue
        harm += float(pwr[max(hb - guard, guard + 1):min(hb + guard, half - 1) + 1].sum())
    thd = _db(harm / signal)

    enob = (sndr - 1.76) / 6.02
    psd_db = 10.0 * np.log10(np.maximum(pwr, _FLOOR) / pwr[c])
    freqs = np.arange(half) * sample_rate / fft_size

    fom_sig = fom_nyq = None
    if power is not None and bandwidth is not None:
        fom_sig = fom(power, bandwidth, enob)
        fom_nyq = fom(power, 2 * bandwidth, enob)

    return SpectrumReport(
        freq_bins=freqs, power=pwr, psd_db=psd_db, nyquist_power=nyq, carrier_bin=c,
        sndr_db=sndr, sfdr_db=sfdr, thd_db=thd, enob_bits=enob, window=wname,
        fft_size=fft_size, sample_rate=float(sample_rate),
        fom_j_per_conv=fom_sig, fom_nyquist_j_per_conv=fom_nyq,
        settings={"dc_bins": guard + 1, "carrier_halfwidth_bins": guard,
                  "harmonics": [2, 3, 4, 5], "centering": "mid-scale",
                  "sndr_band": "full Nyquist band, DC excluded"},
    )


def decimate_average(codes, factor: int) -> np.ndarray:
    """Non-overlapping boxcar means of length ``factor``."""
    x = np.asarray(codes, dtype=float)
    if factor < 1 or int(factor) != factor:
        raise ValueError(f"factor must be a positive integer, got {factor}")
    if len(x) % factor:
        raise ValueError(f"length {len(x)} is not divisible by factor {factor}")
    if factor == 1:
        return x.copy()
    return x.reshape(-1, factor).mean(axis=1)


@dataclass
class LinearityReport:
    codes: np.ndarray  # code index for each dnl/inl entry
    dnl_lsb: np.ndarray
    inl_lsb: np.ndarray
    hits: np.ndarray

    @property
    def max_dnl(self) -> float:
        return float(np.max(np.abs(self.dnl_lsb)))

    @property
    def max_inl(self) -> float:
        return float(np.max(np.abs(self.inl_lsb)))

    def to_dict(self):
        return {
            "max_dnl_lsb": self.max_dnl,
            "max_inl_lsb": self.max_inl,
            "codes": self.codes.tolist(),
            "dnl_lsb": self.dnl_lsb.tolist(),
            "inl_lsb": self.inl_lsb.tolist(),
        }


def dnl_inl(codes, bits=8, stimulus="ramp", min_hits=16) -> LinearityReport:
    """Code-density DNL/INL in LSB for inner codes ``1 .. 2**bits - 2``.

    Transition levels come from the cumulative histogram: linear for a ramp,
    ``-cos(pi * cdf)`` for a sinusoid (arcsine density correction). The end
    codes absorb over-range and are excluded.
    """
    c = np.asarray(codes)
    if c.size == 0:
        raise ValueError("empty code record")
    n_codes = 2 ** bits
    hits = np.bincount(c.astype(np.int64), minlength=n_codes)[:n_codes]
    starved = np.flatnonzero(hits < min_hits)
    if starved.size:
        shown = ", ".join(str(k) for k in starved[:20])
        more = "" if starved.size <= 20 else f" (+{starved.size - 20} more)"
        raise ValueError(f"insufficient histogram hits (<{min_hits}) at codes: {shown}{more}")
    cdf = np.cumsum(hits) / hits.sum()
    if stimulus == "ramp":
        transitions = cdf[:-1]
    elif stimulus == "sine":
        transitions = -np.cos(np.pi * cdf[:-1])
    else:
        raise ValueError(f"unknown stimulus kind {stimulus!r}")
    # transitions[k-1] is the lower edge of code k, k = 1 .. n_codes-1
    widths = np.diff(transitions)
    dnl = widths / widths.mean() - 1.0
    inl = np.cumsum(dnl)
    return LinearityReport(codes=np.arange(1, n_codes - 1), dnl_lsb=dnl, inl_lsb=inl, hits=hits)


def fom(power: float, bandwidth: float, enob: float) -> float:
    """Figure of merit ``power / (bandwidth * 2**enob)`` in joules per step."""
    if not (power > 0 and bandwidth > 0 and enob >= 0):
        raise ValueError("power and bandwidth must be positive, enob non-negative")
    return power / (bandwidth * 2.0 ** enob)


def fom_conventions(power: float, bandwidth: float, enob: float) -> dict:
    """FoM with the signal bandwidth and with the Nyquist bandwidth (2x)."""
    return {"signal_bandwidth": fom(power, bandwidth, enob),
            "nyquist_bandwidth": fom(power, 2 * bandwidth, enob)}
