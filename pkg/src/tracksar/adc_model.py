"""
Behavioral models of the analog blocks: binary-weighted capacitive DAC with
one dummy unit capacitor, comparator, ideal bottom-plate sample-and-hold,
and the top-level converter configuration.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import MAX_BITS, MIN_BITS, StepPolicy, initial_step


class Mode(enum.Enum):
    REGULAR = "regular"
    TRACKING = "tracking"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AdcConfig:
    """Converter configuration. Defaults describe the 8-bit, 1 V, 1 MS/s
    design with 15 fF unit capacitors."""

    bits: int = 8
    vref: float = 1.0
    unit_cap: float = 15e-15
    max_sample_rate: float = 1e6
    mode: Mode = Mode.REGULAR
    osr: int = 1
    step_policy: StepPolicy = field(default_factory=StepPolicy.coverage)
    comparator_noise_sigma: float = 0.0
    comparator_offset: float = 0.0
    cap_mismatch_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.bits) != self.bits or not MIN_BITS <= self.bits <= MAX_BITS:
            raise ConfigError(f"bits must be an integer in [{MIN_BITS}, {MAX_BITS}], got {self.bits}")
        for name in ("vref", "unit_cap", "max_sample_rate"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value}")
        if int(self.osr) != self.osr or self.osr < 1:
            raise ConfigError(f"osr must be an integer >= 1, got {self.osr}")
        for name in ("comparator_noise_sigma", "cap_mismatch_sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be >= 0, got {value}")
        if not math.isfinite(self.comparator_offset):
            raise ConfigError("comparator_offset must be finite")
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def lsb(self) -> float:
        return self.vref / 2 ** self.bits

    @property
    def regular_step(self) -> int:
        return 2 ** (self.bits - 1)

    def tracking_step(self) -> int:
        return initial_step(self.osr, self.bits, self.step_policy)

    def replace(self, **changes) -> "AdcConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Mode):
                value = value.value
            elif isinstance(value, StepPolicy):
                value = str(value)
            out[f.name] = value
        return out


_INT_KEYS = {"bits", "osr", "rng_seed"}
_FLOAT_KEYS = {"vref", "unit_cap", "max_sample_rate", "comparator_noise_sigma",
               "comparator_offset", "cap_mismatch_sigma"}


def coerce_config_value(key: str, text: str):
    """Convert a textual config value to the field's type."""
    text = text.strip()
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key == "mode":
        return Mode(text.lower())
    if key == "step_policy":
        return StepPolicy.parse(text)
    raise KeyError(key)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines ('#' starts a comment) into a dict of
    typed overrides for :class:`AdcConfig`."""
    values = {}
    valid = {f.name for f in dataclasses.fields(AdcConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(":")
            if not _:
                raise ConfigError(f"{source}: line {lineno}: expected 'key = value'")
        key = key.strip()
        if key not in valid:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        try:
            values[key] = coerce_config_value(key, value)
        except ValueError as exc:
            raise ConfigError(f"{source}: line {lineno}: bad value for {key!r}: {exc}") from None
    return values


def load_config(path, base: AdcConfig | None = None) -> AdcConfig:
    path = Path(path)
    overrides = parse_config_text(path.read_text(encoding="utf-8"), str(path))
    base = base or AdcConfig()
    return base.replace(**overrides)


def dump_config(config: AdcConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config.to_dict().items())


class CapArray:
    """Binary-weighted capacitor DAC plus sample-and-hold state.

    Capacitor ``i`` has nominal value ``2**i * unit_cap``; one extra dummy
    unit capacitor makes the ideal transfer ``vref * code / 2**bits``.
    """

    def __init__(self, bits=8, vref=1.0, unit_cap=15e-15, mismatch_sigma=0.0,
                 rng=None, cap_values=None):
        self.bits = bits
        self.vref = vref
        self.unit_cap = unit_cap
        nominal = unit_cap * 2.0 ** np.arange(bits)
        if cap_values is not None:
            caps = np.asarray(cap_values, dtype=float)
            if caps.shape != (bits,):
                raise ValueError(f"expected {bits} capacitor values")
        elif mismatch_sigma > 0:
            rng = rng if rng is not None else np.random.default_rng()
            # unit-cap statistics: relative sigma shrinks with sqrt(#units)
            eps = rng.normal(0.0, 1.0, bits) * mismatch_sigma / np.sqrt(2.0 ** np.arange(bits))
            caps = nominal * (1.0 + eps)
        else:
            caps = nominal
        if np.any(caps <= 0):
            raise ValueError("capacitor values must be positive")
        self.cap_values = caps
        self.ideal = bool(np.array_equal(caps, nominal))
        self.total_cap = float(caps.sum() + unit_cap)

        codes = np.arange(2 ** bits)
        bitmat = (codes[:, None] >> np.arange(bits)[None, :]) & 1
        # switched capacitance per code, used by the energy kernels
        self.code_cap = bitmat @ caps
        if self.ideal:
            self.levels = vref * codes / 2 ** bits
        else:
            self.levels = vref * self.code_cap / self.total_cap

        self.code = 0
        self.held_input = 0.0
        self.out_of_range = False

    @classmethod
    def from_config(cls, config: AdcConfig, rng=None):
        return cls(config.bits, config.vref, config.unit_cap, config.cap_mismatch_sigma, rng)

    @property
    def max_code(self):
        return 2 ** self.bits - 1

    @property
    def bottom_plate_bits(self):
        return [(self.code >> i) & 1 for i in range(self.bits)]

    def sample_input(self, vin: float) -> float:
        """Hold ``vin``, clamped to [0, vref]; sets :attr:`out_of_range` when
        clamping occurred. The DAC code is left untouched."""
        if not math.isfinite(vin):
            raise ValueError(f"non-finite input voltage {vin}")
        clamped = min(max(vin, 0.0), self.vref)
        self.out_of_range = clamped != vin
        self.held_input = clamped
        return clamped

    def dac_voltage(self, code: int) -> float:
        if not 0 <= code <= self.max_code:
            raise ValueError(f"code {code} outside [0, {self.max_code}]")
        return float(self.levels[code])

    def set_code(self, code: int):
        if not 0 <= code <= self.max_code:
            raise ValueError(f"code {code} outside [0, {self.max_code}]")
        self.code = int(code)


def compare(vin_held, vdac, noise_sigma=0.0, offset=0.0, rng=None, *, noise=None) -> int:
    """Comparator decision: 1 iff ``vin_held + noise > vdac + offset``.

    Ties resolve to 0. ``noise`` may be supplied pre-drawn (volts); otherwise
    it is drawn from ``rng`` when ``noise_sigma > 0``.
    """
    if noise is None:
        noise = 0.0
        if noise_sigma > 0:
            if rng is None:
                raise ValueError("comparator noise requires an rng")
            noise = noise_sigma * rng.standard_normal()
    return 1 if vin_held + noise > vdac + offset else 0
