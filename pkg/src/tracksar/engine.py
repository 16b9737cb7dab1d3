"""
Dual-mode SAR conversion state machine.

Both modes run the same add/subtract search on the output register ``B``:

1. regular mode resets ``B`` to 0 and loads the step register with
   ``2**(bits-1)``; tracking mode keeps ``B`` from the previous sample and
   loads the (smaller) tracking step;
2. while the step is non-zero: compare at ``DAC(B)``, add the step if the
   input is above, subtract it otherwise (saturating), then halve the step;
3. one last comparison at ``DAC(B)`` subtracts 1 when the input is not above.

From a previous code ``p`` the tracking search reaches exactly
``[p - 2*s0, p + 2*s0 - 1]`` and takes ``log2(s0) + 2`` comparator cycles.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .adc_model import AdcConfig, CapArray, Mode, compare
from .bounds import StepPolicy, initial_step as _initial_step
from .signals import Waveform


@dataclass(frozen=True)
class CycleEntry:
    kind: str  # "search" or "correction"
    step: int
    code_before: int
    vdac: float
    decision: int
    code_after: int


@dataclass
class CycleTrace:
    entries: list = field(default_factory=list)
    final_correction_applied: bool = False
    overload_flag: bool = False
    # code discarded by the regular-mode DAC reset, None when no reset happened
    reset_from: int | None = None
    vin_held: float = 0.0
    regular: bool = True

    @property
    def cycles(self) -> int:
        return len(self.entries)

    def to_dict(self):
        return {
            "cycles": self.cycles,
            "regular": self.regular,
            "reset_from": self.reset_from,
            "final_correction_applied": self.final_correction_applied,
            "overload": self.overload_flag,
            "entries": [
                {"kind": e.kind, "step": e.step, "code_before": e.code_before,
                 "vdac": e.vdac, "decision": e.decision, "code_after": e.code_after}
                for e in self.entries
            ],
        }


@dataclass
class EngineState:
    bits: int = 8
    mode: Mode = Mode.REGULAR
    osr: int = 1
    initial_step: int | None = None  # tracking-mode step
    current_code: int = 0
    step_register: int = 0
    first_conversion_done: bool = False

    @classmethod
    def from_config(cls, config: AdcConfig) -> "EngineState":
        step = config.tracking_step() if config.mode is Mode.TRACKING else None
        return cls(bits=config.bits, mode=config.mode, osr=config.osr, initial_step=step)


def cycles_for(initial_step: int) -> int:
    """Comparator cycles per conversion: ``log2(initial_step)`` halvings plus
    the first search decision plus the final correction."""
    if int(initial_step) != initial_step or initial_step < 1 or initial_step & (initial_step - 1):
        raise ValueError(f"initial step must be a power of two >= 1, got {initial_step}")
    return int(initial_step).bit_length() + 1


def convert(state: EngineState, arr: CapArray, vin: float, *, noise=None,
            noise_sigma=0.0, offset=0.0, rng=None):
    """Run one traced conversion, updating ``state`` and ``arr`` in place.

    ``noise`` optionally supplies one pre-drawn comparator noise value per
    cycle. Returns ``(code, trace)``.
    """
    if not math.isfinite(vin):
        raise ValueError(f"non-finite input voltage {vin}")
    regular = state.mode is Mode.REGULAR or not state.first_conversion_done
    if not regular and state.initial_step is None:
        raise ValueError("tracking mode requires a configured initial step")
    held = arr.sample_input(vin)
    top = 2 ** state.bits - 1
    trace = CycleTrace(vin_held=held, regular=regular)

    b = state.current_code
    if regular:
        s = 2 ** (state.bits - 1)
        if b != 0:
            trace.reset_from = b
            b = 0
            arr.set_code(0)
    else:
        s = state.initial_step

    j = 0

    def decide(vdac):
        nz = None if noise is None else float(noise[j])
        return compare(held, vdac, noise_sigma, offset, rng, noise=nz)

    while s >= 1:
        state.step_register = s
        vdac = arr.dac_voltage(b)
        d = decide(vdac)
        nb = min(max(b + s if d else b - s, 0), top)
        trace.entries.append(CycleEntry("search", s, b, vdac, d, nb))
        b = nb
        arr.set_code(b)
        s >>= 1
        j += 1
    state.step_register = 0

    vdac = arr.dac_voltage(b)
    d = decide(vdac)
    nb = b - 1 if (not d and b > 0) else b
    trace.entries.append(CycleEntry("correction", 1, b, vdac, d, nb))
    trace.final_correction_applied = nb != b
    b = nb
    arr.set_code(b)

    # flagged when the input lies beyond the levels of the neighbouring codes,
    # i.e. more than one (local) LSB away; ideal caps reduce this to |err| > 1 LSB
    tol = arr.vref / 2 ** state.bits * 1e-9
    hi = arr.dac_voltage(b + 1) if b < top else arr.vref
    lo = arr.dac_voltage(b - 1) if b > 0 else 0.0
    trace.overload_flag = held > hi + tol or held < lo - tol
    state.current_code = b
    if state.mode is Mode.TRACKING:
        state.first_conversion_done = True
    return b, trace


def reconfigure(state: EngineState, new_mode: Mode, new_policy: StepPolicy | None = None,
                osr: int | None = None) -> EngineState:
    """Switch mode and/or step policy.

    Entering tracking mode forces a fresh acquisition. Leaving it means the
    next conversion starts from a reset DAC, which ``convert`` applies.
    """
    if osr is not None:
        state.osr = osr
    if new_mode is Mode.TRACKING:
        if state.mode is not Mode.TRACKING:
            state.first_conversion_done = False
        if new_policy is not None:
            state.initial_step = _initial_step(state.osr, state.bits, new_policy)
        elif state.initial_step is None:
            state.initial_step = _initial_step(state.osr, state.bits, StepPolicy.coverage())
    else:
        state.first_conversion_done = False
    state.mode = new_mode
    return state


@dataclass(frozen=True)
class ConversionRecord:
    sample_index: int
    vin: float
    code: int
    cycles: int
    overload: bool
    out_of_range: bool = False
    trace: CycleTrace | None = None


class RunResult(Sequence):
    """Outcome of converting a whole waveform; indexable as a sequence of
    :class:`ConversionRecord`, with the columns also exposed as arrays."""

    def __init__(self, config, waveform, arr, vin, held, codes, cycles, overload,
                 e_dac_drawn, e_dac_net, traces=None, backend=_kernels.BACKEND):
        self.config = config
        self.waveform = waveform
        self.arr = arr
        self.vin = vin
        self.held = held
        self.codes = codes
        self.cycles = cycles
        self.overload = overload.astype(bool)
        self.out_of_range = vin != held
        self.e_dac_drawn = e_dac_drawn
        self.e_dac_net = e_dac_net
        self.traces = traces
        self.backend = backend

    def __len__(self):
        return len(self.codes)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        return ConversionRecord(
            sample_index=i,
            vin=float(self.vin[i]),
            code=int(self.codes[i]),
            cycles=int(self.cycles[i]),
            overload=bool(self.overload[i]),
            out_of_range=bool(self.out_of_range[i]),
            trace=None if self.traces is None else self.traces[i],
        )

    @property
    def steady_cycles(self):
        """Cycle counts after the tracking acquisition sample."""
        if self.config.mode is Mode.TRACKING:
            return self.cycles[1:]
        return self.cycles


def _streams(seed):
    mismatch_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(mismatch_ss), np.random.default_rng(noise_ss)


def build_array(config: AdcConfig) -> CapArray:
    mismatch_rng, _ = _streams(config.rng_seed)
    return CapArray.from_config(config, rng=mismatch_rng)


def run(waveform: Waveform, config: AdcConfig, *, trace=False, arr: CapArray | None = None,
        kernel=None) -> RunResult:
    """Convert every sample of ``waveform`` in order.

    In tracking mode the first sample is converted with a regular search to
    acquire the signal. With ``trace=True`` every conversion is also replayed
    through :func:`convert` to collect per-cycle traces.
    """
    if len(waveform) == 0:
        raise ValueError("cannot convert an empty waveform")
    if waveform.sample_rate > config.max_sample_rate * (1 + 1e-12):
        raise ValueError(
            f"sample rate {waveform.sample_rate} Hz exceeds the converter maximum "
            f"{config.max_sample_rate} Hz")
    if arr is None:
        arr = build_array(config)
    _, noise_rng = _streams(config.rng_seed)
    tracking = config.mode is Mode.TRACKING
    track_step = config.tracking_step() if tracking else 0

    vin = np.asarray(waveform.samples, dtype=float)
    held = np.clip(vin, 0.0, config.vref)
    n = len(vin)
    if config.comparator_noise_sigma > 0:
        noise = config.comparator_noise_sigma * noise_rng.standard_normal((n, config.bits + 1))
    else:
        noise = np.zeros((n, 0))

    kernel = kernel or _kernels.convert_block
    codes, cycles, overload, e_drawn, e_net, _, _ = kernel(
        np.ascontiguousarray(held), np.ascontiguousarray(noise),
        np.ascontiguousarray(arr.levels, dtype=float),
        np.ascontiguousarray(arr.code_cap, dtype=float),
        float(config.vref), float(config.comparator_offset), float(config.lsb),
        int(config.bits), int(track_step), bool(tracking), 0, False)

    traces = None
    if trace:
        state = EngineState.from_config(config)
        replay = CapArray(config.bits, config.vref, config.unit_cap, cap_values=arr.cap_values)
        traces = []
        for i in range(n):
            row = noise[i] if noise.shape[1] else None
            try:
                code, tr = convert(state, replay, float(vin[i]), noise=row,
                                   offset=config.comparator_offset)
            except ValueError as exc:
                raise ValueError(f"sample {i}: {exc}") from exc
            if code != codes[i]:
                raise RuntimeError(
                    f"sample {i}: traced conversion gave {code}, kernel gave {codes[i]}")
            traces.append(tr)

    backend = getattr(kernel, "__module__", "") or ""
    return RunResult(config, waveform, arr, vin, held, codes, cycles, overload,
                     e_drawn, e_net, traces,
                     backend="cython" if "_ckernel" in backend else "python")
