"""Cycle-accurate behavioral simulator of a dual-mode (regular / tracking) SAR ADC."""

from ._kernels import BACKEND
from .adc_model import AdcConfig, CapArray, ConfigError, Mode, compare, load_config
from .bounds import (
    DeltaBound,
    StepKind,
    StepPolicy,
    brute_force_max_delta,
    initial_step,
    max_delta_approx,
    max_delta_codes,
    max_delta_exact,
    max_delta_tight,
)
from .energy import (
    Accounting,
    EnergyModelParams,
    EnergyReport,
    conversion_energy,
    dac_transition_energy,
    energy_report,
    sweep_energy_vs_osr,
)
from .engine import (
    ConversionRecord,
    CycleTrace,
    EngineState,
    RunResult,
    convert,
    cycles_for,
    reconfigure,
    run,
)
from .metrics import LinearityReport, SpectrumReport, decimate_average, dnl_inl, fom, spectrum
from .signals import Waveform, from_csv, gen_ramp, gen_sine

__version__ = "0.1.0"
