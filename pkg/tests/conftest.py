import numpy as np
import pytest

from tracksar import AdcConfig, Mode, StepPolicy, gen_sine
from tracksar._kernels import available_backends


@pytest.fixture(params=sorted(available_backends()))
def kernel(request):
    return available_backends()[request.param]


def full_scale_sine(osr, count=4096, phase=0.0, vref=1.0):
    """Coherent full-scale cosine with its tone at or below fs/(2*osr)."""
    from tracksar.signals import coherent_cycles_for_osr
    return gen_sine(vref / 2, None, 1e6, phase, vref / 2, count,
                    coherent_cycles=coherent_cycles_for_osr(osr, count))


def floor_oracle(vin, levels):
    """Largest code whose DAC level does not exceed vin (exhaustive search)."""
    return int(np.flatnonzero(levels <= vin).max()) if vin >= levels[0] else 0


@pytest.fixture
def tracking64():
    return AdcConfig(mode=Mode.TRACKING, osr=64, step_policy=StepPolicy.coverage())


# verdict lines from test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
