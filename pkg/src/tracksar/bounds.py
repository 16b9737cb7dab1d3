"""
Maximum sample-to-sample variation of an oversampled full-scale sinusoid and
the step-register initial values derived from it.

For ``x[n] = A*cos(pi*n/M + phi)`` the closed-form bound is ``A*sin(pi/M)``
(small-angle derivation), loosened further to ``A*pi/M``. The exact maximum
over all phases is ``2*A*sin(pi/(2*M))``; it is provided as
:func:`max_delta_tight` and the brute-force oracle converges to it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MIN_BITS = 4
MAX_BITS = 16
# below this the small-angle derivation is not trusted
SMALL_ANGLE_MIN_OSR = 16


class StepKind(enum.Enum):
    EQ13 = "eq13"
    COVERAGE = "coverage"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class StepPolicy:
    """How the tracking-mode initial step is chosen.

    ``EQ13``: smallest power of two >= the code bound.
    ``COVERAGE``: smallest power of two ``s`` with ``2*s - 1`` >= the code
    bound, i.e. the add/subtract search can still reach the bound.
    ``EXPLICIT``: a fixed power of two.
    """

    kind: StepKind = StepKind.COVERAGE
    value: int | None = None

    def __post_init__(self):
        if self.kind is StepKind.EXPLICIT:
            if self.value is None or not _is_pow2(self.value):
                raise ValueError(f"explicit step must be a power of two, got {self.value}")
        elif self.value is not None:
            raise ValueError(f"{self.kind.value} policy takes no value")

    @classmethod
    def eq13(cls):
        return cls(StepKind.EQ13)

    @classmethod
    def coverage(cls):
        return cls(StepKind.COVERAGE)

    @classmethod
    def explicit(cls, value: int):
        return cls(StepKind.EXPLICIT, int(value))

    @classmethod
    def parse(cls, text: str) -> "StepPolicy":
        """Parse ``coverage``, ``eq13`` or ``explicit:<n>``."""
        text = text.strip().lower()
        if text.startswith("explicit"):
            _, sep, num = text.partition(":")
            if not sep or not num:
                raise ValueError("explicit policy needs a value, e.g. explicit:8")
            try:
                return cls.explicit(int(num))
            except ValueError as exc:
                raise ValueError(f"bad explicit step {num!r}: {exc}") from None
        try:
            return cls(StepKind(text))
        except ValueError:
            raise ValueError(
                f"unknown step policy {text!r} (expected coverage, eq13 or explicit:N)") from None

    def __str__(self):
        if self.kind is StepKind.EXPLICIT:
            return f"explicit:{self.value}"
        return self.kind.value


@dataclass(frozen=True)
class DeltaBound:
    exact_volts: float
    approx_volts: float
    codes: int


def _is_pow2(v):
    return isinstance(v, (int, np.integer)) and v >= 1 and (v & (v - 1)) == 0


def _check_osr(M):
    if int(M) != M or M < 2:
        raise ValueError(f"oversampling ratio must be an integer >= 2, got {M}")


def _check_bits(bits):
    if int(bits) != bits or not MIN_BITS <= bits <= MAX_BITS:
        raise ValueError(f"bits must be in [{MIN_BITS}, {MAX_BITS}], got {bits}")


def max_delta_exact(amplitude: float, M: int) -> float:
    """Closed-form bound ``A*sin(pi/M)`` on adjacent-sample change (volts)."""
    _check_osr(M)
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    return amplitude * math.sin(math.pi / M)


def max_delta_approx(amplitude: float, M: int) -> float:
    """Small-angle form ``A*pi/M``; always >= :func:`max_delta_exact`."""
    _check_osr(M)
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    return amplitude * math.pi / M


def max_delta_tight(amplitude: float, M: int) -> float:
    """True supremum over phase of ``|x[n] - x[n-1]|``: ``2*A*sin(pi/(2*M))``.

    Follows from ``cos(a) - cos(a - b) = -2*sin(b/2)*sin(a - b/2)`` with
    ``b = pi/M``.
    """
    _check_osr(M)
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    return 2.0 * amplitude * math.sin(math.pi / (2 * M))


def max_delta_codes(M: int, bits: int) -> int:
    """Code-domain bound ``ceil(sin(pi/M) * (2**bits - 1))``."""
    _check_osr(M)
    _check_bits(bits)
    return math.ceil(math.sin(math.pi / M) * (2 ** bits - 1))


def delta_bound(amplitude: float, M: int, bits: int) -> DeltaBound:
    return DeltaBound(max_delta_exact(amplitude, M), max_delta_approx(amplitude, M),
                      max_delta_codes(M, bits))


def initial_step(M: int, bits: int, policy: StepPolicy | None = None) -> int:
    """Initial value of the tracking-mode step shift register.

    Raises ``ValueError`` when the resulting window would be no smaller than a
    regular conversion (step above ``2**(bits-1)``).
    """
    policy = policy or StepPolicy.coverage()
    _check_bits(bits)
    if policy.kind is StepKind.EXPLICIT:
        step = policy.value
    else:
        need = max_delta_codes(M, bits)
        step = 1
        if policy.kind is StepKind.EQ13:
            while step < need:
                step *= 2
        else:
            while 2 * step - 1 < need:
                step *= 2
    if step > 2 ** (bits - 1):
        raise ValueError(
            f"initial step {step} exceeds 2**(bits-1) = {2 ** (bits - 1)}; use regular mode")
    return step


def brute_force_max_delta(amplitude: float, M: int, phase_grid: int = 10000) -> float:
    """Oracle: max of ``|x[n] - x[n-1]|`` over ``phase_grid`` phases in [0, 2*pi)
    and one full period of ``n``, for ``x[n] = A*cos(pi*n/M + phi)``."""
    if phase_grid < 100:
        raise ValueError("phase_grid must be >= 100")
    if M < 1:
        raise ValueError("M must be >= 1")
    phases = np.linspace(0.0, 2 * np.pi, phase_grid, endpoint=False)[:, None]
    n = np.arange(1, 2 * M + 1)[None, :]
    x_now = amplitude * np.cos(np.pi * n / M + phases)
    x_prev = amplitude * np.cos(np.pi * (n - 1) / M + phases)
    return float(np.max(np.abs(x_now - x_prev)))
