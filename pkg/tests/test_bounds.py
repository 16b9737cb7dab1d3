import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tracksar.bounds import (StepKind, StepPolicy, brute_force_max_delta, delta_bound,
                             initial_step, max_delta_approx, max_delta_codes, max_delta_exact,
                             max_delta_tight)


def _oracle_max_delta(a, m, phases=20000):
    # independent loop-form oracle: scan one period at a time per phase
    best = 0.0
    for phi in np.linspace(0, 2 * math.pi, phases, endpoint=False)[::50]:
        x = a * np.cos(np.pi * np.arange(2 * m + 1) / m + phi)
        best = max(best, float(np.abs(np.diff(x)).max()))
    return best


@pytest.mark.parametrize("a, m, expected", [(1, 2, 1.0), (1, 64, 0.049068), (0.5, 32, 0.049009)])
def test_exact(a, m, expected):
    assert max_delta_exact(a, m) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("a, m, expected", [(1, 64, 0.049087), (1, 2, math.pi / 2), (2, 128, 0.049087)])
def test_approx(a, m, expected):
    assert max_delta_approx(a, m) == pytest.approx(expected, abs=1e-6)


@given(st.floats(0.01, 10), st.integers(2, 4096))
def test_approx_dominates_exact(a, m):
    assert max_delta_approx(a, m) >= max_delta_exact(a, m)


@given(st.floats(0.01, 10), st.integers(2, 4096))
def test_tight_between_exact_and_approx(a, m):
    assert max_delta_exact(a, m) <= max_delta_tight(a, m) * (1 + 1e-12)
    assert max_delta_tight(a, m) <= max_delta_approx(a, m) * (1 + 1e-12)


@pytest.mark.parametrize("m, bits, expected", [(32, 8, 25), (64, 8, 13), (256, 8, 4)])
def test_codes_match_table(m, bits, expected):
    assert max_delta_codes(m, bits) == expected


def test_codes_scaling_from_volts():
    # the tabulated variation takes the whole 1 V range as the amplitude
    assert max_delta_exact(1.0, 32) * 255 == pytest.approx(24.99, abs=0.01)
    assert max_delta_codes(32, 8) == math.ceil(max_delta_exact(1.0, 32) * 255)


@pytest.mark.parametrize("m, bits", [(1, 8), (0, 8), (64, 3), (64, 17)])
def test_codes_validation(m, bits):
    with pytest.raises(ValueError):
        max_delta_codes(m, bits)


@pytest.mark.parametrize("m, policy, expected", [
    (32, StepPolicy.eq13(), 32),
    (64, StepPolicy.coverage(), 8),
    (64, StepPolicy.eq13(), 16),
    (256, StepPolicy.coverage(), 4),
    (256, StepPolicy.eq13(), 4),
    (32, StepPolicy.coverage(), 16),
    (5, StepPolicy.explicit(8), 8),
])
def test_initial_step(m, policy, expected):
    assert initial_step(m, 8, policy) == expected


def test_initial_step_too_large():
    with pytest.raises(ValueError):
        initial_step(2, 8, StepPolicy.eq13())


@given(st.integers(2, 2048), st.integers(4, 16))
@settings(max_examples=200)
def test_policy_postconditions(m, bits):
    need = max_delta_codes(m, bits)
    for kind in (StepPolicy.eq13(), StepPolicy.coverage()):
        try:
            s = initial_step(m, bits, kind)
        except ValueError:
            continue
        assert s & (s - 1) == 0
        if kind.kind is StepKind.EQ13:
            assert s >= need and (s == 1 or s // 2 < need)
        else:
            assert 2 * s - 1 >= need and (s == 1 or s - 1 < need)


def test_policy_parse_roundtrip():
    for p in (StepPolicy.eq13(), StepPolicy.coverage(), StepPolicy.explicit(16)):
        assert StepPolicy.parse(str(p)) == p
    with pytest.raises(ValueError):
        StepPolicy.parse("explicit:3")
    with pytest.raises(ValueError):
        StepPolicy.parse("nonsense")


def test_delta_bound_bundle():
    b = delta_bound(1.0, 64, 8)
    assert b.codes == 13 and b.exact_volts < b.approx_volts


class TestBruteForce:
    def test_matches_tight_supremum(self):
        for m in (16, 32, 64, 128, 256):
            bf = brute_force_max_delta(1, m, 10000)
            assert bf <= max_delta_tight(1, m) + 1e-12
            assert bf >= max_delta_tight(1, m) * (1 - 1e-6)

    def test_agrees_with_loop_oracle(self):
        for m in (8, 64):
            assert brute_force_max_delta(1, m, 20000) == pytest.approx(_oracle_max_delta(1, m), rel=1e-4)

    def test_quarter_rate_tone(self):
        # tone at fs/4: per-sample phase step pi/2, largest change sqrt(2)*A
        assert brute_force_max_delta(1, 2, 100) == pytest.approx(math.sqrt(2), rel=1e-3)
        assert brute_force_max_delta(1, 2, 100) <= math.sqrt(2)

    def test_nyquist_tone_swings_full_range(self):
        assert brute_force_max_delta(1, 1, 100) == pytest.approx(2.0)

    def test_zero_amplitude(self):
        assert brute_force_max_delta(0, 64, 100) == 0

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            brute_force_max_delta(1, 64, 99)
