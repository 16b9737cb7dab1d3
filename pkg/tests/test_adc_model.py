import numpy as np
import pytest
from hypothesis import given, strategies as st

from tracksar.adc_model import (AdcConfig, CapArray, ConfigError, Mode, compare, dump_config,
                                load_config, parse_config_text)
from tracksar.bounds import StepPolicy


def _weighted_sum(code, caps, unit, vref):
    # independent oracle: sum the switched capacitances bit by bit
    on = sum(c for i, c in enumerate(caps) if (code >> i) & 1)
    return vref * on / (sum(caps) + unit)


class TestDac:
    def test_examples(self):
        arr = CapArray()
        assert arr.dac_voltage(0) == 0.0
        assert arr.dac_voltage(128) == 0.5
        assert arr.dac_voltage(13) == pytest.approx(0.050781, abs=1e-6)
        assert arr.dac_voltage(255) == pytest.approx(255 / 256)

    def test_weighted_sum_oracle_ideal(self):
        arr = CapArray(bits=8)
        caps = [15e-15 * 2 ** i for i in range(8)]
        for code in range(256):
            assert arr.dac_voltage(code) == pytest.approx(_weighted_sum(code, caps, 15e-15, 1.0), rel=1e-12)

    def test_weighted_sum_oracle_mismatch(self):
        arr = CapArray(bits=8, mismatch_sigma=0.02, rng=np.random.default_rng(3))
        assert not arr.ideal
        for code in range(256):
            assert arr.dac_voltage(code) == pytest.approx(
                _weighted_sum(code, arr.cap_values, 15e-15, 1.0), rel=1e-12)

    def test_strictly_increasing_ideal(self):
        for bits in (4, 8, 12):
            assert np.all(np.diff(CapArray(bits=bits).levels) > 0)

    def test_monotone_with_small_mismatch_over_seeds(self):
        sigma = 2.0 ** -(8 + 2)
        monotone = sum(
            bool(np.all(np.diff(CapArray(8, mismatch_sigma=sigma, rng=np.random.default_rng(s)).levels) > 0))
            for s in range(100))
        assert monotone >= 99

    def test_out_of_range_code(self):
        arr = CapArray()
        for code in (-1, 256):
            with pytest.raises(ValueError):
                arr.dac_voltage(code)
            with pytest.raises(ValueError):
                arr.set_code(code)

    def test_mismatch_reproducible(self):
        a = CapArray(8, mismatch_sigma=0.01, rng=np.random.default_rng(7))
        b = CapArray(8, mismatch_sigma=0.01, rng=np.random.default_rng(7))
        np.testing.assert_array_equal(a.cap_values, b.cap_values)

    def test_explicit_caps(self):
        caps = 15e-15 * 2.0 ** np.arange(8)
        caps[7] *= 1.1
        arr = CapArray(8, cap_values=caps)
        assert arr.total_cap == pytest.approx(caps.sum() + 15e-15)
        with pytest.raises(ValueError):
            CapArray(8, cap_values=caps[:4])


class TestSampleHold:
    @pytest.mark.parametrize("vin, held, flag", [(0.5, 0.5, False), (1.2, 1.0, True), (-0.1, 0.0, True)])
    def test_clamp(self, vin, held, flag):
        arr = CapArray()
        assert arr.sample_input(vin) == held
        assert arr.held_input == held and arr.out_of_range is flag

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            CapArray().sample_input(float("nan"))

    def test_sampling_keeps_code(self):
        arr = CapArray()
        arr.set_code(77)
        arr.sample_input(0.3)
        assert arr.code == 77


class TestCompare:
    @pytest.mark.parametrize("vin, vdac, offset, expected", [
        (0.6, 0.5, 0.0, 1), (0.5, 0.5, 0.0, 0), (0.5, 0.5, 0.01, 0), (0.4, 0.5, 0.0, 0),
        (0.505, 0.5, 0.01, 0), (0.52, 0.5, 0.01, 1),
    ])
    def test_examples(self, vin, vdac, offset, expected):
        assert compare(vin, vdac, 0.0, offset) == expected

    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_noiseless_is_pure(self, a, b):
        assert compare(a, b) == compare(a, b) == int(a > b)

    def test_noise_needs_rng(self):
        with pytest.raises(ValueError):
            compare(0.5, 0.5, 1e-3)

    def test_noise_flips_ties_about_half_the_time(self):
        rng = np.random.default_rng(0)
        ones = sum(compare(0.5, 0.5, 1e-3, 0.0, rng) for _ in range(4000))
        assert 1800 < ones < 2200

    def test_prepared_noise(self):
        assert compare(0.5, 0.5, noise=1e-6) == 1
        assert compare(0.5, 0.5, noise=-1e-6) == 0


class TestConfig:
    def test_defaults(self):
        c = AdcConfig()
        assert (c.bits, c.vref, c.unit_cap, c.max_sample_rate) == (8, 1.0, 15e-15, 1e6)
        assert c.lsb == 1 / 256 and c.regular_step == 128

    @pytest.mark.parametrize("kw", [{"bits": 3}, {"bits": 17}, {"vref": 0}, {"osr": 0},
                                    {"comparator_noise_sigma": -1}, {"unit_cap": float("nan")}])
    def test_validation(self, kw):
        with pytest.raises(ConfigError):
            AdcConfig(**kw)

    def test_tracking_step(self):
        assert AdcConfig(mode=Mode.TRACKING, osr=64).tracking_step() == 8
        assert AdcConfig(osr=64, step_policy=StepPolicy.eq13()).tracking_step() == 16

    def test_parse_text(self):
        text = "# comment\nbits = 10\nmode = tracking  # trailing\nosr=32\nstep_policy = explicit:16\nvref = 1.2\n"
        v = parse_config_text(text)
        assert v == {"bits": 10, "mode": Mode.TRACKING, "osr": 32,
                     "step_policy": StepPolicy.explicit(16), "vref": 1.2}

    def test_parse_errors_name_line_and_key(self):
        with pytest.raises(ConfigError, match=r"line 2: unknown key 'bogus'"):
            parse_config_text("bits = 8\nbogus = 1\n")
        with pytest.raises(ConfigError, match=r"line 1: bad value for 'bits'"):
            parse_config_text("bits = eight\n")
        with pytest.raises(ConfigError, match="line 1"):
            parse_config_text("just words\n")

    def test_roundtrip_file(self, tmp_path):
        c = AdcConfig(bits=10, mode=Mode.TRACKING, osr=256, comparator_offset=1e-3, rng_seed=9)
        p = tmp_path / "adc.cfg"
        p.write_text(dump_config(c))
        assert load_config(p) == c
