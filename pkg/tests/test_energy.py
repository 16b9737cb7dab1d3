import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import full_scale_sine
from tracksar.adc_model import AdcConfig, CapArray, Mode
from tracksar.energy import (DEFAULT_COMPARATOR_ENERGY, DEFAULT_LOGIC_ENERGY, Accounting,
                             EnergyModelParams, calibrate_cycle_energy, conversion_energy,
                             dac_transition_energy, energy_report, sweep_energy_vs_osr,
                             tracking_trend_ok)
from tracksar.engine import CycleTrace, EngineState, convert, run

NET, DRAWN = Accounting.NET_CHARGE, Accounting.DRAWN_ONLY
SMALL = EnergyModelParams(50e-15, 100e-15)


def _node_oracle(arr, a, b, vin):
    """Reference energy from total node charge: solve the top-plate node by
    charge conservation instead of using DAC(code) directly."""
    caps = np.append(arr.cap_values, arr.unit_cap)  # dummy cap stays grounded

    def state(code):
        vb = np.array([arr.vref * ((code >> i) & 1) for i in range(arr.bits)] + [0.0])
        # sampled with top plate at 0 and every bottom plate at vin, so the
        # floating node keeps sum C_i (vt - vb_i) = -vin * C_tot
        vt = (caps @ vb) / caps.sum() - vin
        return vb, caps * (vb - vt)

    vb_a, q_a = state(a)
    vb_b, q_b = state(b)
    on_a, on_b = vb_a > 0, vb_b > 0
    drawn = max(arr.vref * (q_b[on_b] - q_a[on_b]).sum(), 0.0)
    net = arr.vref * (q_b[on_b].sum() - q_a[on_a].sum())
    return drawn, net


class TestTransition:
    def test_no_switching(self):
        arr = CapArray()
        for v in (0.0, 0.4, 1.0):
            assert dac_transition_energy(arr, 0, 0, v) == 0.0

    def test_msb_from_reset(self):
        assert dac_transition_energy(CapArray(), 0, 128, 0.0) == pytest.approx(0.96e-12, rel=1e-12)

    def test_msb_discharge_dominates(self):
        arr = CapArray()
        big = dac_transition_energy(arr, 128, 127, 0.5)
        assert big > 0
        others = [dac_transition_energy(arr, c, c + d, 0.5)
                  for c in range(256) for d in (-1, 1)
                  if 0 <= c + d <= 255 and {c, c + d} != {127, 128}]
        assert big > max(others)

    @given(st.integers(0, 255), st.integers(0, 255), st.floats(0, 1))
    @settings(max_examples=300)
    def test_matches_node_oracle(self, a, b, vin):
        arr = CapArray()
        drawn, net = _node_oracle(arr, a, b, vin)
        assert dac_transition_energy(arr, a, b, vin, DRAWN) == pytest.approx(drawn, rel=1e-9, abs=1e-25)
        assert dac_transition_energy(arr, a, b, vin, NET) == pytest.approx(net, rel=1e-9, abs=1e-25)

    @given(st.integers(0, 255), st.integers(0, 255), st.floats(0, 1))
    @settings(max_examples=300)
    def test_drawn_nonnegative(self, a, b, vin):
        arr = CapArray(mismatch_sigma=0.05, rng=np.random.default_rng(1))
        assert dac_transition_energy(arr, a, b, vin, DRAWN) >= 0.0

    @given(st.lists(st.integers(0, 255), min_size=2, max_size=6), st.floats(0, 1))
    @settings(max_examples=200)
    def test_net_closed_cycle_is_zero(self, codes, vin):
        arr = CapArray(mismatch_sigma=0.02, rng=np.random.default_rng(4))
        loop = codes + codes[:1]
        total = sum(dac_transition_energy(arr, a, b, vin, NET) for a, b in zip(loop, loop[1:]))
        assert abs(total) <= 1e-18

    def test_range_checked(self):
        with pytest.raises(ValueError):
            dac_transition_energy(CapArray(), 0, 256, 0.5)


class TestConversionEnergy:
    def test_component_scaling(self):
        arr = CapArray()
        state = EngineState(mode=Mode.TRACKING, initial_step=8, current_code=100,
                            first_conversion_done=True)
        _, tr = convert(state, arr, 0.4)
        e = conversion_energy(tr, arr, SMALL)
        assert tr.cycles == 5
        assert e.comparator == pytest.approx(0.25e-12)
        assert e.logic == pytest.approx(0.5e-12)
        assert e.total == pytest.approx(e.dac + e.comparator + e.logic)

    def test_empty_trace(self):
        e = conversion_energy(CycleTrace(), CapArray())
        assert (e.dac, e.comparator, e.logic) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize("acc", [NET, DRAWN])
    @pytest.mark.parametrize("mode", [Mode.REGULAR, Mode.TRACKING])
    def test_trace_energy_equals_kernel(self, acc, mode):
        cfg = AdcConfig(mode=mode, osr=32, cap_mismatch_sigma=0.01, rng_seed=3)
        res = run(full_scale_sine(32, count=256), cfg, trace=True)
        params = EnergyModelParams(accounting=acc)
        per = np.array([conversion_energy(t, res.arr, params).dac for t in res.traces])
        kern = res.e_dac_net if acc is NET else res.e_dac_drawn
        np.testing.assert_allclose(per, kern, rtol=1e-9, atol=1e-24)

    def test_regular_pays_reset_tracking_does_not(self, tracking64):
        w = full_scale_sine(64)
        trk = run(w, tracking64)
        reg = run(w, tracking64.replace(mode=Mode.REGULAR))
        assert trk.e_dac_drawn[1:].mean() < reg.e_dac_drawn[1:].mean()


class TestReport:
    def test_totals(self, tracking64):
        rep = energy_report(run(full_scale_sine(64, count=512), tracking64), SMALL)
        comp = rep.dac.sum() + rep.comparator.sum() + rep.logic.sum()
        assert rep.total == pytest.approx(comp)
        assert rep.per_sample_avg == pytest.approx(comp / 512)
        d = rep.to_dict()
        assert d["config"]["osr"] == 64 and d["energy_params"]["comparator_energy_per_decision"] == 50e-15
        assert len(d["per_conversion"]) == 512

    def test_skip_all(self):
        res = run(full_scale_sine(2, count=8), AdcConfig())
        with pytest.raises(ValueError):
            energy_report(res, skip=8)

    def test_params_validated(self):
        with pytest.raises(ValueError):
            EnergyModelParams(-1.0, 0.0)


@pytest.fixture(scope="module")
def rows():
    return sweep_energy_vs_osr(AdcConfig(), [32, 64, 256])


class TestSweep:
    def test_cycles(self, rows):
        track = [r for r in rows if r.policy != "regular"]
        assert [r.cycles for r in track] == [7, 5, 4]
        assert [r.initial_step for r in track] == [32, 8, 4]
        assert all(r.overloads == 0 for r in rows)

    def test_tracking_trend(self, rows):
        assert tracking_trend_ok(rows)
        dac = [r.dac_pj for r in rows if r.policy != "regular"]
        assert dac[0] >= dac[1] >= dac[2]

    def test_regular_independent_of_osr(self, rows):
        reg = [r.total_pj for r in rows if r.policy == "regular"]
        assert max(reg) - min(reg) < 1e-3 * max(reg)
        assert all(r.cycles == 9 for r in rows if r.policy == "regular")

    def test_ratio_band(self, rows):
        t64, r64 = [r.total_pj for r in rows if r.osr == 64]
        assert 0.35 <= t64 / r64 <= 0.75

    def test_eq13_literal(self):
        rows = sweep_energy_vs_osr(AdcConfig(), [64], "eq13")
        assert (rows[0].initial_step, rows[0].cycles) == (16, 6)

    def test_empty(self):
        with pytest.raises(ValueError):
            sweep_energy_vs_osr(AdcConfig(), [])

    def test_trend_helper_detects_violation(self, rows):
        flat = [r for r in rows if r.osr != 64]
        bumped = [r if r.osr != 256 or r.policy == "regular"
                  else type(r)(**{**r.to_dict(), "total_pj": 1e3}) for r in flat]
        assert tracking_trend_ok(flat) and not tracking_trend_ok(bumped)


def test_calibration_reproduces_defaults():
    cmp_e, logic_e = calibrate_cycle_energy()
    assert cmp_e == pytest.approx(DEFAULT_COMPARATOR_ENERGY, rel=1e-2)
    assert logic_e == pytest.approx(DEFAULT_LOGIC_ENERGY, rel=1e-2)
