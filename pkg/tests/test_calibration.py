import math

import numpy as np
import pytest

from nhdimer import (FitFailed, GainProfile, HashMap, RangeError,
                     S11FitResult, gain_profile_fit, hashmap_build,
                     hashmap_lookup, s11_fit, s11_model)
from nhdimer.calibration import (DeviceSettings, gain_db_model,
                                 hashmap_implied, synthetic_insertion_loss)
from nhdimer.params import TWO_PI


def s11_truth():
    omega0 = TWO_PI * 6.034e9
    return S11FitResult(omega_res=omega0,
                        q_int=omega0 / (TWO_PI * 5.7e6),
                        q_c=omega0 / (2.0 * TWO_PI * 9.9e6),
                        baseline=1.0)


def s11_trace(truth, n=401, span_hz=60e6):
    freqs = truth.omega_res / TWO_PI + np.linspace(-span_hz, span_hz, n)
    return freqs, s11_model(TWO_PI * freqs, truth)


def test_s11_fit_clean_round_trip():
    truth = s11_truth()
    freqs, mags = s11_trace(truth)
    fit = s11_fit(freqs, mags)
    assert fit.omega_res == pytest.approx(truth.omega_res, rel=1e-9)
    assert fit.kappa_int == pytest.approx(truth.kappa_int, rel=1e-6)
    assert fit.kappa_c == pytest.approx(truth.kappa_c, rel=1e-6)
    assert fit.baseline == pytest.approx(1.0, abs=1e-8)


def test_s11_fit_noisy_round_trip():
    truth = s11_truth()
    freqs, mags = s11_trace(truth)
    rng = np.random.default_rng(42)
    noisy = mags + rng.normal(scale=2e-3, size=mags.size)
    fit = s11_fit(freqs, noisy)
    assert fit.kappa_int == pytest.approx(truth.kappa_int, rel=0.05)
    assert fit.kappa_c == pytest.approx(truth.kappa_c, rel=0.05)


def test_s11_fit_rejects_flat_trace():
    freqs = 6.0e9 + np.linspace(-30e6, 30e6, 101)
    rng = np.random.default_rng(0)
    flat = 1.0 + rng.normal(scale=1e-4, size=101)
    with pytest.raises(FitFailed, match="no dip"):
        s11_fit(freqs, flat)


def test_s11_fit_input_validation():
    with pytest.raises(ValueError):
        s11_fit(np.arange(10.0), np.ones(10))
    with pytest.raises(ValueError):
        s11_fit(np.arange(20.0), np.ones(19))


def test_s11_result_validation():
    with pytest.raises(ValueError):
        S11FitResult(omega_res=1e9, q_int=-1.0, q_c=100.0, baseline=1.0)


def test_gain_model_continuous_at_knee():
    below = gain_db_model(0.9981e-3 * (1 - 1e-12), 20.3, 0.9981e-3, 8.6e-3)
    above = gain_db_model(0.9981e-3 * (1 + 1e-12), 20.3, 0.9981e-3, 8.6e-3)
    assert float(above) == pytest.approx(float(below), abs=1e-9)
    assert float(gain_db_model(1e-6, 20.3, 0.9981e-3, 8.6e-3)) == 20.3


def test_gain_profile_fit_round_trip():
    truth = (20.3, 0.9981e-3, 8.6e-3)
    p_in = np.logspace(-6, -1.7, 60)
    gain_db = gain_db_model(p_in, *truth)
    p_out = p_in * 10.0 ** (gain_db / 10.0)
    fit = gain_profile_fit(p_in, p_out)
    assert fit.g0_db == pytest.approx(truth[0], abs=1e-6)
    assert fit.p_sat == pytest.approx(truth[1], rel=1e-4)
    assert fit.b_g == pytest.approx(truth[2], rel=1e-4)
    # shuffled input order fits identically (sorted internally)
    rng = np.random.default_rng(5)
    order = rng.permutation(60)
    fit2 = gain_profile_fit(p_in[order], p_out[order])
    assert fit2.p_sat == pytest.approx(fit.p_sat, rel=1e-9)


def test_gain_profile_fit_noisy():
    truth = (20.3, 0.9981e-3, 8.6e-3)
    p_in = np.logspace(-6, -1.7, 60)
    gain_db = gain_db_model(p_in, *truth)
    rng = np.random.default_rng(11)
    p_out = p_in * 10.0 ** ((gain_db + rng.normal(scale=0.02, size=60)) / 10.0)
    fit = gain_profile_fit(p_in, p_out)
    assert fit.g0_db == pytest.approx(truth[0], abs=0.05)
    assert fit.p_sat == pytest.approx(truth[1], rel=0.15)


def test_gain_profile_fit_requires_knee():
    p_in = np.logspace(-6, -4, 20)  # everything far below saturation
    p_out = p_in * 10.0 ** (20.3 / 10.0)
    with pytest.raises(FitFailed, match="no knee"):
        gain_profile_fit(p_in, p_out)


def test_gain_profile_fit_validation():
    with pytest.raises(ValueError):
        gain_profile_fit(np.ones(5), np.ones(5))
    with pytest.raises(ValueError):
        gain_profile_fit(np.ones(10), np.ones(9))
    with pytest.raises(ValueError):
        gain_profile_fit(np.linspace(-1, 1, 10), np.ones(10))
    with pytest.raises(ValueError):
        GainProfile(g0_db=20.0, p_sat=-1.0, b_g=1.0)


def test_hashmap_build_flags_wraparound_row():
    rows = synthetic_insertion_loss()
    hmap = hashmap_build(rows, g0_db=20.3)
    assert len(hmap.rows) == 73
    outliers = [r for r in hmap.rows if r.outlier]
    assert len(outliers) == 1
    assert outliers[0].phi_exp_deg == 360.0
    assert len(hmap.active_rows()) == 72
    # loss recovered as g0 - s21
    assert hmap.rows[0].loss_db == pytest.approx(20.3 - rows[0][1], abs=1e-12)
    with pytest.raises(ValueError):
        hashmap_build([(400.0, 18.0)], g0_db=20.3)


def test_hashmap_lookup_flattens_net_gain():
    hmap = hashmap_build(synthetic_insertion_loss(), g0_db=20.3)
    for dg in (0.0, 4.0, 8.4):
        for phi in np.linspace(0.0, TWO_PI, 17, endpoint=False):
            st = hashmap_lookup(hmap, dg, float(phi))
            dg_fwd, dg_bwd, phi_back = hashmap_implied(hmap, st)
            assert dg_fwd == pytest.approx(dg, abs=1e-9)
            assert dg_bwd == pytest.approx(dg, abs=1e-9)
            # nearest-row phase error bounded by half the 5 degree pitch
            err = abs(math.degrees(phi) - math.degrees(phi_back))
            err = min(err, 360.0 - err)
            assert err <= 2.5 + 1e-9


def test_hashmap_lookup_circular_distance():
    hmap = hashmap_build(synthetic_insertion_loss(), g0_db=20.3)
    # phi just below 360 degrees snaps to the 355 or 0 row, not 360
    st = hashmap_lookup(hmap, 4.0, math.radians(358.0))
    assert st.phi_exp_deg in (355.0, 0.0)


def test_hashmap_lookup_range_errors():
    hmap = hashmap_build(synthetic_insertion_loss(), g0_db=20.3)
    with pytest.raises(RangeError):
        hashmap_lookup(hmap, 25.0, 0.0)   # would need negative attenuation
    with pytest.raises(RangeError):
        hashmap_lookup(hmap, -40.0, 0.0)  # beyond the 50 dB range


def test_hashmap_csv_round_trip(tmp_path):
    hmap = hashmap_build(synthetic_insertion_loss(), g0_db=20.3,
                         l_fwd_db=0.4)
    path = tmp_path / "hashmap.csv"
    hmap.to_csv(path)
    back = HashMap.from_csv(path, g0_db=20.3, l_fwd_db=0.4)
    assert back == hmap
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n1,2,0\n")
        HashMap.from_csv(bad, g0_db=20.3)


def test_hashmap_metadata(tmp_path):
    import json
    hmap = hashmap_build(synthetic_insertion_loss(), g0_db=20.3)
    path = tmp_path / "hashmap.meta.json"
    hmap.write_metadata(path, source="unit-test")
    meta = json.loads(path.read_text())
    assert meta["g0_db"] == 20.3
    assert meta["source"] == "unit-test"


def test_device_settings_fields():
    st = DeviceSettings(gamma_fwd_db=16.3, gamma_bwd_db=15.1,
                        phi_exp_deg=90.0)
    assert st.gamma_fwd_db == 16.3
    assert st.phi_exp_deg == 90.0
