import math

import numpy as np
import pytest

from nhdimer import (Trajectory, dc_component, dft, lc_extract,
                     photons_to_dbm, s21_db, spectrum_of)
from nhdimer.spectral import DBM_FLOOR, LC_FLOOR_DBM

N_LC_PI_84 = 27015225133908.496
AMP_PI_84_DBM = 1.9287351613409345


def synthetic_traj(amps_freqs, n=100000, dt=1e-9):
    """Trajectory whose alpha_2 is a sum of rotating tones."""
    t = np.linspace(0.0, (n - 1) * dt, n)
    a2 = np.zeros(n, dtype=complex)
    for amp, f in amps_freqs:
        a2 += amp * np.exp(2j * np.pi * f * t)
    states = np.column_stack([np.zeros(n, dtype=complex), a2])
    return Trajectory(t=t, states=states, dt=dt, driven=False)


def test_dft_matches_brute_force():
    rng = np.random.default_rng(3)
    x = rng.normal(size=17) + 1j * rng.normal(size=17)
    slow = np.array([
        sum(x[m] * np.exp(-2j * np.pi * k * m / 17) for m in range(17))
        for k in range(17)])
    assert np.allclose(dft(x), slow, rtol=1e-10, atol=1e-10)
    assert dft(x, n=32).shape == (32,)
    with pytest.raises(ValueError):
        dft(np.array([]))


def test_dc_component():
    traj = synthetic_traj([(2.5 - 1.0j, 0.0), (0.5, 4.0e6)], n=20000)
    dc = dc_component(traj)
    # the rotating tone averages out over many cycles
    assert dc == pytest.approx(2.5 - 1.0j, abs=1e-3)
    with pytest.raises(ValueError):
        dc_component(traj, discard_fraction=1.0)


def test_photons_to_dbm_anchor(params):
    assert photons_to_dbm(params, N_LC_PI_84) == pytest.approx(
        AMP_PI_84_DBM, rel=1e-12)
    assert photons_to_dbm(params, 0.0) == DBM_FLOOR
    assert photons_to_dbm(params, 1e-30) == DBM_FLOOR
    with pytest.raises(ValueError):
        photons_to_dbm(params, -1.0)


def test_s21_db(params):
    eps = 1e9
    dc_unit = eps / math.sqrt(params.kappa_in * params.kappa_out)
    assert s21_db(params, complex(dc_unit), eps) == pytest.approx(0.0,
                                                                  abs=1e-12)
    # 10x amplitude -> +20 dB
    assert s21_db(params, complex(10 * dc_unit), eps) == pytest.approx(
        20.0, abs=1e-12)
    assert s21_db(params, 0j, eps) == DBM_FLOOR
    with pytest.raises(ValueError):
        s21_db(params, complex(dc_unit), 0.0)


def test_spectrum_tone_placement_and_sign(params):
    """A tone rotating as e^{+i 2 pi f t} lands in the +f bin."""
    traj = synthetic_traj([(1e6, +3.2e6)])
    sp = spectrum_of(params, traj)
    k = int(np.argmax(sp.power_dbm))
    assert sp.freq[k] == pytest.approx(+3.2e6, abs=sp.bin_hz)
    assert np.all(np.diff(sp.freq) > 0)  # fftshift order, ascending
    assert sp.amp is None
    peak_n = 1e6 ** 2
    assert sp.power_dbm[k] == pytest.approx(photons_to_dbm(params, peak_n),
                                            rel=1e-6)
    neg = synthetic_traj([(1e6, -3.2e6)])
    sp_neg = spectrum_of(params, neg)
    assert sp_neg.freq[np.argmax(sp_neg.power_dbm)] == pytest.approx(
        -3.2e6, abs=sp_neg.bin_hz)


def test_spectrum_keep_amp_and_csv(tmp_path, params):
    traj = synthetic_traj([(1e6, 2e6)], n=4096)
    sp = spectrum_of(params, traj, keep_amp=True)
    assert sp.amp is not None and len(sp.amp) == len(sp.freq)
    path = tmp_path / "spec.csv"
    sp.write_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], sp.freq)
    assert np.array_equal(data[:, 1], sp.power_dbm)


def test_snap_to_tone_suppresses_leakage(params):
    """Coherent window trim kills the rectangular-window sinc skirts."""
    traj = synthetic_traj([(1e6, 3.1234567e6)])  # non-integer cycle count
    plain = spectrum_of(params, traj)
    snapped = spectrum_of(params, traj, snap_to_tone=True)
    n_plain = int(np.sum(plain.power_dbm > plain.power_dbm.max() - 40.0))
    n_snap = int(np.sum(snapped.power_dbm > snapped.power_dbm.max() - 40.0))
    assert n_plain > 5
    assert n_snap <= 2
    k = int(np.argmax(snapped.power_dbm))
    assert snapped.freq[k] == pytest.approx(3.1234567e6, abs=snapped.bin_hz)


def test_lc_extract_tone(params):
    n_photons = 1e12  # far above the vacuum guard
    traj = synthetic_traj([(math.sqrt(n_photons), +5.0e6)])
    obs = lc_extract(params, traj)
    assert obs.present
    assert obs.freq_offset == pytest.approx(+5.0e6, abs=2e4)
    assert obs.amp_dbm == pytest.approx(photons_to_dbm(params, n_photons),
                                        rel=1e-9)


def test_lc_extract_vacuum_guard(params):
    # mean photon number far below 1e-5 n_sat counts as decayed
    traj = synthetic_traj([(10.0, 5.0e6)], n=4096)
    obs = lc_extract(params, traj)
    assert not obs.present
    assert obs.amp_dbm == LC_FLOOR_DBM
    assert obs.freq_offset == 0.0


def test_lc_extract_rejects_driven(params):
    traj = synthetic_traj([(1e6, 5.0e6)], n=1024)
    driven = Trajectory(t=traj.t, states=traj.states, dt=traj.dt, driven=True)
    with pytest.raises(ValueError):
        lc_extract(params, driven)


def test_spectrum_length_mismatch_raises():
    from nhdimer import Spectrum
    with pytest.raises(ValueError):
        Spectrum(freq=np.arange(4.0), power_dbm=np.zeros(3))
