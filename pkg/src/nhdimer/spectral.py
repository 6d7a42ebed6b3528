"""Spectra and scalar observables derived from trajectories.

Conventions: the DFT follows y[k] = sum_n x[n] e^(-2 pi i k n / N), so
a rotating-frame tone e^(+i delta t) lands in the bin at +delta/2pi.
At the limit cycle the cavity field rotates as e^(+i domega_LC t) in
the frame at omega_c, so the signed frequency of the dominant bin reads
off domega_LC = omega_c - omega_LC directly.  Per-bin powers convert
|y[k]/N|^2 to emitted dBm through the readout port.
"""

import math
from dataclasses import dataclass

import numpy as np

from .integrator import Trajectory
from .params import PhysicalParams

# reported floor for vanishing power
DBM_FLOOR = -200.0

# limit-cycle detection floor (baseline of the measured phase diagrams)
LC_FLOOR_DBM = -44.0

# vacuum guard: mean photon number below this fraction of n_sat counts
# as a decayed (stable) run
VACUUM_GUARD_FRACTION = 1e-5


@dataclass(frozen=True)
class Spectrum:
    """One-sided-complex FFT of a retained trajectory window.

    ``freq`` ascends from negative to positive (fftshift order), spaced
    by 1/(N_kept dt); ``amp`` is the raw DFT value per bin (None when
    dropped to save memory); ``power_dbm`` is the per-bin emitted power
    of cavity 2.
    """

    freq: np.ndarray
    power_dbm: np.ndarray
    amp: np.ndarray | None = None

    def __post_init__(self):
        if len(self.freq) != len(self.power_dbm):
            raise ValueError("freq and power_dbm lengths differ")

    @property
    def bin_hz(self) -> float:
        return float(self.freq[1] - self.freq[0])

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("freq_hz,power_dbm\n")
            for f, p in zip(self.freq, self.power_dbm):
                fh.write(f"{float(f)!r},{float(p)!r}\n")


@dataclass(frozen=True)
class LcObservation:
    """Limit-cycle presence, amplitude, and frequency offset.

    ``freq_offset`` is in Hz with the sign of domega_LC = omega_c -
    omega_LC; when ``present`` is false the amplitude is reported at the
    detection floor.
    """

    present: bool
    amp_dbm: float
    freq_offset: float


def dft(x, n: int | None = None) -> np.ndarray:
    """DFT y[k] = sum_n x[n] e^(-2 pi i k n / N) (FFT implementation).

    ``n`` optionally zero-pads; default is the input length.
    """
    x = np.asarray(x)
    if x.size == 0:
        raise ValueError("empty input")
    return np.fft.fft(x, n=n)


def _retained(traj: Trajectory, discard_fraction: float) -> np.ndarray:
    if not 0.0 <= discard_fraction < 1.0:
        raise ValueError(f"discard_fraction must be in [0, 1), got {discard_fraction!r}")
    start = int(round(discard_fraction * len(traj.t)))
    kept = traj.alpha_2[start:]
    if kept.size == 0:
        raise ValueError("retained window is empty")
    return kept


def dc_component(traj: Trajectory, discard_fraction: float = 0.2) -> complex:
    """Mean of alpha_2 over the retained window (the DC spectral bin)."""
    return complex(np.mean(_retained(traj, discard_fraction)))


def photons_to_dbm(params: PhysicalParams, n: float) -> float:
    """Emitted power of cavity 2 at photon number n, in dBm.

    P = hbar omega_c n kappa_out; values at or below the -200 dBm floor
    (including n = 0) are clamped there.
    """
    if n < 0:
        raise ValueError(f"photon number must be non-negative, got {n!r}")
    if n == 0:
        return DBM_FLOOR
    p_w = params.hbar * params.omega_c * n * params.kappa_out
    return max(10.0 * math.log10(p_w / 1e-3), DBM_FLOOR)


def s21_db(params: PhysicalParams, dc: complex, epsilon: float) -> float:
    """Transmission S21 = kappa_in kappa_out |dc|^2 / eps^2, in dB.

    Requires a driven run (eps > 0); a vanishing DC component is
    reported at the -200 dB floor.
    """
    if epsilon <= 0:
        raise ValueError("s21 requires a positive drive strength")
    n_dc = abs(dc) ** 2
    if n_dc == 0:
        return DBM_FLOOR
    value = 10.0 * math.log10(params.kappa_in * params.kappa_out * n_dc
                              / epsilon ** 2)
    return max(value, DBM_FLOOR)


def _refine_bin_offset(y_abs: np.ndarray, k: int) -> float:
    """Sub-bin offset of a rectangular-window tone near bin k.

    Three-point estimator on raw magnitudes (Quinn-style); returns a
    correction in (-0.5, 0.5) bins.
    """
    n = y_abs.size
    mag_c = y_abs[k]
    if mag_c == 0:
        return 0.0
    mag_l = y_abs[(k - 1) % n]
    mag_r = y_abs[(k + 1) % n]
    denom_r = mag_c + mag_r
    denom_l = mag_c + mag_l
    d = 0.0
    if denom_r > 0 and denom_l > 0:
        # rectangular-window magnitude ratio inversion on both sides
        dr = mag_r / denom_r
        dl = -mag_l / denom_l
        d = dr if mag_r >= mag_l else dl
    return min(max(d, -0.5), 0.5)


def spectrum_of(params: PhysicalParams, traj: Trajectory,
                discard_fraction: float = 0.2, keep_amp: bool = False,
                snap_to_tone: bool = False) -> Spectrum:
    """FFT spectrum of the retained alpha_2(t) window.

    With ``snap_to_tone`` the window length is trimmed (from the front)
    so the dominant non-DC tone covers a near-integer number of cycles.
    In the rotating frame every line of a driven-plus-limit-cycle state
    is a harmonic of one beat frequency while the drive response sits
    exactly at DC, so this coherent trim suppresses the rectangular-
    window skirts of the entire comb at once; used by the peak-counting
    pipelines.
    """
    kept = _retained(traj, discard_fraction)
    if snap_to_tone:
        y_abs = np.abs(np.fft.fft(kept))
        k = int(np.argmax(y_abs[1:])) + 1 if y_abs.size > 1 else 0
        # only snap when the candidate tone is a real feature
        n_tone = (y_abs[k] / kept.size) ** 2
        if k > 0 and photons_to_dbm(params, n_tone) > LC_FLOOR_DBM - 20.0:
            freq_bins = np.fft.fftfreq(kept.size)
            f_frac = abs(float(freq_bins[k]) + _refine_bin_offset(y_abs, k)
                         / kept.size)
            if f_frac > 0:
                cycles = math.floor(f_frac * kept.size)
                if cycles >= 1:
                    m = int(round(cycles / f_frac))
                    m = min(m, kept.size)
                    if m >= 16:
                        kept = kept[kept.size - m:]
    y = np.fft.fft(kept)
    freq = np.fft.fftfreq(kept.size, d=traj.dt)
    order = np.fft.fftshift(np.arange(kept.size))
    y = y[order]
    freq = freq[order]
    n_bin = np.abs(y / kept.size) ** 2
    power = np.full(n_bin.shape, DBM_FLOOR)
    nz = n_bin > 0
    p_w = params.hbar * params.omega_c * n_bin[nz] * params.kappa_out
    power[nz] = np.maximum(10.0 * np.log10(p_w / 1e-3), DBM_FLOOR)
    return Spectrum(freq=freq, power_dbm=power, amp=y if keep_amp else None)


def lc_extract(params: PhysicalParams, traj: Trajectory,
               discard_fraction: float = 0.2,
               floor_dbm: float = LC_FLOOR_DBM) -> LcObservation:
    """Limit-cycle amplitude and frequency from an undriven trajectory.

    Discards the leading ``discard_fraction`` of samples.  If the mean
    photon number of the retained window is below 1e-5 n_sat the run
    decayed to vacuum and no cycle is reported.  Otherwise the frequency
    comes from the signed bin of the dominant FFT peak (ties resolve to
    the lowest bin index in DC-first FFT order) and the amplitude from
    the time-domain mean |alpha_2|^2 over the last 20% of the retained
    window, which avoids spectral-leakage bias.
    """
    if traj.driven:
        raise ValueError("lc_extract expects an undriven trajectory")
    kept = _retained(traj, discard_fraction)
    mean_n = float(np.mean(np.abs(kept) ** 2))
    if mean_n < VACUUM_GUARD_FRACTION * params.n_sat:
        return LcObservation(present=False, amp_dbm=floor_dbm, freq_offset=0.0)
    tail = kept[int(round(0.8 * kept.size)):]
    steady_n = float(np.mean(np.abs(tail) ** 2))
    amp_dbm = photons_to_dbm(params, steady_n)
    y = np.fft.fft(kept)
    k_max = int(np.argmax(np.abs(y)))
    freq = float(np.fft.fftfreq(kept.size, d=traj.dt)[k_max])
    if amp_dbm < floor_dbm:
        return LcObservation(present=False, amp_dbm=floor_dbm, freq_offset=freq)
    return LcObservation(present=True, amp_dbm=amp_dbm, freq_offset=freq)
