"""Batch drivers for the figure-class results.

Weak-drive transmission maps, limit-cycle phase diagrams,
synchronization contours, drive-frequency sweeps, and the spectral
fitting helpers they rely on.  Cells of a sweep are independent work
items; failures invalidate the cell and the run continues.
"""

import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.signal import find_peaks

from .errors import FitFailed, IntegrationError
from .integrator import IntegratorConfig, integrate
from .model import drive_strength, linear_equilibrium
from .params import TWO_PI, OperatingPoint, PhysicalParams
from .spectral import (LC_FLOOR_DBM, Spectrum, dc_component, lc_extract,
                       photons_to_dbm, s21_db, spectrum_of)
from .stability import is_stable


@dataclass
class SweepGrid:
    """2-D sweep result: cells[i, j] belongs to (axis1[i], axis2[j])."""

    axis1_name: str
    axis1: np.ndarray
    axis2_name: str
    axis2: np.ndarray
    cells: np.ndarray
    valid: np.ndarray
    metadata: dict

    def __post_init__(self):
        expected = (len(self.axis1), len(self.axis2))
        if self.cells.shape != expected or self.valid.shape != expected:
            raise ValueError(f"grid shape {self.cells.shape} does not match "
                             f"axes {expected}")

    def to_csv(self, path) -> None:
        """Long-form dump: axis1, axis2, value, valid (deterministic bytes)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.axis1_name},{self.axis2_name},value,valid\n")
            for i, a in enumerate(self.axis1):
                for j, b in enumerate(self.axis2):
                    v = self.cells[i, j]
                    v_txt = "" if math.isnan(v) else repr(float(v))
                    fh.write(f"{float(a)!r},{float(b)!r},{v_txt},"
                             f"{int(self.valid[i, j])}\n")

    def metadata_json(self) -> str:
        return json.dumps(self.metadata, sort_keys=True, indent=2) + "\n"

    def write_metadata(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.metadata_json())


def _run_id(params: PhysicalParams, **knobs) -> str:
    """Deterministic run identifier: hash of parameters and sweep knobs.

    Wall-clock timestamps are deliberately left out so identical runs
    produce identical artifacts.
    """
    payload = {"params": params.to_config(), "knobs": knobs}
    blob = json.dumps(payload, sort_keys=True, default=repr).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _map_cells(n_tasks: int, worker, workers: int = 1) -> list:
    """Evaluate worker(k) for k in range(n_tasks), optionally threaded.

    The integrator kernel releases the GIL, so threads give real
    parallelism; results come back ordered by index either way.
    """
    if workers <= 1:
        return [worker(k) for k in range(n_tasks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(n_tasks)))


def transmission_sweep(params: PhysicalParams, phi: float, delta_g_list,
                       drive_freqs_hz, p_d_dbm: float = -30.0,
                       method: str = "ode", workers: int = 1,
                       cfg: IntegratorConfig | None = None) -> SweepGrid:
    """S21(delta_g, omega_d) map at fixed phi, in dB.

    ``method="ode"`` integrates the full nonlinear equations per cell;
    ``method="linear"`` evaluates the closed-form steady state of the
    linearized model instead (only faithful where the vacuum is stable
    and sub-saturation).  Warns if a nominally stable cell saturates,
    which means the probe power is too strong for a linear readout.
    """
    if method not in ("ode", "linear"):
        raise ValueError(f"unknown method {method!r}")
    delta_g_list = np.asarray(delta_g_list, dtype=float)
    freqs = np.asarray(drive_freqs_hz, dtype=float)
    n1, n2 = len(delta_g_list), len(freqs)
    cells = np.full((n1, n2), math.nan)
    valid = np.zeros((n1, n2), dtype=bool)
    saturated = 0

    def worker(k):
        i, j = divmod(k, n2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            op = OperatingPoint(float(delta_g_list[i]), phi,
                                TWO_PI * freqs[j], p_drive_dbm=p_d_dbm)
        eps = drive_strength(params, op)
        try:
            if method == "linear":
                dc = linear_equilibrium(params, op).alpha_2
                sat = False
            else:
                traj = integrate(params, op, cfg)
                dc = dc_component(traj)
                tail = traj.states[int(round(0.8 * len(traj.t))):]
                n_max = float(np.max(np.abs(tail) ** 2))
                sat = n_max > params.n_sat and is_stable(params, op).stable
            return s21_db(params, dc, eps), sat
        except (IntegrationError, ZeroDivisionError):
            return None, False

    results = _map_cells(n1 * n2, worker, workers)
    for k, (value, sat) in enumerate(results):
        i, j = divmod(k, n2)
        if value is not None:
            cells[i, j] = value
            valid[i, j] = True
        saturated += bool(sat)
    if saturated:
        warnings.warn(
            f"{saturated} stable cell(s) exceeded the saturation photon "
            f"number at P_d = {p_d_dbm:g} dBm; S21 is no longer probe-"
            "power independent there")
    meta = {
        "run_id": _run_id(params, kind="transmission", phi=phi,
                          delta_g=list(map(float, delta_g_list)),
                          freqs_hz=list(map(float, freqs)),
                          p_d_dbm=p_d_dbm, method=method),
        "kind": "transmission",
        "phi_rad": phi,
        "p_d_dbm": p_d_dbm,
        "method": method,
        "saturated_cells": saturated,
    }
    return SweepGrid("delta_g_db", delta_g_list, "drive_freq_hz", freqs,
                     cells, valid, meta)


def lc_phase_diagram(params: PhysicalParams, phi_grid, delta_g_grid,
                     workers: int = 1,
                     cfg: IntegratorConfig | None = None,
                     floor_dbm: float = LC_FLOOR_DBM) -> tuple:
    """Limit-cycle amplitude (dBm) and frequency (Hz) over (delta_g, phi).

    Per cell: undriven integration and limit-cycle extraction.  Cells
    that decay to vacuum report the floor amplitude and a masked
    (invalid, NaN) frequency.
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    delta_g_grid = np.asarray(delta_g_grid, dtype=float)
    n1, n2 = len(delta_g_grid), len(phi_grid)
    amp = np.full((n1, n2), math.nan)
    amp_valid = np.zeros((n1, n2), dtype=bool)
    freq = np.full((n1, n2), math.nan)
    freq_valid = np.zeros((n1, n2), dtype=bool)

    def worker(k):
        i, j = divmod(k, n2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            op = OperatingPoint.undriven(params, float(delta_g_grid[i]),
                                         float(phi_grid[j]))
        try:
            obs = lc_extract(params, integrate(params, op, cfg),
                             floor_dbm=floor_dbm)
            return obs
        except IntegrationError:
            return None

    results = _map_cells(n1 * n2, worker, workers)
    for k, obs in enumerate(results):
        i, j = divmod(k, n2)
        if obs is None:
            continue
        amp[i, j] = obs.amp_dbm
        amp_valid[i, j] = True
        if obs.present:
            freq[i, j] = obs.freq_offset
            freq_valid[i, j] = True
    run_id = _run_id(params, kind="phase_diagram",
                     phi=list(map(float, phi_grid)),
                     delta_g=list(map(float, delta_g_grid)),
                     floor_dbm=floor_dbm)
    meta_amp = {"run_id": run_id, "kind": "lc_amplitude_dbm",
                "floor_dbm": floor_dbm}
    meta_freq = {"run_id": run_id, "kind": "lc_freq_offset_hz",
                 "floor_dbm": floor_dbm}
    amp_grid = SweepGrid("delta_g_db", delta_g_grid, "phi_rad", phi_grid,
                         amp, amp_valid, meta_amp)
    freq_grid = SweepGrid("delta_g_db", delta_g_grid, "phi_rad", phi_grid,
                          freq, freq_valid, meta_freq)
    return amp_grid, freq_grid


def peak_count(spectrum, floor_dbm: float = LC_FLOOR_DBM,
               min_separation_bins: int = 5,
               prominence_db: float = 3.0) -> int:
    """Count distinct spectral peaks.

    A peak is a local maximum above ``floor_dbm`` that rises at least
    ``prominence_db`` above the higher of its two flanking minima;
    candidates closer than ``min_separation_bins`` merge into the
    larger one.
    """
    power = spectrum.power_dbm if isinstance(spectrum, Spectrum) \
        else np.asarray(spectrum, dtype=float)
    if power.size < 3:
        return 0
    idx, _ = find_peaks(power, height=floor_dbm,
                        distance=max(1, int(min_separation_bins)),
                        prominence=prominence_db)
    return int(len(idx))


def sync_power_contours(params: PhysicalParams, phi_grid, delta_g_grid,
                        p_d_list, drive_freq_hz: float | None = None,
                        workers: int = 1,
                        cfg: IntegratorConfig | None = None,
                        floor_dbm: float = LC_FLOOR_DBM,
                        min_separation_bins: int = 5,
                        prominence_db: float = 3.0) -> list:
    """Peak-count grids over (delta_g, phi), one per drive power.

    The drive sits at the cavity resonance unless ``drive_freq_hz``
    says otherwise.  A count of 1 marks either a plainly stable cell or
    a limit cycle locked to the drive; the synchronization region is
    the boundary of {count >= 2}.
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    delta_g_grid = np.asarray(delta_g_grid, dtype=float)
    f_d = params.omega_c / TWO_PI if drive_freq_hz is None else drive_freq_hz
    n1, n2 = len(delta_g_grid), len(phi_grid)
    grids = []
    for p_d in p_d_list:
        cells = np.full((n1, n2), math.nan)
        valid = np.zeros((n1, n2), dtype=bool)

        def worker(k):
            i, j = divmod(k, n2)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                op = OperatingPoint(float(delta_g_grid[i]),
                                    float(phi_grid[j]), TWO_PI * f_d,
                                    p_drive_dbm=float(p_d))
            try:
                spec = spectrum_of(params, integrate(params, op, cfg),
                                   snap_to_tone=True)
                return peak_count(spec, floor_dbm, min_separation_bins,
                                  prominence_db)
            except IntegrationError:
                return None

        results = _map_cells(n1 * n2, worker, workers)
        for k, count in enumerate(results):
            i, j = divmod(k, n2)
            if count is not None:
                cells[i, j] = count
                valid[i, j] = True
        meta = {
            "run_id": _run_id(params, kind="sync", p_d_dbm=float(p_d),
                              phi=list(map(float, phi_grid)),
                              delta_g=list(map(float, delta_g_grid)),
                              drive_freq_hz=f_d),
            "kind": "peak_count",
            "p_d_dbm": float(p_d),
            "drive_freq_hz": f_d,
        }
        grids.append(SweepGrid("delta_g_db", delta_g_grid, "phi_rad",
                               phi_grid, cells, valid, meta))
    return grids


def drive_frequency_sweep(params: PhysicalParams, drive_freqs_hz,
                          phi: float = math.pi, delta_g_db: float = 8.4,
                          p_d_dbm: float = 0.0, workers: int = 1,
                          cfg: IntegratorConfig | None = None) -> tuple:
    """Spectra of the driven system versus drive frequency.

    Returns (list of Spectrum, drive-bin power in dBm per drive
    frequency).  The drive-bin power is the emitted power of the DC
    component in the rotating frame; a spectrum entry is None where the
    integration failed.
    """
    freqs = np.asarray(drive_freqs_hz, dtype=float)

    def worker(j):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            op = OperatingPoint(delta_g_db, phi, TWO_PI * freqs[j],
                                p_drive_dbm=p_d_dbm)
        try:
            traj = integrate(params, op, cfg)
        except IntegrationError:
            return None, math.nan
        spec = spectrum_of(params, traj, snap_to_tone=True)
        dc_n = abs(dc_component(traj)) ** 2
        return spec, photons_to_dbm(params, dc_n)

    results = _map_cells(len(freqs), worker, workers)
    spectra = [r[0] for r in results]
    drive_dbm = np.array([r[1] for r in results])
    return spectra, drive_dbm


def locking_window_hz(drive_freqs_hz, counts,
                      center_freq_hz: float) -> float:
    """Width of the contiguous single-peak window containing the center.

    ``counts`` holds the spectral peak count per drive frequency (None
    marks a failed cell and never counts as locked).  The window is the
    contiguous run of count == 1 around the grid point nearest
    ``center_freq_hz``; 0.0 when even that point is unlocked.
    """
    freqs = np.asarray(drive_freqs_hz, dtype=float)
    vals = np.array([-1 if c is None else int(c) for c in counts])
    if len(vals) != len(freqs):
        raise ValueError("counts and drive_freqs_hz lengths differ")
    center = int(np.argmin(np.abs(freqs - center_freq_hz)))
    if vals[center] != 1:
        return 0.0
    lo = center
    while lo > 0 and vals[lo - 1] == 1:
        lo -= 1
    hi = center
    while hi < len(freqs) - 1 and vals[hi + 1] == 1:
        hi += 1
    step = float(freqs[1] - freqs[0]) if len(freqs) > 1 else 0.0
    return (hi - lo + 1) * step


@dataclass(frozen=True)
class LorentzianPeak:
    center_hz: float
    fwhm_hz: float
    height: float


@dataclass(frozen=True)
class LorentzianFit:
    """Multi-Lorentzian fit of a (frequency, linear magnitude) trace."""

    peaks: tuple
    baseline: float
    residual_rms: float

    @property
    def dominant(self) -> LorentzianPeak:
        return max(self.peaks, key=lambda p: p.height)

    @property
    def s21_max(self) -> float:
        return self.baseline + self.dominant.height

    @property
    def fwhm_hz(self) -> float:
        return self.dominant.fwhm_hz


def _lorentz_model(x, freq):
    baseline = x[0]
    total = np.full_like(freq, baseline)
    for m in range((len(x) - 1) // 3):
        h, c, w = x[1 + 3 * m: 4 + 3 * m]
        half = 0.5 * w
        total = total + h * half * half / ((freq - c) ** 2 + half * half)
    return total


def _initial_peaks(freq, mag, baseline, n_peaks, span, bin_hz):
    idx, _ = find_peaks(mag)
    if len(idx) < n_peaks:
        # fall back to the largest samples, endpoints included
        idx = np.argsort(mag)[-max(n_peaks, 1):]
    order = np.argsort(mag[idx])[::-1]
    chosen = sorted(idx[order[:n_peaks]], key=lambda k: freq[k])
    guesses = []
    for k in chosen:
        h = max(mag[k] - baseline, 1e-12 * max(np.max(mag), 1.0))
        level = baseline + 0.5 * h
        left = k
        while left > 0 and mag[left] > level:
            left -= 1
        right = k
        while right < len(mag) - 1 and mag[right] > level:
            right += 1
        width = max((freq[right] - freq[left]), bin_hz)
        guesses.append((h, float(freq[k]), float(width)))
    return guesses


def lorentzian_fit(freq_hz, magnitude, n_peaks: int = 1) -> LorentzianFit:
    """Least-squares fit of baseline plus n_peaks Lorentzians.

    ``magnitude`` is linear (e.g. linear S21).  Initialization from the
    n largest local maxima with half-height width estimates; damped
    least squares first, derivative-free simplex as a fallback.  Raises
    FitFailed with the residual level if neither converges.
    """
    freq = np.asarray(freq_hz, dtype=float)
    mag = np.asarray(magnitude, dtype=float)
    if n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    if freq.size != mag.size:
        raise ValueError("freq and magnitude lengths differ")
    if freq.size < 8 * n_peaks:
        raise ValueError(f"need at least {8 * n_peaks} samples for "
                         f"{n_peaks} peak(s), got {freq.size}")
    span = float(freq[-1] - freq[0])
    bin_hz = span / (freq.size - 1)
    baseline0 = float(np.min(mag))
    x0 = [baseline0]
    lower = [0.0]
    upper = [float(np.max(mag)) + 1e-30]
    for h, c, w in _initial_peaks(freq, mag, baseline0, n_peaks, span, bin_hz):
        x0 += [h, c, w]
        lower += [0.0, float(freq[0]), bin_hz]
        upper += [2.0 * float(np.max(mag)) + 1e-30, float(freq[-1]), span]
    x0 = np.clip(np.asarray(x0), lower, upper)

    def resid(x):
        return _lorentz_model(x, freq) - mag

    solution = None
    try:
        res = least_squares(resid, x0, bounds=(lower, upper), method="trf",
                            max_nfev=400 * len(x0))
        if res.success and np.all(np.isfinite(res.x)):
            solution = res.x
    except Exception:
        solution = None
    if solution is None:
        # derivative-free fallback; clip into bounds inside the objective
        def objective(x):
            xc = np.clip(x, lower, upper)
            r = resid(xc)
            return float(r @ r)

        nm = minimize(objective, x0, method="Nelder-Mead",
                      options={"maxiter": 4000, "xatol": 1e-10,
                               "fatol": 1e-20})
        xc = np.clip(nm.x, lower, upper)
        r = resid(xc)
        rms = math.sqrt(float(r @ r) / freq.size)
        if not nm.success or not np.all(np.isfinite(xc)):
            raise FitFailed("lorentzian fit did not converge",
                            residual_rms=rms)
        solution = xc
    r = resid(solution)
    rms = math.sqrt(float(r @ r) / freq.size)
    if not math.isfinite(rms):
        raise FitFailed("lorentzian fit produced non-finite residuals",
                        residual_rms=rms)
    peaks = []
    for m in range((len(solution) - 1) // 3):
        h, c, w = solution[1 + 3 * m: 4 + 3 * m]
        peaks.append(LorentzianPeak(center_hz=float(c), fwhm_hz=float(w),
                                    height=float(h)))
    peaks.sort(key=lambda p: p.center_hz)
    return LorentzianFit(peaks=tuple(peaks), baseline=float(solution[0]),
                         residual_rms=rms)
