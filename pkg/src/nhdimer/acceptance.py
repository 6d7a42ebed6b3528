"""Acceptance suite: closed-form anchors cross-checked against numerics.

Eleven independent criteria, each a pure function returning a
CriterionResult.  They validate the instability threshold, the
limit-cycle amplitude/frequency analytics against full integrations,
stability-criterion equivalence, the linear transmission oracle, the
linewidth collapse toward threshold, injection locking, the
calibration fit round-trips, and byte-level determinism of the CLI
artifacts.  ``run_all`` prints one pass/fail line per criterion.
"""

import contextlib
import filecmp
import functools
import io
import json
import math
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytics import lc_amplitude, lc_frequency, normal_mode_rates
from .calibration import (S11FitResult, gain_db_model, gain_profile_fit,
                          hashmap_build, hashmap_implied, hashmap_lookup,
                          s11_fit, s11_model, synthetic_insertion_loss)
from .experiments import (drive_frequency_sweep, lc_phase_diagram,
                          locking_window_hz, lorentzian_fit, peak_count,
                          transmission_sweep)
from .integrator import IntegratorConfig, integrate
from .model import drive_strength, hopping_j, linear_equilibrium
from .params import (TWO_PI, OperatingPoint, PhysicalParams, default_params,
                     symmetric_params)
from .spectral import dc_component, lc_extract, s21_db
from .stability import stability_agreement, threshold_gain

# the five unstable reference points shared by criteria 3 and 4
LC_POINTS = ((math.pi, 8.4), (math.pi / 2, 8.4), (3 * math.pi / 4, 7.0),
             (5 * math.pi / 4, 7.0), (3 * math.pi / 2, 8.4))


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:02d} {status}  {self.name}: " \
               f"{self.detail}"


def _extraction_bin_hz(params: PhysicalParams,
                       cfg: IntegratorConfig | None = None,
                       discard_fraction: float = 0.2) -> float:
    """Frequency resolution of the limit-cycle extractor's window."""
    cfg = cfg or IntegratorConfig()
    t_end = cfg.t_span if cfg.t_span is not None else 10000.0 / params.kappa_c
    dt = t_end / (cfg.n_samples - 1)
    n_keep = cfg.n_samples - int(discard_fraction * cfg.n_samples)
    return 1.0 / (n_keep * dt)


@functools.lru_cache(maxsize=4)
def _lc_runs(preset: str) -> tuple:
    """Integrations at the five reference points, cached across criteria."""
    params = symmetric_params() if preset == "sym" else default_params()
    runs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for phi, dg in LC_POINTS:
            op = OperatingPoint.undriven(params, dg, phi)
            traj = integrate(params, op)
            tail = traj.states[int(round(0.8 * len(traj.t))):]
            steady_n2 = float(np.mean(np.abs(tail[:, 1]) ** 2))
            obs = lc_extract(params, traj)
            runs.append((op, steady_n2, obs))
    return params, tuple(runs)


def criterion_1(workers: int = 1) -> CriterionResult:
    """Instability threshold at phi = pi lands on the quoted value."""
    value = threshold_gain(symmetric_params(), math.pi)
    passed = value is not None and 4.72 <= value <= 4.92
    return CriterionResult(1, "instability threshold",
                           passed, f"threshold_gain(pi) = {value:.4f} dB, "
                                   f"window [4.72, 4.92]")


def criterion_2(workers: int = 1) -> CriterionResult:
    """Limit-cycle photon number collapses onto n_sat at threshold."""
    params = default_params()
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for phi in np.linspace(0.1, TWO_PI - 0.1, 50):
            dg_star = threshold_gain(params, float(phi))
            if dg_star is None:
                return CriterionResult(2, "bifurcation continuity", False,
                                       f"threshold undefined at phi={phi:g}")
            op = OperatingPoint.undriven(params, dg_star, float(phi))
            n_lc = lc_amplitude(params, op)
            if n_lc is None:
                return CriterionResult(2, "bifurcation continuity", False,
                                       f"no cycle at threshold, phi={phi:g}")
            worst = max(worst, abs(n_lc - params.n_sat) / params.n_sat)
    return CriterionResult(2, "bifurcation continuity", worst < 1e-9,
                           f"max |n_LC(threshold) - n_sat|/n_sat = "
                           f"{worst:.3e} (< 1e-9)")


def criterion_3(workers: int = 1) -> CriterionResult:
    """Steady photon number from integration matches the closed form."""
    details = []
    passed = True
    for preset, tol in (("sym", 0.01), ("tab", 0.03)):
        params, runs = _lc_runs(preset)
        worst = 0.0
        for op, steady_n2, _ in runs:
            n_lc = lc_amplitude(params, op)
            worst = max(worst, abs(steady_n2 - n_lc) / n_lc)
        passed &= worst < tol
        details.append(f"{preset}: max rel {worst:.2e} (tol {tol:g})")
    return CriterionResult(3, "limit-cycle amplitude vs analytics", passed,
                           "; ".join(details))


def criterion_4(workers: int = 1) -> CriterionResult:
    """Extracted limit-cycle frequency matches the closed form."""
    params, runs = _lc_runs("sym")
    tol = 2.0 * _extraction_bin_hz(params)
    worst = 0.0
    zero_err = None
    for op, _, obs in runs:
        expected = lc_frequency(params, op.phi) / TWO_PI
        err = abs(obs.freq_offset - expected)
        worst = max(worst, err)
        if abs(op.phi - math.pi) < 1e-12:
            zero_err = abs(obs.freq_offset)
    passed = worst <= tol and zero_err is not None and zero_err <= tol
    return CriterionResult(4, "limit-cycle frequency vs analytics", passed,
                           f"max |df| = {worst:.0f} Hz, |df(pi)| = "
                           f"{zero_err:.0f} Hz (tol 2 bins = {tol:.0f} Hz)")


def criterion_5(workers: int = 1) -> CriterionResult:
    """Limit-cycle frequency is anti-symmetric about phi = pi."""
    params = default_params()
    worst_rel = 0.0
    for x in np.linspace(1e-3, 3.0, 100):
        f_hi = lc_frequency(params, math.pi + float(x))
        f_lo = lc_frequency(params, math.pi - float(x))
        worst_rel = max(worst_rel,
                        abs(f_hi + f_lo) / max(abs(f_hi), abs(f_lo)))
    analytic_ok = worst_rel < 1e-12

    offsets = (math.pi / 4, math.pi / 2, 3 * math.pi / 4)
    phi_grid = sorted([math.pi - x for x in offsets]
                      + [math.pi + x for x in offsets])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, freq_grid = lc_phase_diagram(params, phi_grid, [7.0, 8.4],
                                        workers=workers)
    tol = 2.0 * _extraction_bin_hz(params)
    worst_hz = 0.0
    n_pairs = 0
    for i in range(len(freq_grid.axis1)):
        for k, x in enumerate(offsets):
            j_lo, j_hi = len(offsets) - 1 - k, len(offsets) + k
            if freq_grid.valid[i, j_lo] and freq_grid.valid[i, j_hi]:
                n_pairs += 1
                worst_hz = max(worst_hz, abs(freq_grid.cells[i, j_lo]
                                             + freq_grid.cells[i, j_hi]))
    numeric_ok = n_pairs >= 4 and worst_hz <= tol
    return CriterionResult(
        5, "frequency anti-symmetry about pi", analytic_ok and numeric_ok,
        f"analytic max rel {worst_rel:.2e} (< 1e-12); numeric max "
        f"|f(pi+x)+f(pi-x)| = {worst_hz:.0f} Hz over {n_pairs} pairs "
        f"(tol {tol:.0f})")


def criterion_6(workers: int = 1) -> CriterionResult:
    """Closed-form stability equals eigenvalue sign; Re is J_c-invariant."""
    report = stability_agreement(symmetric_params(), n_points=10000, seed=0)
    passed = report["disagreements"] == 0 and report["max_jc_shift"] <= 1e-9
    return CriterionResult(
        6, "stability criterion equivalence", passed,
        f"{report['checked']} points, {report['disagreements']} "
        f"disagreements, J_c shift {report['max_jc_shift']:.2e} kappa_c "
        f"(skipped {report['skipped']})")


def criterion_7(workers: int = 1) -> CriterionResult:
    """Weak-drive S21 equals the linear steady state; splitting checks."""
    params = default_params()
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for phi in (0.0, math.pi):
            for dg in (0.0, 2.0, 4.0):
                for off in (-8e6, 0.0, 5e6):
                    op = OperatingPoint(dg, phi,
                                        params.omega_c + TWO_PI * off,
                                        p_drive_dbm=-30.0)
                    eps = drive_strength(params, op)
                    lin = s21_db(params,
                                 linear_equilibrium(params, op).alpha_2, eps)
                    ode = s21_db(params, dc_component(integrate(params, op)),
                                 eps)
                    rel = abs(10 ** (ode / 20) - 10 ** (lin / 20)) \
                        / 10 ** (lin / 20)
                    worst = max(worst, rel)
        center = params.omega_c / TWO_PI
        freqs = np.linspace(center - 55e6, center + 55e6, 111)
        grid = transmission_sweep(params, 0.0, [8.4], freqs,
                                  p_d_dbm=-30.0, workers=workers)
    power = 10.0 ** (grid.cells[0] / 10.0)
    fit = lorentzian_fit(freqs, power, n_peaks=2)
    centers = sorted(pk.center_hz for pk in fit.peaks)
    split = centers[1] - centers[0]
    expected = 2.0 * (hopping_j(params, 8.4, 0.0) + params.j_c) / TWO_PI
    split_rel = abs(split - expected) / expected
    passed = worst < 0.01 and split_rel < 0.05
    return CriterionResult(
        7, "linear transmission oracle", passed,
        f"max linear-vs-ode rel {worst:.2e} (< 1e-2); splitting "
        f"{split / 1e6:.2f} MHz vs {expected / 1e6:.2f} "
        f"(rel {split_rel:.3f} < 0.05)")


def criterion_8(workers: int = 1) -> CriterionResult:
    """Transmission linewidth tracks 2 kappa_+0 and collapses with gain."""
    params = default_params()
    center = params.omega_c / TWO_PI
    freqs = np.linspace(center - 30e6, center + 30e6, 121)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for dg in (2.75, 3.25, 3.75, 4.25):
            grid = transmission_sweep(params, math.pi, [dg], freqs,
                                      p_d_dbm=-30.0, workers=workers)
            power = 10.0 ** (grid.cells[0] / 10.0)
            fwhm = lorentzian_fit(freqs, power, n_peaks=1).fwhm_hz
            rates = normal_mode_rates(
                params, OperatingPoint.undriven(params, dg, math.pi))
            expected = 2.0 * rates.kappa_plus0 / TWO_PI
            rows.append((dg, fwhm, abs(fwhm - expected) / expected))
    worst = max(rel for _, _, rel in rows)
    decreasing = all(rows[k + 1][1] < rows[k][1] for k in range(len(rows) - 1))
    passed = worst < 0.10 and decreasing
    return CriterionResult(
        8, "linewidth collapse below threshold", passed,
        f"max rel {worst:.3f} (< 0.10), strictly decreasing: {decreasing} "
        f"[FWHM MHz: " + ", ".join(f"{fw / 1e6:.2f}" for _, fw, _ in rows)
        + "]")


def criterion_9(workers: int = 1) -> CriterionResult:
    """Locking window grows with drive power; unlocked spectra show >= 3 peaks."""
    params = default_params()
    center = params.omega_c / TWO_PI
    freqs = np.linspace(center - 4e6, center + 4e6, 41)
    windows = {}
    outside_ok = True
    min_outside = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for p_d in (0.0, 4.0):
            spectra, _ = drive_frequency_sweep(params, freqs, phi=math.pi,
                                               delta_g_db=8.4, p_d_dbm=p_d,
                                               workers=workers)
            counts = [None if s is None else peak_count(s) for s in spectra]
            w = locking_window_hz(freqs, counts, center)
            windows[p_d] = w
            for c, f in zip(counts, freqs):
                if abs(f - center) > w / 2:
                    if c is None or c < 3:
                        outside_ok = False
                    if c is not None:
                        min_outside = c if min_outside is None \
                            else min(min_outside, c)
    passed = windows[4.0] > windows[0.0] > 0.0 and outside_ok
    return CriterionResult(
        9, "injection locking window", passed,
        f"window {windows[0.0] / 1e6:.2f} MHz @ 0 dBm -> "
        f"{windows[4.0] / 1e6:.2f} MHz @ 4 dBm; min peak count outside "
        f"= {min_outside}")


def criterion_10(workers: int = 1) -> CriterionResult:
    """Calibration fits recover synthetic truth; hash map round-trips."""
    problems = []
    # reflection fit
    truth = S11FitResult(omega_res=TWO_PI * 6.034e9,
                         q_int=6.034e9 / 5.7e6,
                         q_c=6.034e9 / (2 * 9.9e6), baseline=1.0)
    freqs = np.linspace(6.034e9 - 60e6, 6.034e9 + 60e6, 401)
    mags = s11_model(TWO_PI * freqs, truth)
    rng = np.random.default_rng(12345)
    for tag, data, tol in (("clean", mags, 0.01),
                           ("1% noise",
                            mags * (1 + 0.01 * rng.standard_normal(mags.size)),
                            0.05)):
        fit = s11_fit(freqs, data)
        errs = (abs(fit.omega_res - truth.omega_res) / truth.omega_res,
                abs(fit.kappa_int - truth.kappa_int) / truth.kappa_int,
                abs(fit.kappa_c - truth.kappa_c) / truth.kappa_c)
        if max(errs) >= tol:
            problems.append(f"s11 {tag}: rel {max(errs):.3f} >= {tol}")
    # gain fit
    g_true = (20.3, 0.9981e-3, 8.6e-3)
    p_in = np.logspace(-6, -1.7, 60)
    p_out = p_in * 10 ** (gain_db_model(p_in, *g_true) / 10)
    for tag, data, tol in (("clean", p_out, 0.01),
                           ("1% noise",
                            p_out * (1 + 0.01 * rng.standard_normal(p_out.size)),
                            0.05)):
        fit = gain_profile_fit(p_in, data)
        errs = (abs(fit.g0_db - g_true[0]) / g_true[0],
                abs(fit.p_sat - g_true[1]) / g_true[1],
                abs(fit.b_g - g_true[2]) / g_true[2])
        if max(errs) >= tol:
            problems.append(f"gain {tag}: rel {max(errs):.3f} >= {tol}")
    # hash-map round trip
    hmap = hashmap_build(synthetic_insertion_loss(n=72, g0_db=20.3),
                         g0_db=20.3)
    res_deg = 360.0 / 72
    worst_db = worst_phi = 0.0
    for dg in (0.0, 4.0, 8.4):
        for phi in np.linspace(0.05, TWO_PI - 0.05, 17):
            settings = hashmap_lookup(hmap, dg, float(phi))
            dg_fwd, dg_bwd, phi_back = hashmap_implied(hmap, settings)
            worst_db = max(worst_db, abs(dg_fwd - dg), abs(dg_bwd - dg))
            dphi = abs(phi_back - phi) % TWO_PI
            worst_phi = max(worst_phi, min(dphi, TWO_PI - dphi))
    if worst_db > 0.1:
        problems.append(f"hashmap dg err {worst_db:.3f} dB > 0.1")
    if math.degrees(worst_phi) > res_deg:
        problems.append(f"hashmap phi err {math.degrees(worst_phi):.2f} deg "
                        f"> grid {res_deg:.2f}")
    detail = "; ".join(problems) if problems else (
        f"s11/gain within 1% (5% noisy); hashmap dg {worst_db:.3f} dB, "
        f"phi {math.degrees(worst_phi):.2f} deg (grid {res_deg:.1f})")
    return CriterionResult(10, "fit round-trips", not problems, detail)


def criterion_11(workers: int = 1) -> CriterionResult:
    """Repeated phase-diagram CLI runs produce byte-identical artifacts."""
    from .cli import main  # local import: cli imports this module

    config = {
        "grid": {"phi_min_rad": 0.6, "phi_max_rad": 5.7, "phi_points": 6,
                 "delta_g_min_db": 3.0, "delta_g_max_db": 8.4,
                 "delta_g_points": 4},
        "integrator": {"n_samples": 20000},
        "output": {"formats": ["csv", "svg", "json"]},
        "experiment": "phase-diagram",
    }
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg_path = tmp / "config.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        outs = []
        for k in (1, 2):
            out = tmp / f"run{k}"
            with contextlib.redirect_stdout(io.StringIO()):
                code = main(["phase-diagram", "--config", str(cfg_path),
                             "--out", str(out), "--workers", str(workers)])
            if code != 0:
                return CriterionResult(11, "artifact determinism", False,
                                       f"run {k} exited {code}")
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        if names != sorted(p.name for p in outs[1].iterdir()):
            return CriterionResult(11, "artifact determinism", False,
                                   "runs produced different file sets")
        match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names,
                                                   shallow=False)
        passed = not mismatch and not errors
        detail = f"{len(match)} artifacts byte-identical" if passed else \
            f"mismatched: {mismatch or errors}"
    return CriterionResult(11, "artifact determinism", passed, detail)


ALL_CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4,
                criterion_5, criterion_6, criterion_7, criterion_8,
                criterion_9, criterion_10, criterion_11)


def run_all(workers: int = 1, stream=None) -> list:
    """Run every criterion, optionally printing one line each."""
    results = []
    for fn in ALL_CRITERIA:
        result = fn(workers=workers)
        results.append(result)
        if stream is not None:
            print(result.line(), file=stream, flush=True)
    return results
