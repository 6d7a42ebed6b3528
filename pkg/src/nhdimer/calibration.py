"""Instrument-calibration mathematics.

Reflection (S11) fitting of a hanger-type quarter-wave resonator,
saturable-gain-profile fitting of the amplifier chain, and the hash-map
lookup table that converts target model parameters (delta_g, phi) into
attenuator/phase-shifter settings while compensating the phase
shifter's insertion-loss ripple.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import FitFailed, RangeError
from .params import TWO_PI

# digital attenuator range, dB
ATTENUATOR_RANGE_DB = (0.0, 50.0)


@dataclass(frozen=True)
class S11FitResult:
    """Fitted reflection parameters of one cavity port."""

    omega_res: float   # rad/s
    q_int: float
    q_c: float
    baseline: float    # linear magnitude far from resonance

    def __post_init__(self):
        if self.q_int <= 0 or self.q_c <= 0:
            raise ValueError("Q factors must be positive")

    @property
    def kappa_int(self) -> float:
        return self.omega_res / self.q_int

    @property
    def kappa_c(self) -> float:
        return self.omega_res / (2.0 * self.q_c)


def s11_model(omega_probe, fit: S11FitResult):
    """|S11| of a hanger-type quarter-wave resonator.

    |S11(w)| = baseline - | (w0/(2 Qc)) / (i(w0 - w) + w0(1/Qint + 1/Qc)) |

    ``omega_probe`` is angular (rad/s), scalar or array.
    """
    omega = np.asarray(omega_probe, dtype=float)
    kc = fit.omega_res / (2.0 * fit.q_c)
    total = fit.omega_res * (1.0 / fit.q_int + 1.0 / fit.q_c)
    dip = kc / np.sqrt((fit.omega_res - omega) ** 2 + total ** 2)
    return fit.baseline - dip


def s11_fit(freqs_hz, magnitudes) -> S11FitResult:
    """Fit the reflection dip, returning resonance, Qs, and baseline.

    Input frequencies are ordinary (Hz).  Initialization: baseline from
    the median of the outer quartiles, resonance at the minimum, width
    from the half-depth crossings.  Raises FitFailed when no dip stands
    out of the baseline noise or the optimizer does not converge.
    """
    freqs = np.asarray(freqs_hz, dtype=float)
    mags = np.asarray(magnitudes, dtype=float)
    if freqs.size != mags.size:
        raise ValueError("freqs and magnitudes lengths differ")
    if freqs.size < 16:
        raise ValueError(f"need at least 16 points, got {freqs.size}")
    omega = TWO_PI * freqs
    quartile = max(freqs.size // 4, 2)
    outer = np.concatenate([mags[:quartile], mags[-quartile:]])
    baseline0 = float(np.median(outer))
    noise = float(np.std(outer))
    k_min = int(np.argmin(mags))
    depth = baseline0 - float(mags[k_min])
    if depth <= max(5.0 * noise, 1e-12):
        raise FitFailed("no dip detected above the baseline noise")
    omega0 = float(omega[k_min])

    # half-depth crossing width -> total rate kappa_int + 2 kappa_c;
    # the dip term halves at detuning sqrt(3) * total
    level = baseline0 - 0.5 * depth
    left = k_min
    while left > 0 and mags[left] < level:
        left -= 1
    right = k_min
    while right < mags.size - 1 and mags[right] < level:
        right += 1
    width = abs(omega[right] - omega[left])
    if width <= 0:
        width = abs(omega[1] - omega[0])
    total0 = width / (2.0 * math.sqrt(3.0))
    kappa_c0 = depth * total0
    kappa_int0 = max(total0 - 2.0 * kappa_c0, 0.01 * total0)

    def resid(x):
        w0, k_int, k_c, base = x
        total = k_int + 2.0 * k_c
        return (base - k_c / np.sqrt((w0 - omega) ** 2 + total ** 2)) - mags

    span = omega[-1] - omega[0]
    x0 = np.array([omega0, kappa_int0, kappa_c0, baseline0])
    lower = [omega[0] - span, 1e-9 * total0, 1e-9 * total0, 0.0]
    upper = [omega[-1] + span, 100.0 * span, 100.0 * span,
             float(np.max(mags)) * 2.0 + 1.0]
    res = least_squares(resid, np.clip(x0, lower, upper),
                        bounds=(lower, upper), method="trf",
                        x_scale=np.abs(x0) + 1e-12, max_nfev=2000)
    if not res.success or not np.all(np.isfinite(res.x)):
        rms = math.sqrt(float(np.mean(res.fun ** 2))) if np.all(
            np.isfinite(res.fun)) else math.inf
        raise FitFailed("reflection fit did not converge", residual_rms=rms)
    w0, k_int, k_c, base = res.x
    return S11FitResult(omega_res=float(w0), q_int=float(w0 / k_int),
                        q_c=float(w0 / (2.0 * k_c)), baseline=float(base))


@dataclass(frozen=True)
class GainProfile:
    """Fitted saturable-amplifier parameters."""

    g0_db: float
    p_sat: float   # W
    b_g: float     # W

    def __post_init__(self):
        if self.p_sat <= 0 or self.b_g <= 0:
            raise ValueError("p_sat and b_g must be positive")


def gain_db_model(p_in, g0_db: float, p_sat: float, b_g: float):
    """Power gain in dB of the saturable chain versus input power (W).

    Flat at g0 up to p_sat; above it the amplitude gain compresses by
    f_G = (b_g + p_sat)/(b_g + p_in), i.e. the dB gain drops by
    20 log10 of the same factor.  Continuous at the knee.
    """
    p = np.asarray(p_in, dtype=float)
    f_g = np.where(p <= p_sat, 1.0, (b_g + p_sat) / (b_g + p))
    return g0_db + 20.0 * np.log10(f_g)


def gain_profile_fit(p_in_w, p_out_w) -> GainProfile:
    """Fit (input power, output power) samples to the saturable model.

    Works in dB-gain space.  The 1 dB compression point seeds p_sat;
    data that never compresses by at least 0.5 dB raises FitFailed
    ("no knee detected").
    """
    p_in = np.asarray(p_in_w, dtype=float)
    p_out = np.asarray(p_out_w, dtype=float)
    if p_in.size != p_out.size:
        raise ValueError("input and output arrays differ in length")
    if p_in.size < 8:
        raise ValueError(f"need at least 8 samples, got {p_in.size}")
    if np.any(p_in <= 0) or np.any(p_out <= 0):
        raise ValueError("powers must be strictly positive")
    order = np.argsort(p_in)
    p_in = p_in[order]
    p_out = p_out[order]
    gain = 10.0 * np.log10(p_out / p_in)
    quarter = max(p_in.size // 4, 2)
    g0_init = float(np.mean(gain[:quarter]))
    compression = g0_init - float(np.min(gain[-quarter:]))
    if compression < 0.5:
        raise FitFailed("no knee detected: gain never compresses by 0.5 dB")
    # first sample compressed by >= 1 dB seeds the saturation power
    knee = np.nonzero(gain <= g0_init - 1.0)[0]
    p_1db = float(p_in[knee[0]]) if knee.size else float(p_in[-1])
    p_sat0 = 0.6 * p_1db
    b_g0 = 5.0 * p_1db

    def resid(x):
        return gain_db_model(p_in, x[0], x[1], x[2]) - gain

    x0 = np.array([g0_init, p_sat0, b_g0])
    lower = [g0_init - 20.0, float(p_in[0]) * 1e-3, float(p_in[0]) * 1e-3]
    upper = [g0_init + 20.0, float(p_in[-1]) * 10.0, float(p_in[-1]) * 1e3]
    res = least_squares(resid, np.clip(x0, lower, upper),
                        bounds=(lower, upper), method="trf",
                        x_scale=np.abs(x0) + 1e-12, max_nfev=2000)
    if not res.success or not np.all(np.isfinite(res.x)):
        rms = math.sqrt(float(np.mean(res.fun ** 2))) if np.all(
            np.isfinite(res.fun)) else math.inf
        raise FitFailed("gain-profile fit did not converge", residual_rms=rms)
    return GainProfile(g0_db=float(res.x[0]), p_sat=float(res.x[1]),
                       b_g=float(res.x[2]))


@dataclass(frozen=True)
class HashMapRow:
    phi_exp_deg: float
    loss_db: float     # insertion loss L(phi_exp) of the backward arm
    outlier: bool


@dataclass(frozen=True)
class DeviceSettings:
    gamma_fwd_db: float
    gamma_bwd_db: float
    phi_exp_deg: float


@dataclass(frozen=True)
class HashMap:
    """Lookup table mapping (delta_g, phi) to attenuator settings.

    Stores the insertion-loss profile of the phase-shifter arm; the
    backward attenuation at a target is gamma = g0 - delta_g - L(phi),
    which keeps the net backward gain flat across phase settings.
    """

    rows: tuple
    g0_db: float
    l_fwd_db: float

    def active_rows(self) -> list:
        return [r for r in self.rows if not r.outlier]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("phi_exp_deg,loss_db,outlier\n")
            for r in self.rows:
                fh.write(f"{r.phi_exp_deg!r},{r.loss_db!r},{int(r.outlier)}\n")

    def write_metadata(self, path, source: str = "synthetic",
                       date: str | None = None) -> None:
        payload = {"g0_db": self.g0_db, "l_fwd_db": self.l_fwd_db,
                   "source": source, "date": date}
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")

    @classmethod
    def from_csv(cls, path, g0_db: float, l_fwd_db: float = 0.0) -> "HashMap":
        rows = []
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
            if not header.startswith("phi_exp_deg"):
                raise ValueError(f"unexpected hash-map header: {header!r}")
            for line in fh:
                phi_s, loss_s, out_s = line.strip().split(",")
                rows.append(HashMapRow(float(phi_s), float(loss_s),
                                       bool(int(out_s))))
        return cls(rows=tuple(rows), g0_db=g0_db, l_fwd_db=l_fwd_db)


def hashmap_build(calib_rows, g0_db: float, l_fwd_db: float = 0.0) -> HashMap:
    """Build the lookup table from calibration rows.

    ``calib_rows`` is an iterable of (phi_exp_deg, s21_db_at_gamma0):
    the backward-arm transmission at zero attenuation, from which the
    insertion loss follows as L = g0 - s21.  Rows outside [0, 360)
    degrees (the wraparound artifact of the phase shifter cycling
    through 360) are kept but flagged as outliers and excluded from
    lookups.
    """
    rows = []
    for phi_exp, s21_db_at_gamma0 in calib_rows:
        loss = g0_db - float(s21_db_at_gamma0)
        outlier = not 0.0 <= float(phi_exp) < 360.0
        rows.append(HashMapRow(float(phi_exp), loss, outlier))
    if not any(not r.outlier for r in rows):
        raise ValueError("no usable calibration rows")
    return HashMap(rows=tuple(rows), g0_db=g0_db, l_fwd_db=l_fwd_db)


def _check_attenuation(gamma_db: float, arm: str) -> None:
    lo, hi = ATTENUATOR_RANGE_DB
    if not lo <= gamma_db <= hi:
        raise RangeError(
            f"{arm} attenuation {gamma_db:.2f} dB is outside the "
            f"attenuator range [{lo:g}, {hi:g}] dB")


def hashmap_lookup(hmap: HashMap, delta_g_db: float,
                   phi: float) -> DeviceSettings:
    """Device settings realizing (delta_g, phi).

    ``phi`` is in radians; the nearest non-outlier phase row (circular
    distance) supplies the insertion loss, and both attenuations are
    recomputed exactly for the requested delta_g.  Raises RangeError
    when an attenuation leaves [0, 50] dB.
    """
    target_deg = math.degrees(phi % TWO_PI)
    rows = hmap.active_rows()
    best = min(rows, key=lambda r: min(
        abs(r.phi_exp_deg - target_deg),
        360.0 - abs(r.phi_exp_deg - target_deg)))
    gamma_bwd = hmap.g0_db - delta_g_db - best.loss_db
    gamma_fwd = hmap.g0_db - delta_g_db - hmap.l_fwd_db
    _check_attenuation(gamma_bwd, "backward")
    _check_attenuation(gamma_fwd, "forward")
    return DeviceSettings(gamma_fwd_db=gamma_fwd, gamma_bwd_db=gamma_bwd,
                          phi_exp_deg=best.phi_exp_deg)


def hashmap_implied(hmap: HashMap, settings: DeviceSettings) -> tuple:
    """Invert device settings back to (delta_g_fwd, delta_g_bwd, phi).

    The two net gains agree by construction; both are returned so the
    symmetrization objective is checkable.
    """
    row = min(hmap.active_rows(),
              key=lambda r: abs(r.phi_exp_deg - settings.phi_exp_deg))
    dg_bwd = hmap.g0_db - settings.gamma_bwd_db - row.loss_db
    dg_fwd = hmap.g0_db - settings.gamma_fwd_db - hmap.l_fwd_db
    return dg_fwd, dg_bwd, math.radians(settings.phi_exp_deg)


def synthetic_insertion_loss(n: int = 72, g0_db: float = 20.3,
                             base_db: float = 1.4,
                             ripple_db: float = 0.9) -> list:
    """Synthetic backward-arm calibration trace.

    Smooth non-monotonic insertion-loss ripple over [0, 360) degrees,
    plus the wraparound glitch row at 360 degrees that real phase
    shifters produce when cycling; returns (phi_exp_deg,
    s21_db_at_gamma0) rows for hashmap_build.
    """
    rows = []
    for k in range(n):
        phi_deg = 360.0 * k / n
        x = math.radians(phi_deg)
        loss = base_db + ripple_db * (0.6 * math.sin(x)
                                      + 0.3 * math.sin(2.0 * x + 0.7)
                                      + 0.1 * math.sin(3.0 * x + 2.1))
        rows.append((phi_deg, g0_db - loss))
    # wraparound outlier: the shifter re-homes and the trace glitches
    rows.append((360.0, g0_db - (base_db + 5.0)))
    return rows
