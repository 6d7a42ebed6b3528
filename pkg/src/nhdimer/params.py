"""Physical parameters, operating points, and field states.

Unit convention: internally every rate and frequency is angular (rad/s)
and every power is in watts.  Configuration files and reports use
ordinary frequencies (MHz, GHz, i.e. omega/2pi), dB and dBm; conversion
happens exactly once at construction / serialization time and
round-trips to better than 1e-12 relative.
"""

import math
import warnings
from dataclasses import dataclass, replace

TWO_PI = 2.0 * math.pi

# reduced Planck constant, J s
HBAR = 1.054571817e-34

# soft validity window of the net-gain knob, dB; values outside are
# allowed but warn, since the device presets were calibrated inside it
DELTA_G_SOFT_RANGE_DB = (-4.6, 8.4)


def rate_from_mhz(value_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular rate in rad/s."""
    return TWO_PI * 1e6 * value_mhz


def rate_to_mhz(value: float) -> float:
    """Angular rate in rad/s -> ordinary frequency in MHz."""
    return value / (TWO_PI * 1e6)


def freq_from_ghz(value_ghz: float) -> float:
    """Ordinary frequency in GHz -> angular frequency in rad/s."""
    return TWO_PI * 1e9 * value_ghz


def freq_to_ghz(value: float) -> float:
    """Angular frequency in rad/s -> ordinary frequency in GHz."""
    return value / (TWO_PI * 1e9)


def dbm_to_watt(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watt_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w / 1e-3)


@dataclass(frozen=True)
class PhysicalParams:
    """Fixed device parameters of the two-cavity dimer.

    All rates angular (rad/s), powers in watts.  ``g0_db`` is the
    characteristic amplifier gain in dB; ``b_g`` the gain-curvature
    constant and ``p_sat`` the saturation power of the amplifiers.
    """

    omega_c: float        # common cavity resonance
    kappa_int_1: float    # internal loss, cavity 1
    kappa_int_2: float    # internal loss, cavity 2
    kappa_in: float       # drive-port coupling (cavity 1)
    kappa_out: float      # readout-port coupling (cavity 2)
    kappa_c: float        # inter-cavity coupling
    j_c: float            # additional coherent coupling strength
    g0_db: float          # amplifier gain, dB
    b_g: float            # gain-curvature constant, W
    p_sat: float          # amplifier saturation power, W
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("omega_c", "kappa_int_1", "kappa_int_2", "kappa_in",
                     "kappa_out", "kappa_c", "b_g", "p_sat", "hbar"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        # j_c = 0 is a meaningful special case (purely dissipative coupling)
        if not (self.j_c >= 0.0 and math.isfinite(self.j_c)):
            raise ValueError(f"j_c must be non-negative, got {self.j_c!r}")

    @property
    def n_sat(self) -> float:
        """Saturation photon number P_sat / (hbar omega_c kappa_c)."""
        return self.p_sat / (self.hbar * self.omega_c * self.kappa_c)

    @property
    def sigma(self) -> float:
        """Averaged single-cavity dissipation kappa_int + kappa_io + kappa_c.

        Uses the mean internal and port rates; equals the exact
        per-cavity value for symmetric parameter sets.  This is the
        Sigma entering all closed-form limit-cycle expressions.
        """
        kappa_int = 0.5 * (self.kappa_int_1 + self.kappa_int_2)
        kappa_io = 0.5 * (self.kappa_in + self.kappa_out)
        return kappa_int + kappa_io + self.kappa_c

    def kappa_sum(self, cavity: int) -> float:
        """2(kappa_int,i + kappa_in/out,i + kappa_c), the bare diagonal loss."""
        if cavity == 1:
            return 2.0 * (self.kappa_int_1 + self.kappa_in + self.kappa_c)
        if cavity == 2:
            return 2.0 * (self.kappa_int_2 + self.kappa_out + self.kappa_c)
        raise ValueError(f"cavity must be 1 or 2, got {cavity!r}")

    def symmetrized(self) -> "PhysicalParams":
        """Copy with internal and port rates replaced by their means."""
        kappa_int = 0.5 * (self.kappa_int_1 + self.kappa_int_2)
        kappa_io = 0.5 * (self.kappa_in + self.kappa_out)
        return replace(self, kappa_int_1=kappa_int, kappa_int_2=kappa_int,
                       kappa_in=kappa_io, kappa_out=kappa_io)

    @classmethod
    def from_config(cls, *, omega_c_ghz, kappa_int_1_mhz, kappa_int_2_mhz,
                    kappa_in_mhz, kappa_out_mhz, kappa_c_mhz, j_c_mhz,
                    g0_db, b_g_mw, p_sat_mw) -> "PhysicalParams":
        return cls(
            omega_c=freq_from_ghz(omega_c_ghz),
            kappa_int_1=rate_from_mhz(kappa_int_1_mhz),
            kappa_int_2=rate_from_mhz(kappa_int_2_mhz),
            kappa_in=rate_from_mhz(kappa_in_mhz),
            kappa_out=rate_from_mhz(kappa_out_mhz),
            kappa_c=rate_from_mhz(kappa_c_mhz),
            j_c=rate_from_mhz(j_c_mhz),
            g0_db=g0_db,
            b_g=b_g_mw * 1e-3,
            p_sat=p_sat_mw * 1e-3,
        )

    def to_config(self) -> dict:
        return {
            "omega_c_ghz": freq_to_ghz(self.omega_c),
            "kappa_int_1_mhz": rate_to_mhz(self.kappa_int_1),
            "kappa_int_2_mhz": rate_to_mhz(self.kappa_int_2),
            "kappa_in_mhz": rate_to_mhz(self.kappa_in),
            "kappa_out_mhz": rate_to_mhz(self.kappa_out),
            "kappa_c_mhz": rate_to_mhz(self.kappa_c),
            "j_c_mhz": rate_to_mhz(self.j_c),
            "g0_db": self.g0_db,
            "b_g_mw": self.b_g * 1e3,
            "p_sat_mw": self.p_sat * 1e3,
        }


def default_params() -> PhysicalParams:
    """Calibrated device parameters used in all numerical runs."""
    return PhysicalParams.from_config(
        omega_c_ghz=6.027,
        kappa_int_1_mhz=4.1,
        kappa_int_2_mhz=4.0,
        kappa_in_mhz=2.5,
        kappa_out_mhz=2.3,
        kappa_c_mhz=8.7,
        j_c_mhz=11.5,
        g0_db=20.3,
        b_g_mw=8.6,
        p_sat_mw=0.9981,
    )


def symmetric_params() -> PhysicalParams:
    """Symmetrized parameter set (averaged internal and port rates).

    The closed-form limit-cycle and normal-mode expressions assume equal
    per-cavity dissipation; this preset makes them exact.
    """
    return default_params().symmetrized()


@dataclass(frozen=True)
class OperatingPoint:
    """Tunable knobs of a single run.

    ``delta_g_db`` is the net hopping gain in dB, ``phi`` the
    non-reciprocal hopping phase (stored wrapped into [0, 2pi)),
    ``omega_d`` the drive/rotating-frame frequency in rad/s, and
    ``p_drive_dbm`` the drive power; ``None`` means undriven.
    """

    delta_g_db: float
    phi: float
    omega_d: float
    p_drive_dbm: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi!r}")
        object.__setattr__(self, "phi", self.phi % TWO_PI)
        lo, hi = DELTA_G_SOFT_RANGE_DB
        if not lo <= self.delta_g_db <= hi:
            warnings.warn(
                f"delta_g_db = {self.delta_g_db:g} dB is outside the "
                f"calibrated range [{lo:g}, {hi:g}] dB",
                stacklevel=2,
            )
        if self.omega_d <= 0 or not math.isfinite(self.omega_d):
            raise ValueError(f"omega_d must be strictly positive, got {self.omega_d!r}")

    @classmethod
    def undriven(cls, params: PhysicalParams, delta_g_db: float,
                 phi: float) -> "OperatingPoint":
        """Undriven run: epsilon = 0, rotating frame at omega_c."""
        return cls(delta_g_db=delta_g_db, phi=phi, omega_d=params.omega_c)

    @classmethod
    def driven(cls, params: PhysicalParams, delta_g_db: float, phi: float,
               p_drive_dbm: float, omega_d: float | None = None) -> "OperatingPoint":
        """Driven run; omega_d defaults to the cavity resonance."""
        omega = params.omega_c if omega_d is None else omega_d
        return cls(delta_g_db=delta_g_db, phi=phi, omega_d=omega,
                   p_drive_dbm=p_drive_dbm)


@dataclass(frozen=True)
class FieldState:
    """Complex field amplitude pair (units sqrt photons)."""

    alpha_1: complex
    alpha_2: complex

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (
            self.alpha_1.real, self.alpha_1.imag,
            self.alpha_2.real, self.alpha_2.imag))

    def as_real4(self) -> tuple:
        """Real 4-vector embedding [Re a1, Im a1, Re a2, Im a2]."""
        return (self.alpha_1.real, self.alpha_1.imag,
                self.alpha_2.real, self.alpha_2.imag)

    @classmethod
    def from_real4(cls, vec) -> "FieldState":
        return cls(complex(vec[0], vec[1]), complex(vec[2], vec[3]))

    @property
    def n_1(self) -> float:
        return abs(self.alpha_1) ** 2

    @property
    def n_2(self) -> float:
        return abs(self.alpha_2) ** 2


VACUUM = FieldState(0j, 0j)
