"""Linear stability of the vacuum state and the instability threshold.

Stability is decided by the eigenvalues of the linearized dynamical
matrix (valid for any parameter set); the closed-form criterion
J0 sin(phi/2) / kappa_0 < 1 is carried along as a cross-check that is
meaningful only while kappa_0(delta_g) > 0.
"""

import cmath
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .model import hopping_j, linear_matrix
from .params import TWO_PI, OperatingPoint, PhysicalParams


@dataclass(frozen=True)
class StabilityReport:
    max_re_eigenvalue: float   # rad/s
    stable: bool
    region: str                # "I" (loss dominated) or "II" (gain dominated)
    criterion_lhs: float       # J0 sin(phi/2) / kappa_0
    eigenvalues: tuple         # both eigenvalues, descending real part


def eig2(m) -> tuple:
    """Eigenvalues of a 2x2 complex matrix, ordered by descending real part.

    Closed-form quadratic; ties in the real part fall back to descending
    imaginary part so the ordering is deterministic.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix entries must be finite")
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    sq = cmath.sqrt(tr * tr - 4.0 * det)
    # pick the larger-magnitude root first, recover the other from the
    # product to avoid cancellation
    r1 = 0.5 * (tr + sq) if abs(tr + sq) >= abs(tr - sq) else 0.5 * (tr - sq)
    r2 = det / r1 if r1 != 0 else 0.5 * (tr - sq)
    pair = sorted((r1, r2), key=lambda z: (-z.real, -z.imag))
    return (pair[0], pair[1])


def kappa_0(params: PhysicalParams, delta_g_db: float) -> float:
    """Symmetric linear dissipation kappa_0 = 2 Sigma - J0(delta_g), rad/s."""
    return 2.0 * params.sigma - hopping_j(params, delta_g_db, 0.0)


def is_stable(params: PhysicalParams, op: OperatingPoint) -> StabilityReport:
    """Classify an operating point by the eigenvalues of the linear matrix.

    Region I: J0 <= kappa_0 (always stable); Region II: J0 > kappa_0
    (stable only while the phase keeps the gain mode below threshold).
    """
    eigvals = eig2(linear_matrix(params, op))
    max_re = eigvals[0].real
    j0 = hopping_j(params, op.delta_g_db, 0.0)
    k0 = kappa_0(params, op.delta_g_db)
    lhs = j0 * math.sin(op.phi / 2.0) / k0 if k0 != 0 else math.inf
    region = "I" if j0 <= k0 else "II"
    return StabilityReport(
        max_re_eigenvalue=max_re,
        stable=max_re < 0.0,
        region=region,
        criterion_lhs=lhs,
        eigenvalues=eigvals,
    )


def threshold_gain(params: PhysicalParams, phi: float,
                   validity_cap_db: float | None = None) -> float | None:
    """Instability threshold gain dG*(phi) in dB, or None where invalid.

    dG* = 20 log10( 2 Sigma / (kappa_c (1 + sin(phi/2))) ) with the
    averaged dissipation Sigma.  At sin(phi/2) = 0 the formula meets the
    cap where kappa_0(dG) <= 0 and the single-unstable-mode picture
    breaks down, so None is returned there (and anywhere the value would
    reach ``validity_cap_db`` if one is supplied).
    """
    s = math.sin((phi % TWO_PI) / 2.0)
    cap = validity_cap_db
    if cap is None:
        cap = 20.0 * math.log10(2.0 * params.sigma / params.kappa_c)
    if s <= 0.0:
        return None
    value = 20.0 * math.log10(2.0 * params.sigma / (params.kappa_c * (1.0 + s)))
    if value >= cap:
        return None
    return value


def boundary_curve(params: PhysicalParams, n: int = 1000) -> np.ndarray:
    """Threshold curve sampled on a dense phi grid.

    Returns an (n, 2) array of rows (phi_rad, delta_g_star_db); cells
    where the threshold is undefined carry NaN.
    """
    phis = np.linspace(0.0, TWO_PI, n, endpoint=False)
    out = np.empty((n, 2))
    for i, phi in enumerate(phis):
        dg = threshold_gain(params, float(phi))
        out[i, 0] = phi
        out[i, 1] = math.nan if dg is None else dg
    return out


def write_boundary_csv(path, params: PhysicalParams, n: int = 1000) -> None:
    """Dump the threshold curve as two-column CSV (phi_rad, delta_g_star_db)."""
    curve = boundary_curve(params, n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("phi_rad,delta_g_star_db\n")
        for phi, dg in curve:
            dg_txt = "" if math.isnan(dg) else repr(float(dg))
            fh.write(f"{float(phi)!r},{dg_txt}\n")


def stability_agreement(params: PhysicalParams, n_points: int = 10000,
                        seed: int = 0, dead_band: float = 1e-9) -> dict:
    """Cross-check eigenvalue stability against the closed-form criterion.

    Draws random (delta_g, phi) with kappa_0 > 0, skips points within
    ``dead_band * kappa_c`` of the boundary, and counts disagreements
    between sign(max Re eigenvalue) and sign(criterion_lhs - 1).
    Also records the largest J_c-dependence of the max real part, as a
    fraction of kappa_c.

    Both the exact agreement and the J_c-invariance hold identically
    only for equal per-cavity dissipation; run this on
    params.symmetrized() (an asymmetry (kappa_1 - kappa_2)/2 = D shifts
    the true boundary away from the averaged closed form by O(D^2)).
    """
    rng = np.random.default_rng(seed)
    cap_db = 20.0 * math.log10(2.0 * params.sigma / params.kappa_c)
    params_jc0 = replace(params, j_c=0.0)
    disagreements = 0
    checked = 0
    skipped = 0
    max_jc_shift = 0.0
    band = dead_band * params.kappa_c
    while checked + skipped < n_points:
        dg = float(rng.uniform(-4.6, cap_db - 1e-6))
        phi = float(rng.uniform(0.0, TWO_PI))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            op = OperatingPoint(dg, phi, params.omega_c)
        report = is_stable(params, op)
        if abs(report.max_re_eigenvalue) < band:
            skipped += 1
            continue
        checked += 1
        closed_form_stable = report.criterion_lhs < 1.0
        if closed_form_stable != report.stable:
            disagreements += 1
        other = is_stable(params_jc0, op)
        shift = abs(other.max_re_eigenvalue - report.max_re_eigenvalue)
        max_jc_shift = max(max_jc_shift, shift / params.kappa_c)
    return {
        "checked": checked,
        "skipped": skipped,
        "disagreements": disagreements,
        "max_jc_shift": max_jc_shift,
    }
