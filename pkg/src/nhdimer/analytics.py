"""Closed-form solution of the undriven dimer.

Normal-mode transform, linearized normal-mode rates, and the exact
limit-cycle amplitude, frequency, and local convergence rate.  The
formulas assume equal per-cavity dissipation; for asymmetric parameter
sets they are evaluated with the averaged rates (params.sigma), which
is what the acceptance tolerances absorb.
"""

import cmath
import math
from dataclasses import dataclass

from .model import hopping_j
from .params import FieldState, OperatingPoint, PhysicalParams
from .stability import kappa_0


@dataclass(frozen=True)
class NormalModeRates:
    """Linearized rates of the beta_+/- normal modes, all rad/s."""

    kappa_plus0: float
    kappa_minus0: float
    domega_plus0: float
    domega_minus0: float


@dataclass(frozen=True)
class LcSolution:
    """Closed-form limit-cycle observables."""

    n_lc: float         # photons per cavity
    domega_lc: float    # rad/s, convention domega = omega_c - omega_lc
    kappa_lc: float     # rad/s, local exponential convergence rate


def normal_modes(state: FieldState, phi: float) -> tuple:
    """Normal-mode amplitudes beta_+/- = (+/- e^(i phi/2) a1 - a2)/sqrt(2)."""
    rot = cmath.exp(0.5j * phi) * state.alpha_1
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    return ((rot - state.alpha_2) * inv_sqrt2,
            (-rot - state.alpha_2) * inv_sqrt2)


def normal_modes_inverse(beta_plus: complex, beta_minus: complex,
                         phi: float) -> FieldState:
    """Reconstruct (a1, a2) from the normal-mode amplitudes."""
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    alpha_1 = (beta_plus - beta_minus) * inv_sqrt2 * cmath.exp(-0.5j * phi)
    alpha_2 = -(beta_plus + beta_minus) * inv_sqrt2
    return FieldState(alpha_1, alpha_2)


def normal_mode_rates(params: PhysicalParams, op: OperatingPoint) -> NormalModeRates:
    """Linearized normal-mode dissipation and detuning.

    kappa_+/-,0 = kappa_0 -/+ J0 sin(phi/2)
    domega_+/-,0 = (omega_c - omega_d) -/+ (J0 + J_c) cos(phi/2)

    so that the eigenvalues of the linear matrix are
    -kappa_+/-,0 - i domega_+/-,0 (exact for symmetric dissipation).
    """
    j0 = hopping_j(params, op.delta_g_db, 0.0)
    k0 = kappa_0(params, op.delta_g_db)
    s = math.sin(op.phi / 2.0)
    c = math.cos(op.phi / 2.0)
    delta = params.omega_c - op.omega_d
    split = (j0 + params.j_c) * c
    return NormalModeRates(
        kappa_plus0=k0 - j0 * s,
        kappa_minus0=k0 + j0 * s,
        domega_plus0=delta - split,
        domega_minus0=delta + split,
    )


def _vacuum_unstable(params: PhysicalParams, delta_g_db: float,
                     phi: float) -> bool:
    """Closed-form instability test J0 (1 + sin(phi/2)) > 2 Sigma.

    Algebraically identical to the stability criterion
    J0 sin(phi/2)/kappa_0 >= 1 while kappa_0 > 0, so lc_amplitude turns
    on exactly where is_stable flips.  Points within 1e-12 relative of
    the boundary count as unstable: the threshold itself is only
    defined to float precision and the cycle collapses onto n_sat
    there, so returning the value is the right continuous limit.
    """
    j0 = hopping_j(params, delta_g_db, 0.0)
    s = math.sin(phi / 2.0)
    return j0 * (1.0 + s) > 2.0 * params.sigma * (1.0 - 1e-12)


def lc_amplitude(params: PhysicalParams, op: OperatingPoint) -> float | None:
    """Limit-cycle photon number n_LC per cavity, or None when stable.

    n_LC = [10^(dG/20) (1+sin(phi/2)) kappa_c (P_sat + b_G) - 2 b_G Sigma]
           / (2 kappa_c hbar omega_c Sigma)

    Exceeds n_sat whenever the vacuum is unstable and collapses to n_sat
    exactly at threshold.
    """
    if not _vacuum_unstable(params, op.delta_g_db, op.phi):
        return None
    s = math.sin(op.phi / 2.0)
    gain = 10.0 ** (op.delta_g_db / 20.0)
    sigma = params.sigma
    numer = gain * (1.0 + s) * params.kappa_c * (params.p_sat + params.b_g) \
        - 2.0 * params.b_g * sigma
    denom = 2.0 * params.kappa_c * params.hbar * params.omega_c * sigma
    return numer / denom


def lc_frequency(params: PhysicalParams, phi: float) -> float:
    """Limit-cycle detuning domega_LC = omega_c - omega_LC, rad/s.

    domega_LC = J_c cos(phi/2) + 2 Sigma cos(phi/2) / (1 + sin(phi/2))

    Independent of delta_g.  phi is taken as given (no wrapping): the
    expression is 4pi-periodic and antisymmetric about phi = pi.
    """
    s = math.sin(phi / 2.0)
    c = math.cos(phi / 2.0)
    return params.j_c * c + 2.0 * params.sigma * c / (1.0 + s)


def lc_convergence_rate(params: PhysicalParams, op: OperatingPoint) -> float:
    """Local exponential convergence rate kappa_LC toward the cycle, rad/s.

    kappa_LC = 4 Sigma P_LC / (P_LC + b_G) with the per-cavity coupled
    power P_LC = hbar omega_c kappa_c n_LC; reduces to
    4 Sigma P_sat / (P_sat + b_G) at threshold.
    """
    n_lc = lc_amplitude(params, op)
    if n_lc is None:
        raise ValueError(
            f"operating point (delta_g={op.delta_g_db:g} dB, phi={op.phi:g}) "
            "is vacuum-stable; no limit cycle to converge to")
    p_lc = params.hbar * params.omega_c * params.kappa_c * n_lc
    return 4.0 * params.sigma * p_lc / (p_lc + params.b_g)


def lc_solution(params: PhysicalParams, op: OperatingPoint) -> LcSolution | None:
    """Bundle of all three limit-cycle observables, None when stable."""
    n_lc = lc_amplitude(params, op)
    if n_lc is None:
        return None
    return LcSolution(
        n_lc=n_lc,
        domega_lc=lc_frequency(params, op.phi),
        kappa_lc=lc_convergence_rate(params, op),
    )
