"""Algebraic building blocks of the coupled-cavity equations of motion.

The dimer evolves in the frame rotating at the drive frequency:

    d/dt (a1, a2) = A(|a1|^2, |a2|^2) (a1, a2) + (eps, 0)

with a saturable hopping rate J, per-cavity effective dissipation
kappa_i, and a phase-dependent coherent coupling f(phi).  Everything
here is a pure function of (params, operating point, state).
"""

import cmath
import math

import numpy as np

from .params import FieldState, OperatingPoint, PhysicalParams


def drive_strength(params: PhysicalParams, op: OperatingPoint) -> float:
    """Drive amplitude eps = sqrt(kappa_in P_in / hbar omega_d), in sqrt(photons)/s.

    Returns 0 for undriven operating points (p_drive_dbm is None).
    """
    if op.p_drive_dbm is None:
        return 0.0
    p_in = 10.0 ** ((op.p_drive_dbm - 30.0) / 10.0)
    return math.sqrt(params.kappa_in * p_in / (params.hbar * op.omega_d))


def hopping_j(params: PhysicalParams, delta_g_db: float, n: float) -> float:
    """Saturable hopping rate J(delta_g, n), rad/s.

    Equals kappa_c 10^(delta_g/20) up to the saturation photon number
    n_sat and compresses smoothly above it; continuous at n = n_sat and
    non-increasing in n.
    """
    if n < 0:
        raise ValueError(f"photon number must be non-negative, got {n!r}")
    j0 = params.kappa_c * 10.0 ** (delta_g_db / 20.0)
    if n <= params.n_sat:
        return j0
    # hbar omega_c kappa_c n_sat equals p_sat by definition of n_sat
    p_n = params.hbar * params.omega_c * params.kappa_c * n
    return j0 * (params.b_g + params.p_sat) / (params.b_g + p_n)


def kappa_eff(params: PhysicalParams, delta_g_db: float, n: float,
              cavity: int, model: str = "delta_g_dependent") -> float:
    """Effective dissipation of one cavity, rad/s.

    ``delta_g_dependent`` (the full model):
        kappa_i = 2(kappa_int,i + kappa_in/out,i + kappa_c) - J(delta_g, n)
    ``constant`` (gain-independent variant):
        kappa_i = kappa_int,i + kappa_in/out,i + kappa_c
    """
    if model == "delta_g_dependent":
        return params.kappa_sum(cavity) - hopping_j(params, delta_g_db, n)
    if model == "constant":
        return 0.5 * params.kappa_sum(cavity)
    raise ValueError(f"unknown dissipation model {model!r}")


def coherent_coupling_f(params: PhysicalParams, phi: float) -> complex:
    """Phase-dependent coherent coupling f(phi) = i J_c cos(phi/2) e^(i phi/2)."""
    return 1j * params.j_c * math.cos(phi / 2.0) * cmath.exp(1j * phi / 2.0)


def dynamical_matrix(params: PhysicalParams, op: OperatingPoint,
                     state: FieldState) -> np.ndarray:
    """Full nonlinear dynamical matrix A(|a1|^2, |a2|^2), 2x2 complex.

    The hop into each cavity saturates with the source cavity's photon
    number: the (1,2) element carries J(|a2|^2), the (2,1) element
    J(|a1|^2).
    """
    if not state.is_finite():
        raise ValueError("state must be finite")
    delta = params.omega_c - op.omega_d
    dg = op.delta_g_db
    j_from_1 = hopping_j(params, dg, state.n_1)
    j_from_2 = hopping_j(params, dg, state.n_2)
    kappa_1 = params.kappa_sum(1) - j_from_1
    kappa_2 = params.kappa_sum(2) - j_from_2
    f = coherent_coupling_f(params, op.phi)
    phase = cmath.exp(-1j * op.phi)
    return np.array([
        [-1j * delta - kappa_1, (-1j * j_from_2 - f) * phase],
        [-1j * j_from_1 - f, -1j * delta - kappa_2],
    ], dtype=complex)


def linear_matrix(params: PhysicalParams, op: OperatingPoint) -> np.ndarray:
    """Linearized dynamical matrix A0 (vacuum state)."""
    return dynamical_matrix(params, op, FieldState(0j, 0j))


def rhs(params: PhysicalParams, op: OperatingPoint,
        state: FieldState) -> FieldState:
    """Right-hand side of the equations of motion: A(state) alpha + eps B.

    The drive enters cavity 1 only.
    """
    a = dynamical_matrix(params, op, state)
    eps = drive_strength(params, op)
    alpha = np.array([state.alpha_1, state.alpha_2])
    d = a @ alpha
    return FieldState(d[0] + eps, d[1])


def linear_equilibrium(params: PhysicalParams, op: OperatingPoint) -> FieldState:
    """Driven steady state of the linear model, alpha_eq = -A0^(-1) eps B.

    Only meaningful where the vacuum is stable and amplitudes stay below
    saturation; used as the closed-form transmission oracle.
    """
    eps = drive_strength(params, op)
    a = linear_matrix(params, op)
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if det == 0:
        raise ZeroDivisionError("linear matrix is singular (marginal point)")
    # -A^(-1) (eps, 0) written out for the 2x2 inverse
    alpha_1 = -a[1, 1] * eps / det
    alpha_2 = a[1, 0] * eps / det
    return FieldState(alpha_1, alpha_2)
