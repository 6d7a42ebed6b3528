import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from nhdimer import (FieldState, IntegratorConfig, OperatingPoint,
                     StepUnderflow, Trajectory, default_params, integrate,
                     linear_equilibrium, linear_matrix, rhs)


def as_real4_array(traj):
    return np.column_stack([traj.states[:, 0].real, traj.states[:, 0].imag,
                            traj.states[:, 1].real, traj.states[:, 1].imag])


def test_matches_scipy_on_nonlinear_ringup(params):
    """Full saturable ring-up vs an independent high-order integrator."""
    op = OperatingPoint.undriven(params, 8.4, math.pi)
    span = 200.0 / params.kappa_c
    cfg = IntegratorConfig(t_span=span, n_samples=2001)
    traj = integrate(params, op, cfg)

    def f(t, y):
        st = FieldState(complex(y[0], y[1]), complex(y[2], y[3]))
        d = rhs(params, op, st)
        return [d.alpha_1.real, d.alpha_1.imag,
                d.alpha_2.real, d.alpha_2.imag]

    sol = solve_ivp(f, (0.0, span), [1e7, 0.0, 1e7, 0.0], method="DOP853",
                    rtol=1e-12, atol=1e-3, t_eval=traj.t)
    ref = sol.y.T
    scale = np.abs(ref).max()
    assert np.abs(as_real4_array(traj) - ref).max() / scale < 1e-5


def test_matches_matrix_exponential_in_linear_regime(params):
    """Driven below saturation the exact solution is affine in expm(A t)."""
    op = OperatingPoint.driven(params, 2.0, 0.7, -30.0)
    span = 60.0 / params.kappa_c
    cfg = IntegratorConfig(t_span=span, n_samples=301, rel_tol=1e-10,
                           abs_tol=1e-6,
                           initial_state=FieldState(1e3 + 0j, 1e3 + 0j))
    traj = integrate(params, op, cfg)
    assert np.abs(traj.states).max() ** 2 < params.n_sat  # stayed linear
    a = linear_matrix(params, op)
    eq = linear_equilibrium(params, op)
    eqv = np.array([eq.alpha_1, eq.alpha_2])
    x0 = np.array([1e3 + 0j, 1e3 + 0j]) - eqv
    scale = np.abs(eqv).max()
    for i in (1, 50, 150, 300):
        ref = expm(a * traj.t[i]) @ x0 + eqv
        assert np.abs(traj.states[i] - ref).max() / scale < 1e-8


def test_dense_output_grid_consistency(params):
    """Values on a coarse grid agree with a fine grid at shared times."""
    op = OperatingPoint.undriven(params, 8.4, math.pi)
    span = 100.0 / params.kappa_c
    fine = integrate(params, op,
                     IntegratorConfig(t_span=span, n_samples=1001))
    coarse = integrate(params, op,
                       IntegratorConfig(t_span=span, n_samples=101))
    # shared times match to linspace rounding; states to solver accuracy
    assert np.allclose(fine.t[::10], coarse.t, rtol=1e-12, atol=0.0)
    scale = np.abs(fine.states).max()
    assert np.abs(fine.states[::10] - coarse.states).max() / scale < 1e-7


def test_bitwise_determinism(params):
    op = OperatingPoint.undriven(params, 7.0, 2.0)
    cfg = IntegratorConfig(t_span=50.0 / params.kappa_c, n_samples=501)
    a = integrate(params, op, cfg)
    b = integrate(params, op, cfg)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.t, b.t)


def test_output_grid_and_flags(params):
    op = OperatingPoint.undriven(params, 4.0, 1.0)
    traj = integrate(params, op, IntegratorConfig(n_samples=1000,
                                                  t_span=1e-5))
    assert traj.t.shape == (1000,)
    assert traj.states.shape == (1000, 2)
    assert traj.t[0] == 0.0
    assert traj.t[-1] == pytest.approx(1e-5, rel=1e-15)
    assert traj.dt == pytest.approx(1e-5 / 999, rel=1e-12)
    assert not traj.driven
    assert traj.state_at(0).alpha_1 == 1e7 + 0j
    driven = integrate(params, OperatingPoint.driven(params, 2.0, 1.0, -30.0),
                       IntegratorConfig(n_samples=10, t_span=1e-7))
    assert driven.driven


def test_default_span_is_10000_over_kappa_c(params):
    op = OperatingPoint.undriven(params, 0.0, 1.0)
    traj = integrate(params, op, IntegratorConfig(n_samples=100))
    assert traj.t[-1] == pytest.approx(10000.0 / params.kappa_c, rel=1e-15)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(abs_tol=-1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(n_samples=1)
    with pytest.raises(ValueError):
        IntegratorConfig(t_span=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(initial_state=FieldState(math.inf + 0j, 0j))


def test_step_underflow_raises(params):
    # a max_step below the smallest representable step can never succeed
    op = OperatingPoint.undriven(params, 4.0, 1.0)
    cfg = IntegratorConfig(t_span=1e-4, n_samples=10, max_step=1e-22)
    with pytest.raises(StepUnderflow):
        integrate(params, op, cfg)


def test_trajectory_csv_round_trip(tmp_path, params):
    op = OperatingPoint.undriven(params, 7.0, 2.5)
    traj = integrate(params, op,
                     IntegratorConfig(t_span=2e-6, n_samples=64))
    path = tmp_path / "traj.csv"
    traj.write_csv(path)
    header = path.read_text().split("\n", 1)[0]
    assert header == "t_s,re_a1,im_a1,re_a2,im_a2"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (64, 5)
    # repr() serialization round-trips exactly
    assert np.array_equal(data[:, 0], traj.t)
    assert np.array_equal(data[:, 1] + 1j * data[:, 2], traj.states[:, 0])
    assert np.array_equal(data[:, 3] + 1j * data[:, 4], traj.states[:, 1])


def test_limit_cycle_amplitude_settles(sym_params):
    """Late-time photon number matches the closed-form n_LC."""
    from nhdimer import lc_amplitude
    op = OperatingPoint.undriven(sym_params, 8.4, math.pi)
    traj = integrate(sym_params, op,
                     IntegratorConfig(t_span=400.0 / sym_params.kappa_c,
                                      n_samples=4001))
    tail = traj.states[-400:, 1]
    n_tail = float(np.mean(np.abs(tail) ** 2))
    assert n_tail == pytest.approx(lc_amplitude(sym_params, op), rel=1e-4)
