"""Adaptive Dormand-Prince (RK45) integration of the dimer equations.

The complex pair is embedded as the real 4-vector
[Re a1, Im a1, Re a2, Im a2].  Steps are taken with the 5th-order
solution, error-controlled against the embedded 4th-order one, and the
uniform output grid is filled from the quartic dense-output
interpolant.  The stepping kernel is numba-compiled and releases the
GIL so sweep drivers can run cells on a thread pool.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import NonFiniteState, StepUnderflow
from .model import coherent_coupling_f, drive_strength
from .params import FieldState, OperatingPoint, PhysicalParams

# Dormand-Prince 5(4) tableau (local extrapolation).  _E is the
# difference between the 5th- and 4th-order weights including the
# first-same-as-last seventh stage; _P holds the quartic dense-output
# interpolant with the standard optimal free coefficient.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200,
               -22 / 525, 1 / 40])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

# packed parameter vector layout for the jitted kernel
# 0: delta = omega_c - omega_d      7: p_sat
# 1: 2(kint1 + kin + kc)            8: Re f(phi)
# 2: 2(kint2 + kout + kc)           9: Im f(phi)
# 3: j0 = kappa_c 10^(dG/20)       10: cos(phi)   [e^(-i phi) real part]
# 4: n_sat                         11: -sin(phi)  [e^(-i phi) imag part]
# 5: hbar omega_c kappa_c          12: eps
# 6: b_g


@njit(cache=True, nogil=True)
def _rhs4(y, p, out):
    a1 = complex(y[0], y[1])
    a2 = complex(y[2], y[3])
    n1 = y[0] * y[0] + y[1] * y[1]
    n2 = y[2] * y[2] + y[3] * y[3]
    j1 = p[3]
    if n1 > p[4]:
        j1 = p[3] * (p[6] + p[7]) / (p[6] + p[5] * n1)
    j2 = p[3]
    if n2 > p[4]:
        j2 = p[3] * (p[6] + p[7]) / (p[6] + p[5] * n2)
    f = complex(p[8], p[9])
    phase = complex(p[10], p[11])
    d1 = complex(-(p[1] - j1), -p[0]) * a1 \
        + (complex(0.0, -j2) - f) * phase * a2 + p[12]
    d2 = (complex(0.0, -j1) - f) * a1 + complex(-(p[2] - j2), -p[0]) * a2
    out[0] = d1.real
    out[1] = d1.imag
    out[2] = d2.real
    out[3] = d2.imag


@njit(cache=True, nogil=True)
def _dp45(y0, p, t_end, t_out, rtol, atol, max_step, min_step, A, B, E, P):
    n_out = t_out.shape[0]
    yout = np.empty((n_out, 4))
    K = np.empty((7, 4))
    Q = np.empty((4, 4))
    y = y0.copy()
    y_new = np.empty(4)
    y_stage = np.empty(4)
    f_tmp = np.empty(4)
    t = 0.0
    n_accepted = 0

    _rhs4(y, p, f_tmp)
    for c in range(4):
        K[0, c] = f_tmp[c]

    i_out = 0
    while i_out < n_out and t_out[i_out] <= 0.0:
        for c in range(4):
            yout[i_out, c] = y[c]
        i_out += 1

    # initial step size, Hairer-style two-probe heuristic
    d0 = 0.0
    d1 = 0.0
    for c in range(4):
        sc = atol + rtol * abs(y[c])
        d0 += (y[c] / sc) ** 2
        d1 += (K[0, c] / sc) ** 2
    d0 = math.sqrt(d0 / 4.0)
    d1 = math.sqrt(d1 / 4.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    if h0 > t_end:
        h0 = t_end
    for c in range(4):
        y_stage[c] = y[c] + h0 * K[0, c]
    _rhs4(y_stage, p, f_tmp)
    d2 = 0.0
    for c in range(4):
        sc = atol + rtol * abs(y[c])
        d2 += ((f_tmp[c] - K[0, c]) / sc) ** 2
    d2 = math.sqrt(d2 / 4.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h_abs = min(100.0 * h0, h1)
    if h_abs > max_step:
        h_abs = max_step
    if h_abs > t_end:
        h_abs = t_end

    status = 0
    while t < t_end:
        if h_abs > max_step:
            h_abs = max_step
        step_accepted = False
        step_rejected = False
        fail_nonfinite = False
        while not step_accepted:
            if h_abs < min_step:
                status = 2 if fail_nonfinite else 1
                return yout, status, t, n_accepted
            h = h_abs
            t_new = t + h
            if t_new > t_end:
                t_new = t_end
                h = t_new - t
                h_abs = h

            for s in range(1, 6):
                for c in range(4):
                    acc = 0.0
                    for j in range(s):
                        acc += A[s, j] * K[j, c]
                    y_stage[c] = y[c] + h * acc
                _rhs4(y_stage, p, f_tmp)
                for c in range(4):
                    K[s, c] = f_tmp[c]

            ok = True
            for c in range(4):
                acc = 0.0
                for s in range(6):
                    acc += B[s] * K[s, c]
                v = y[c] + h * acc
                y_new[c] = v
                if not math.isfinite(v):
                    ok = False
            err = math.inf
            if ok:
                _rhs4(y_new, p, f_tmp)
                for c in range(4):
                    K[6, c] = f_tmp[c]
                err = 0.0
                for c in range(4):
                    e = 0.0
                    for s in range(7):
                        e += E[s] * K[s, c]
                    e *= h
                    ya = abs(y[c])
                    yb = abs(y_new[c])
                    sc = atol + rtol * (ya if ya > yb else yb)
                    err += (e / sc) ** 2
                err = math.sqrt(err / 4.0)
                if not math.isfinite(err):
                    ok = False

            if not ok:
                fail_nonfinite = True
                step_rejected = True
                h_abs = h * 0.2
                continue
            fail_nonfinite = False

            if err < 1.0:
                factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
                if step_rejected and factor > 1.0:
                    factor = 1.0
                # dense output over (t, t_new], evaluated before the
                # state advances
                if i_out < n_out and t_out[i_out] <= t_new:
                    for c in range(4):
                        for j in range(4):
                            q = 0.0
                            for s in range(7):
                                q += K[s, c] * P[s, j]
                            Q[c, j] = q
                    while i_out < n_out and t_out[i_out] <= t_new:
                        theta = (t_out[i_out] - t) / h
                        for c in range(4):
                            acc = 0.0
                            tp = theta
                            for j in range(4):
                                acc += Q[c, j] * tp
                                tp *= theta
                            yout[i_out, c] = y[c] + h * acc
                        i_out += 1
                t = t_new
                for c in range(4):
                    y[c] = y_new[c]
                    K[0, c] = K[6, c]
                h_abs = h * factor
                n_accepted += 1
                step_accepted = True
            else:
                step_rejected = True
                h_abs = h * max(0.2, 0.9 * err ** -0.2)

    # rounding guard: t_out[-1] == t_end is normally emitted by the
    # dense loop of the final step
    while i_out < n_out:
        for c in range(4):
            yout[i_out, c] = y[c]
        i_out += 1
    return yout, status, t, n_accepted


@dataclass(frozen=True)
class IntegratorConfig:
    """Knobs of a single integration run.

    ``t_span = None`` resolves to the default window 10000 / kappa_c;
    ``n_samples`` is the size of the uniform output grid.  Tolerances
    act on the real 4-vector embedding, so ``abs_tol`` is in
    sqrt-photon units (amplitudes reach 1e6..1e7 here, making the
    default deep).
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1.0
    max_step: float = math.inf
    initial_state: FieldState = field(
        default_factory=lambda: FieldState(1e7 + 0j, 1e7 + 0j))
    n_samples: int = 100000
    t_span: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.n_samples < 2:
            raise ValueError("need at least 2 output samples")
        if self.t_span is not None and not self.t_span > 0:
            raise ValueError("t_span must be positive")
        if not self.initial_state.is_finite():
            raise ValueError("initial state must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution of the equations of motion.

    ``states`` has shape (N, 2) complex with columns (alpha_1, alpha_2);
    ``driven`` records whether the run had a nonzero drive, which
    downstream limit-cycle extraction refuses.
    """

    t: np.ndarray
    states: np.ndarray
    dt: float
    driven: bool

    @property
    def alpha_1(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def alpha_2(self) -> np.ndarray:
        return self.states[:, 1]

    def state_at(self, i: int) -> FieldState:
        return FieldState(complex(self.states[i, 0]), complex(self.states[i, 1]))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t_s,re_a1,im_a1,re_a2,im_a2\n")
            for i in range(len(self.t)):
                a1 = complex(self.states[i, 0])
                a2 = complex(self.states[i, 1])
                fh.write(f"{float(self.t[i])!r},{a1.real!r},{a1.imag!r},"
                         f"{a2.real!r},{a2.imag!r}\n")


def pack_kernel_params(params: PhysicalParams, op: OperatingPoint) -> np.ndarray:
    """Flatten (params, op) into the kernel's parameter vector."""
    f = coherent_coupling_f(params, op.phi)
    return np.array([
        params.omega_c - op.omega_d,
        params.kappa_sum(1),
        params.kappa_sum(2),
        params.kappa_c * 10.0 ** (op.delta_g_db / 20.0),
        params.n_sat,
        params.hbar * params.omega_c * params.kappa_c,
        params.b_g,
        params.p_sat,
        f.real,
        f.imag,
        math.cos(op.phi),
        -math.sin(op.phi),
        drive_strength(params, op),
    ])


def integrate(params: PhysicalParams, op: OperatingPoint,
              cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the equations of motion over the configured window.

    Raises StepUnderflow if the adaptive step collapses below
    max(1e-18 * span, 10 ulp) and NonFiniteState if the state or error
    estimate stops being finite; both carry the failure time.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    t_end = cfg.t_span if cfg.t_span is not None else 10000.0 / params.kappa_c
    t_out = np.linspace(0.0, t_end, cfg.n_samples)
    p = pack_kernel_params(params, op)
    y0 = np.array(cfg.initial_state.as_real4(), dtype=float)
    min_step = max(1e-18 * t_end, 10.0 * np.finfo(float).eps * t_end)
    yout, status, t_reached, _ = _dp45(
        y0, p, t_end, t_out, cfg.rel_tol, cfg.abs_tol,
        float(cfg.max_step), min_step, _A, _B, _E, _P)
    if status == 1:
        raise StepUnderflow(
            f"step size underflow at t = {t_reached:.6e} s", t=t_reached)
    if status == 2:
        raise NonFiniteState(
            f"non-finite state or error estimate at t = {t_reached:.6e} s",
            t=t_reached)
    states = np.empty((cfg.n_samples, 2), dtype=complex)
    states[:, 0] = yout[:, 0] + 1j * yout[:, 1]
    states[:, 1] = yout[:, 2] + 1j * yout[:, 3]
    dt = float(t_out[1] - t_out[0])
    return Trajectory(t=t_out, states=states, dt=dt,
                      driven=p[12] > 0.0)
