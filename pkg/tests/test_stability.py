import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhdimer import (OperatingPoint, boundary_curve, eig2, is_stable,
                     kappa_0, stability_agreement, threshold_gain,
                     write_boundary_csv)
from nhdimer.params import TWO_PI

THRESHOLD_PI_DB = 4.817867604394106


finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=8, max_size=8))
def test_eig2_matches_numpy(vals):
    m = np.array(vals[:4]).reshape(2, 2) + 1j * np.array(vals[4:]).reshape(2, 2)
    got = eig2(m)
    ref = np.linalg.eigvals(m)
    # compare as an unordered pair (sorting is ambiguous under ties) and
    # allow sqrt(eps) since eigenvalues of near-defective matrices are
    # only Holder-1/2 conditioned
    scale = max(1.0, float(np.abs(m).max()))
    err = min(max(abs(got[0] - ref[0]), abs(got[1] - ref[1])),
              max(abs(got[0] - ref[1]), abs(got[1] - ref[0])))
    assert err < 1e-7 * scale


def test_eig2_ordering_and_validation():
    # descending real part, ties broken by descending imaginary part
    a, b = eig2(np.diag([1.0 + 2j, 3.0 - 1j]))
    assert a == pytest.approx(3.0 - 1j, rel=1e-12)
    assert b == pytest.approx(1.0 + 2j, rel=1e-12)
    a, b = eig2(np.diag([1.0 + 2j, 1.0 + 5j]))
    assert a.imag > b.imag
    with pytest.raises(ValueError):
        eig2(np.eye(3))
    with pytest.raises(ValueError):
        eig2(np.array([[np.nan, 0], [0, 1]], dtype=complex))


def test_threshold_anchor_and_symmetry(sym_params):
    t = threshold_gain(sym_params, math.pi)
    assert t == pytest.approx(THRESHOLD_PI_DB, abs=1e-12)
    # 4pi-periodic formula sampled mod 2pi: phi and 2pi - phi share sin(phi/2)
    assert threshold_gain(sym_params, -math.pi) == pytest.approx(t, abs=1e-12)
    a = threshold_gain(sym_params, 1.1)
    b = threshold_gain(sym_params, TWO_PI - 1.1)
    assert a == pytest.approx(b, abs=1e-12)
    # strictly decreasing from 0 to pi: more non-reciprocity, lower threshold
    phis = np.linspace(0.3, math.pi, 40)
    ts = [threshold_gain(sym_params, float(p)) for p in phis]
    assert all(x > y for x, y in zip(ts, ts[1:]))


def test_threshold_undefined_cases(params):
    assert threshold_gain(params, 0.0) is None
    assert threshold_gain(params, TWO_PI) is None
    assert threshold_gain(params, math.pi, validity_cap_db=4.0) is None
    # default cap: values approach 20 log10(2 sigma / kappa_c) as phi -> 0
    cap = 20.0 * math.log10(2.0 * params.sigma / params.kappa_c)
    near = threshold_gain(params, 1e-6)
    assert near is not None and near < cap


def test_is_stable_across_threshold(sym_params):
    below = is_stable(sym_params,
                      OperatingPoint.undriven(sym_params, 2.0, math.pi))
    above = is_stable(sym_params,
                      OperatingPoint.undriven(sym_params, 8.4, math.pi))
    assert below.stable and below.max_re_eigenvalue < 0
    assert not above.stable and above.max_re_eigenvalue > 0
    assert below.criterion_lhs < 1.0 < above.criterion_lhs
    assert len(above.eigenvalues) == 2
    assert above.eigenvalues[0].real >= above.eigenvalues[1].real


def test_region_classification(params):
    # region is set by J0 vs kappa_0 alone, i.e. delta_g vs the pi threshold
    op_low = OperatingPoint.undriven(params, 2.0, 0.3)
    op_high = OperatingPoint.undriven(params, 8.4, 0.3)
    assert is_stable(params, op_low).region == "I"
    assert is_stable(params, op_high).region == "II"
    # region II with small phase is still stable
    assert is_stable(params, op_high).stable


def test_reciprocal_point_is_stable_at_high_gain(params):
    op = OperatingPoint.undriven(params, 8.4, 0.0)
    report = is_stable(params, op)
    assert report.stable
    assert report.criterion_lhs == pytest.approx(0.0, abs=1e-15)


def test_kappa_0_sign(params):
    assert kappa_0(params, 0.0) > 0
    cap = 20.0 * math.log10(2.0 * params.sigma / params.kappa_c)
    assert kappa_0(params, cap) == pytest.approx(0.0, abs=1e-3)
    assert kappa_0(params, cap + 1.0) < 0


def test_boundary_curve_shape_and_nan(params):
    curve = boundary_curve(params, n=64)
    assert curve.shape == (64, 2)
    assert math.isnan(curve[0, 1])          # phi = 0 has no threshold
    assert np.isfinite(curve[1:, 1]).all()  # defined everywhere else
    mid = curve[32]
    assert mid[1] == pytest.approx(threshold_gain(params, float(mid[0])),
                                   abs=1e-12)


def test_write_boundary_csv(tmp_path, params):
    path = tmp_path / "boundary.csv"
    write_boundary_csv(path, params, n=16)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "phi_rad,delta_g_star_db"
    assert len(lines) == 17
    assert lines[1].endswith(",")  # NaN cell serialized empty
    phi, dg = lines[9].split(",")
    assert float(dg) == pytest.approx(threshold_gain(params, float(phi)),
                                      abs=1e-12)
    # byte-identical on rewrite
    first = path.read_bytes()
    write_boundary_csv(path, params, n=16)
    assert path.read_bytes() == first


def test_stability_agreement_symmetric(sym_params):
    out = stability_agreement(sym_params, n_points=300, seed=7)
    assert out["checked"] + out["skipped"] == 300
    assert out["disagreements"] == 0
    assert out["max_jc_shift"] < 1e-9
