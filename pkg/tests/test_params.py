import math

import numpy as np
import pytest

from nhdimer import FieldState, OperatingPoint, PhysicalParams
from nhdimer.params import (TWO_PI, default_params, dbm_to_watt,
                            freq_from_ghz, freq_to_ghz, rate_from_mhz,
                            rate_to_mhz, symmetric_params, watt_to_dbm)

MHZ = TWO_PI * 1e6


def test_unit_converters_round_trip():
    for x in (0.001, 2.3, 8.7, 11.5, 6027.0):
        assert rate_to_mhz(rate_from_mhz(x)) == pytest.approx(x, rel=1e-12)
        assert freq_to_ghz(freq_from_ghz(x)) == pytest.approx(x, rel=1e-12)
    assert watt_to_dbm(dbm_to_watt(-30.0)) == pytest.approx(-30.0, abs=1e-12)
    assert dbm_to_watt(0.0) == pytest.approx(1e-3, rel=1e-15)


def test_default_values_in_internal_units(params):
    assert params.omega_c == pytest.approx(TWO_PI * 6.027e9, rel=1e-15)
    assert params.kappa_c == pytest.approx(8.7 * MHZ, rel=1e-15)
    assert params.j_c == pytest.approx(11.5 * MHZ, rel=1e-15)
    assert params.p_sat == pytest.approx(0.9981e-3, rel=1e-15)
    assert params.b_g == pytest.approx(8.6e-3, rel=1e-15)
    assert params.g0_db == 20.3


def test_config_round_trip_is_tight(params):
    cfg = params.to_config()
    back = PhysicalParams.from_config(**cfg)
    for key, value in back.to_config().items():
        assert value == pytest.approx(cfg[key], rel=1e-12), key


def test_sigma_averages_the_port_and_internal_rates(params):
    expected = (0.5 * (4.1 + 4.0) + 0.5 * (2.5 + 2.3) + 8.7) * MHZ
    assert params.sigma == pytest.approx(expected, rel=1e-12)


def test_kappa_sum_per_cavity(params):
    assert params.kappa_sum(1) == pytest.approx(2 * (4.1 + 2.5 + 8.7) * MHZ,
                                                rel=1e-12)
    assert params.kappa_sum(2) == pytest.approx(2 * (4.0 + 2.3 + 8.7) * MHZ,
                                                rel=1e-12)
    with pytest.raises(ValueError):
        params.kappa_sum(3)


def test_symmetrized_preset_averages(sym_params):
    assert sym_params.kappa_int_1 == sym_params.kappa_int_2
    assert sym_params.kappa_in == sym_params.kappa_out
    assert sym_params.kappa_in == pytest.approx(2.4 * MHZ, rel=1e-12)
    assert sym_params.sigma == pytest.approx(default_params().sigma,
                                             rel=1e-12)


def test_n_sat_anchor(params):
    assert params.n_sat == pytest.approx(4572120985375.97, rel=1e-12)


def test_rates_must_be_positive_but_jc_zero_is_allowed(params):
    with pytest.raises(ValueError):
        PhysicalParams(**{**params.__dict__, "kappa_c": 0.0})
    with pytest.raises(ValueError):
        PhysicalParams(**{**params.__dict__, "p_sat": -1e-3})
    ok = PhysicalParams(**{**params.__dict__, "j_c": 0.0})
    assert ok.j_c == 0.0
    with pytest.raises(ValueError):
        PhysicalParams(**{**params.__dict__, "j_c": -1.0})


def test_operating_point_wraps_phi(params):
    op = OperatingPoint(4.0, TWO_PI + 0.5, params.omega_c)
    assert op.phi == pytest.approx(0.5, rel=1e-12)
    op = OperatingPoint(4.0, -0.5, params.omega_c)
    assert op.phi == pytest.approx(TWO_PI - 0.5, rel=1e-12)


def test_operating_point_warns_outside_soft_gain_range(params):
    with pytest.warns(UserWarning):
        OperatingPoint(9.5, math.pi, params.omega_c)
    with pytest.warns(UserWarning):
        OperatingPoint(-5.0, math.pi, params.omega_c)


def test_operating_point_drive_fields(params):
    op = OperatingPoint.undriven(params, 4.0, math.pi)
    assert op.p_drive_dbm is None
    assert op.omega_d == params.omega_c
    op = OperatingPoint.driven(params, 4.0, math.pi, -30.0)
    assert op.p_drive_dbm == -30.0
    with pytest.raises(ValueError):
        OperatingPoint(4.0, math.pi, -1.0)


def test_field_state_real4_round_trip():
    s = FieldState(1.5 - 2.5j, -3.0 + 0.25j)
    r = s.as_real4()
    assert np.allclose(r, [1.5, -2.5, -3.0, 0.25])
    back = FieldState.from_real4(r)
    assert back.alpha_1 == s.alpha_1 and back.alpha_2 == s.alpha_2
    assert s.n_1 == pytest.approx(1.5 ** 2 + 2.5 ** 2, rel=1e-15)
    assert not FieldState(math.nan + 0j, 0j).is_finite()
