import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ipt_tank.circuit import (
    CompensationNetwork,
    CoupledCoils,
    Frequency,
    LadderStage,
    Orientation,
    ac_resistance_from_dc,
    build_ssp,
    capacitor,
    inductor,
    reactance,
    stage_from_reactance,
    t_model,
)
from ipt_tank.errors import ValidationError

from conftest import F1_C_SS


def test_inductor_reactance():
    assert reactance(inductor(100e-6), 1e5) == pytest.approx(10.0, rel=1e-15)


def test_capacitor_reactance():
    assert reactance(capacitor(0.1e-6), 1e5) == pytest.approx(-100.0, rel=1e-15)


def test_series_arm_at_f1_omega_cc():
    arm = LadderStage(Orientation.SERIES, (inductor(200e-6), capacitor(14.608e-9)))
    # 106.814 - 128.176 by hand; C_ss is tuned so that X3 = -X2 = -omega*L_M
    assert arm.reactance(534_070.75) == pytest.approx(-21.36, abs=5e-3)


def test_frequency_accepts_hz_and_rejects_nonpositive():
    f = Frequency.from_hz(85_000.0)
    assert f.value == pytest.approx(2 * math.pi * 85_000.0)
    assert f.hz == pytest.approx(85_000.0)
    with pytest.raises(ValidationError):
        Frequency(0.0)
    with pytest.raises(ValidationError):
        inductor(-1e-6)
    with pytest.raises(ValidationError):
        capacitor(float("nan"))


def test_t_model_equal_coils():
    c = t_model(240e-6, 240e-6, 1 / 6)
    assert c.l_m == pytest.approx(40e-6, rel=1e-12)
    assert c.l_lp == pytest.approx(200e-6, rel=1e-12)
    assert c.l_ls == pytest.approx(200e-6, rel=1e-12)


def test_t_model_unequal_coils():
    c = t_model(200e-6, 50e-6, 0.3)
    assert c.l_m == pytest.approx(30e-6, rel=1e-12)
    assert c.l_lp == pytest.approx(170e-6, rel=1e-12)
    assert c.l_ls == pytest.approx(20e-6, rel=1e-12)


@pytest.mark.parametrize("k", [1.0, 0.999999999999999999, 1.5, 0.0, -0.2])
def test_t_model_rejects_coupling_bound(k):
    with pytest.raises(ValidationError, match="k"):
        t_model(100e-6, 100e-6, k)


def test_t_model_rejects_negative_leakage():
    # L_M = 0.5*sqrt(200u*10u) > 10u would make L_ls negative
    with pytest.raises(ValidationError, match="coupling bound"):
        t_model(200e-6, 10e-6, 0.5)


@given(st.floats(1e-6, 1e-3), st.floats(1e-6, 1e-3), st.floats(0.01, 0.99))
def test_t_model_round_trip(l1, l2, k):
    k_max = math.sqrt(min(l1, l2) / max(l1, l2))
    if k >= k_max * 0.999:
        return
    c = t_model(l1, l2, k)
    assert c.l1 == pytest.approx(l1, rel=1e-12)
    assert c.l2 == pytest.approx(l2, rel=1e-12)
    assert c.k == pytest.approx(k, rel=1e-12)


def test_build_ssp_structure(f1_coils):
    net = build_ssp(f1_coils, 10e-9, 20e-9, 30e-9, 10.0)
    assert len(net.stages) == 4
    assert [s.orientation for s in net.stages] == [
        Orientation.SERIES, Orientation.SHUNT, Orientation.SERIES, Orientation.SHUNT]
    assert [s.label for s in net.stages] == ["Z1", "Z2", "Z3", "Z4"]
    assert net.load == 10.0
    assert [e.name for e in net.stages[1].elements] == ["L_M"]


def test_build_ssp_stage_reactances_match_direct_formulas(f1_coils):
    c_p, c_ss, c_sp = 13e-9, F1_C_SS, 54e-9
    net = build_ssp(f1_coils, c_p, c_ss, c_sp, 10.0)
    for w in (1e5, 534_070.75, 2e6):
        expected = (
            w * f1_coils.l_lp - 1 / (w * c_p),
            w * f1_coils.l_m,
            w * f1_coils.l_ls - 1 / (w * c_ss),
            -1 / (w * c_sp),
        )
        for stage, x in zip(net.stages, expected):
            assert stage.reactance(w) == pytest.approx(x, rel=1e-13, abs=1e-13 * abs(w * 1e-4))
            assert stage.impedance(w).real == 0.0


@given(st.floats(1e-7, 1e-2), st.floats(1e-10, 1e-5))
def test_series_lc_arm_has_one_zero_crossing(l, c):
    arm = LadderStage(Orientation.SERIES, (inductor(l), capacitor(c)))
    w0 = 1 / math.sqrt(l * c)
    grid = np.geomspace(w0 * 1e-3, w0 * 1e3, 401)
    x = arm.reactance(grid)
    assert np.all(np.diff(x) > 0)
    upward = np.count_nonzero((x[:-1] < 0) & (x[1:] >= 0))
    assert upward == 1 and x[0] < 0 < x[-1]


def test_element_reactances_increase_with_frequency():
    grid = np.geomspace(1e3, 1e7, 100)
    xl = reactance(inductor(1e-4), grid)
    xc = reactance(capacitor(1e-8), grid)
    assert np.all(np.diff(xl) > 0)
    assert np.all(np.diff(xc) > 0) and np.all(xc < 0)


def test_network_requires_positive_load():
    with pytest.raises(ValidationError):
        CompensationNetwork((), 0.0)
    net = CompensationNetwork((), 50.0)
    assert net.with_load(7.0).load == 7.0
    assert net.load == 50.0


def test_stage_requires_elements():
    with pytest.raises(ValidationError):
        LadderStage(Orientation.SERIES, ())


def test_coupled_coils_scaling():
    c = CoupledCoils(1e-6, 2e-6, 3e-6)
    s = c.scaled(2.0)
    assert (s.l_lp, s.l_ls, s.l_m) == (2e-6, 4e-6, 6e-6)
    assert s.k == pytest.approx(c.k, rel=1e-15)


def test_stage_from_reactance_realizes_sign():
    assert stage_from_reactance(Orientation.SERIES, 10.0, 1e5).reactance(1e5) == pytest.approx(10.0)
    assert stage_from_reactance(Orientation.SHUNT, -10.0, 1e5).reactance(1e5) == pytest.approx(-10.0)
    with pytest.raises(ValidationError):
        stage_from_reactance(Orientation.SERIES, 0.0, 1e5)


def test_ac_resistance_convention():
    assert ac_resistance_from_dc(100.0) == pytest.approx(800 / math.pi ** 2)
    with pytest.raises(ValidationError):
        ac_resistance_from_dc(-1.0)
