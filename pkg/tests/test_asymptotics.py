import math
from fractions import Fraction

import pytest

from painleve_lab.acceptance import PSI_TARGET, _psi_table
from painleve_lab.asymptotics import (InsufficientPrecision, delta_sequence, period_grid,
                                      phi_normalization_check, psi_eval, required_bits,
                                      second_differences)
from painleve_lab.series import mpctx

from conftest import HALF


@pytest.fixture(scope="module")
def deltas():
    return delta_sequence(HALF, 0.5, 200, 512)


@pytest.fixture(scope="module")
def table():
    return _psi_table()


def test_delta_positive_and_strictly_decreasing(deltas):
    assert deltas[0] > 0
    assert all(d1 < d0 for d0, d1 in zip(deltas, deltas[1:]))


def test_delta_ratio_limit(deltas):
    q = 1 / (2 - 0.5)
    for n in range(50, len(deltas) - 1):
        assert abs(float(deltas[n + 1] / deltas[n]) / q - 1) <= 1e-3


def test_delta_geometric_decay(deltas):
    eps = 0.05
    scaled = [float(d) * (2 - 0.5 - eps) ** n for n, d in enumerate(deltas)]
    assert scaled[-1] < 1e-2 * scaled[50]


@pytest.mark.parametrize("z0", [0.1, 0.5, 0.9])
def test_delta_zero_positive_for_other_z0(z0):
    assert delta_sequence(HALF, z0, 5, 128)[0] > 0


def test_insufficient_precision_reports_required_bits():
    with pytest.raises(InsufficientPrecision) as info:
        delta_sequence(HALF, 0.5, 300, 200)
    assert info.value.required == required_bits(HALF, 300) == math.ceil(300 * math.log2(1.5)) + 80
    with pytest.raises(InsufficientPrecision):
        psi_eval(HALF, z0=0.5, N=300, precision=256)


def test_psi_is_real_with_convergence_estimate():
    s = psi_eval(HALF, z0=0.5)
    assert s.psi.imag == 0 if hasattr(s.psi, "imag") else True
    assert s.convergence < 1e-30
    with pytest.raises(ValueError):
        psi_eval(HALF, z0=1.5)


def test_psi_periodic_single_point():
    t = period_grid(8)[3]
    p0 = psi_eval(HALF, t=t).psi
    p1 = psi_eval(HALF, t=t + math.log(2.0)).psi
    assert abs(p0 - p1) <= 1e-11


def test_z0_and_its_square_agree():
    ctx = mpctx(512)
    z = ctx.mpf(3) / 10
    assert abs(psi_eval(HALF, z0=z).psi - psi_eval(HALF, z0=z * z).psi) <= 1e-11


def test_depth_stability():
    t = period_grid(8)[5]
    assert abs(psi_eval(HALF, t=t, N=300).psi - psi_eval(HALF, t=t, N=320).psi) <= 1e-12


def test_precision_stability():
    t = period_grid(8)[1]
    assert abs(float(psi_eval(HALF, t=t, precision=512).psi - psi_eval(HALF, t=t, precision=768).psi)) <= 1e-15


def test_scan_periodicity(table):
    shifted = _psi_table(shift=math.log(2.0))
    assert max(float(abs(x - y)) for x, y in zip(table.psi, shifted.psi)) <= 1e-10


def test_scan_is_smooth(table):
    # a sampled sinusoid has |second difference| = ptp/2 (2 pi / n)^2, about 0.005 ptp here
    d2 = second_differences(table.psi + table.psi[:2])
    assert max(abs(x) for x in d2) <= 0.02 * table.peak_to_peak()


def test_normalization_ratios_tend_to_one():
    rep = phi_normalization_check(HALF)
    errs = [abs(r - 1) for r in rep.ratios]
    assert all(e1 < e0 for e0, e1 in zip(errs, errs[1:])) and errs[-1] < 1e-12
    assert rep.sign_ok and rep.psi < 0
    assert rep.period_gap < 1e-15


def test_normalization_second_order_settles():
    rep = phi_normalization_check(HALF)
    assert abs(rep.second_order[-1] - rep.second_order[-2]) < 1e-6


def test_psi_constant_matches_target(table):
    # literal acceptance target; the README explains why this does not hold
    assert abs(-table.mean() - PSI_TARGET) <= 1e-6


def test_psi_peak_to_peak_in_target_window(table):
    assert 1e-10 <= table.peak_to_peak() <= 1e-8
