import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painleve_lab.borel import (BorelGrid, LeauClass, NonContraction, SectorError,
                                borel_taylor_predictions, conserved_C, drift_table,
                                fit_taylor_at_zero, formal_invariant_series, h0_eval,
                                h_formal_coefficients, h_optimal_truncation, kernel_cross_check,
                                kernel_factor_bessel, kernel_factor_series, laplace,
                                leau_membership, R_eval, recR_residual, solve_borel_fixed_point)

F = Fraction


def test_formal_coefficients_exact():
    fs = formal_invariant_series(4)
    assert fs.rho == (F(1, 2), F(1, 3), F(13, 36), F(113, 240))
    assert fs[1] == F(1, 2) and fs[4] == F(113, 240)
    with pytest.raises(ValueError):
        formal_invariant_series(0)


@pytest.mark.parametrize("lo,hi", [(6, 10), (10, 25), (4, 40)])
def test_formal_order_extension(lo, hi):
    assert formal_invariant_series(hi).rho[:lo] == formal_invariant_series(lo).rho


def test_formal_series_solves_recursion_exactly():
    # R(v) - R(v - v^2) - v/(1-v) - ln(1-v) has zero coefficients through v^(order+1)
    order = 12
    rho = formal_invariant_series(order).rho
    n = order + 1
    diff = [F(0)] * (n + 1)
    for k, r in enumerate(rho, start=1):
        diff[k] += r
        for j in range(k + 1):  # (v - v^2)^k = v^k (1 - v)^k
            if k + j <= n:
                diff[k + j] -= r * math.comb(k, j) * (-1) ** j
    for m in range(1, n + 1):
        diff[m] -= 1 - F(1, m)  # v/(1-v) + ln(1-v) = sum (1 - 1/m) v^m
    assert all(d == 0 for d in diff[1:])


def test_h0_examples():
    assert h0_eval(0.0) == -0.5
    assert abs(h0_eval(30.0)) < 1e-12
    assert np.isrealobj(h0_eval(np.linspace(0, 5, 11)))


@given(st.floats(1e-6, 0.05))
def test_h0_matches_high_precision(p):
    import mpmath

    with mpmath.workdps(40):
        q = mpmath.mpf(p)
        exact = (1 - mpmath.exp(-q) - q) / (q * mpmath.expm1(q))
    # closed form loses about log10(2/p) digits just above the series switch
    assert abs(h0_eval(p) - float(exact)) < 1e-14


def test_kernel_implementations_agree():
    # the alternating power series loses digits to cancellation for large |u|
    for u in (0.0, 0.3, 5.0, -7.0, 3 + 4j):
        assert abs(kernel_factor_bessel(u) - kernel_factor_series(u, 80)) < 1e-13 * max(1, abs(kernel_factor_bessel(u)))


def test_fixed_point_residual_and_contraction(borel_grid):
    g = borel_grid
    assert g.residual < 1e-12
    assert all(r <= 0.9 for r in g.ratios[1:])
    p = np.arange(g.n + 1) * g.h
    assert np.all(np.abs(g.samples) <= g.A * np.exp(g.nu * p) * (1 + 1e-12))


def test_non_contraction_is_reported():
    with pytest.raises(NonContraction):
        solve_borel_fixed_point(P=8.0, max_ratio=0.01)
    with pytest.raises(NonContraction):
        solve_borel_fixed_point(P=8.0, max_iter=2)


def test_bad_grid_parameters():
    with pytest.raises(ValueError):
        solve_borel_fixed_point(P=1.0, h=0.3)
    with pytest.raises(SectorError):
        solve_borel_fixed_point(P=4.0, direction=math.pi / 2)


def test_H_at_zero(borel_grid):
    assert abs(borel_grid.samples[0] + 0.5) < 1e-10


def test_taylor_coefficients_match_predictions(borel_grid):
    pred = borel_taylor_predictions(4)
    assert pred[:3] == [F(-1, 2), F(2, 3), F(-37, 72)]
    fit = fit_taylor_at_zero(borel_grid)
    for f, q in zip(fit, pred):
        assert abs(f - float(q)) <= 1e-6


def test_laplace_linearity(borel_grid):
    g3 = dataclasses.replace(borel_grid, samples=3 * borel_grid.samples, A=3 * borel_grid.A)
    for x in (1.0, 5.0, 18.0):
        assert abs(laplace(g3, x) - 3 * laplace(borel_grid, x)) < 1e-14


def test_laplace_leading_asymptotics(borel_grid):
    for x in (200.0, 1000.0):
        assert abs(laplace(borel_grid, x) * x + 0.5) < 2 / x


def test_laplace_matches_least_term_sum(borel_grid):
    val, m, least = h_optimal_truncation(20.0)
    assert abs(laplace(borel_grid, 20.0) - val) <= 1e-8
    assert least < 1e-8 and m > 10


def test_laplace_sector_and_tail(borel_grid):
    with pytest.raises(SectorError):
        laplace(borel_grid, -1.0)
    with pytest.raises(SectorError):
        laplace(borel_grid, -0.85)  # admissible half plane but tail too large for P = 40
    val, tail = laplace(borel_grid, 2.0, return_bound=True)
    assert tail < 1e-15


def test_h_coefficients_are_borel_derivatives():
    c = h_formal_coefficients(4)
    assert c[0] == F(-1, 2) and c[1] == F(2, 3)


def test_R_small_v(borel_grid):
    for v in (0.01, 0.02, 0.04):
        r = R_eval(v, borel_grid)
        assert isinstance(r, float)
        assert abs(r - (v / 2 + v * v / 3)) <= 0.5 * v ** 3


def test_R_functional_equation(borel_grid):
    assert recR_residual(0.05, borel_grid) <= 1e-9
    assert recR_residual(0.1, borel_grid) <= 1e-9


def test_R_sector_errors(borel_grid):
    for v in (0, -0.1):
        with pytest.raises(SectorError):
            R_eval(v, borel_grid)


def test_conserved_quantity(borel_grid):
    v = 0.07
    assert conserved_C(5, v, borel_grid) - conserved_C(4, v, borel_grid) == 1
    c = conserved_C(0, 0.05 + 0.02j, borel_grid)
    assert abs(c.imag) > 1e-3
    rows = drift_table(0.05, 50, borel_grid)
    assert len(rows) == 51 and max(r["drift"] for r in rows) <= 1e-8


def test_conserved_quantity_complex_orbit(borel_grid):
    rows = drift_table(0.05 + 0.01j, 30, borel_grid)
    assert max(r["drift"] for r in rows) <= 1e-8


@pytest.mark.parametrize("v0,want", [(0.1, {LeauClass.IN_LEAU}), (0, {LeauClass.IN_LEAU}),
                                     (-0.1, {LeauClass.NOT_IN_LEAU, LeauClass.UNDECIDED}),
                                     (0.3 + 0.1j, {LeauClass.IN_LEAU}), (3.0, {LeauClass.NOT_IN_LEAU})])
def test_leau_examples(v0, want):
    assert leau_membership(v0) in want


def test_kernel_cross_check_on_grid(borel_grid):
    assert kernel_cross_check(borel_grid) <= 1e-13


def test_series_kernel_solve_matches(borel_grid):
    g = solve_borel_fixed_point(kernel="series")
    assert float(np.max(np.abs(g.samples - borel_grid.samples))) < 1e-13


def test_grid_halving():
    from painleve_lab.borel import grid_refinement

    out = grid_refinement()
    assert out["max_change"] <= 4 * out["tol"]
    assert out["max_change_R"] <= 4 * out["tol"]


def test_divergence_signature(borel_grid):
    v = 0.2
    target = R_eval(v, borel_grid)
    fs = formal_invariant_series(60)
    errs = [abs(s - target) for s in fs.partial_sums(v)]
    k = int(np.argmin(errs))
    assert 3 < k < 55
    assert errs[k] < 1e-3 * errs[0]
    assert errs[-1] > 1e3 * errs[k]


@pytest.mark.parametrize("direction", [math.pi / 4, -math.pi / 4])
def test_rotated_rays_agree(borel_grid, direction):
    g = solve_borel_fixed_point(direction=direction)
    assert g.residual < 1e-12
    for v in (0.05, 0.05 + 0.02j):
        assert abs(R_eval(v, g) - R_eval(v, borel_grid)) < 1e-12


def test_grid_json_round_trip(borel_grid):
    data = borel_grid.to_json(include_samples=True)
    back = BorelGrid.from_json(data)
    assert np.array_equal(back.samples, borel_grid.samples)
    assert back.residual_history == borel_grid.residual_history
    with pytest.raises(ValueError):
        BorelGrid.from_json(borel_grid.to_json())
