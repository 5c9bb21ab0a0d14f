import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from painleve_lab.series import (TruncatedSeries, mpctx, ps_add, ps_compose, ps_eval, ps_mul,
                                 ps_reversion, radius_estimate, series_from_json, series_to_json)

F = Fraction


def S(*cs, order=None, bits=None, var="z"):
    return TruncatedSeries.from_coeffs([F(c) if not isinstance(c, float) else c for c in cs],
                                       var, bits, order)


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)


@st.composite
def invertible(draw, max_order=8):
    n = draw(st.integers(1, max_order))
    lin = draw(rationals.filter(lambda x: x != 0))
    rest = draw(st.lists(rationals, min_size=n - 1, max_size=n - 1))
    return TruncatedSeries((F(0), lin, *rest), "z", None)


# ps_add / ps_mul

def test_difference_of_squares():
    assert ps_mul(S(1, 1), S(1, -1)).coeffs == (1, 0)
    assert ps_mul(S(1, 1, order=2), S(1, -1, order=2)).coeffs == (1, 0, -1)


def test_z_times_z():
    z = TruncatedSeries.variable(3)
    assert (z * z).coeffs == (0, 0, 1, 0)


def test_geometric_times_one_minus_z_truncates():
    geo = S(*[1] * 6)
    assert ps_mul(geo, S(1, -1, order=5)).coeffs == (1, 0, 0, 0, 0, 0)
    assert ps_mul(geo, S(1, -1)).coeffs == (1, 0)


def test_variable_mismatch_is_an_error():
    with pytest.raises(ValueError):
        ps_add(S(1, 1), S(1, 1, var="w"))


def test_order_mismatch_truncates_to_minimum():
    assert ps_add(S(1, 2, 3), S(1, 1)).order == 1


@given(invertible(), invertible())
def test_mul_commutes_exactly(f, g):
    assert ps_mul(f, g).coeffs == ps_mul(g, f).coeffs


# composition and reversion

def test_compose_examples():
    assert ps_compose(S(0, 0, 1, order=4), S(0, 1, 1, order=4)).coeffs == (0, 0, 1, 2, 1)
    g = S(0, 3, -1, 7)
    assert ps_compose(S(0, 1, order=3), g).coeffs == g.coeffs
    geo = S(*[1] * 9)
    assert ps_compose(geo, S(0, 0, 1, order=8)).coeffs == (1, 0, 1, 0, 1, 0, 1, 0, 1)


def test_compose_rejects_constant_term():
    with pytest.raises(ValueError):
        ps_compose(S(0, 1), S(1, 1))


def test_reversion_examples():
    assert ps_reversion(S(0, 1, order=5)).coeffs == (0, 1, 0, 0, 0, 0)
    assert ps_reversion(S(0, 1, 1, order=4)).coeffs == (0, 1, -1, 2, -5)
    assert ps_reversion(S(0, F(3, 7), order=3)).coeffs == (0, F(7, 3), 0, 0)


def test_reversion_needs_linear_term():
    with pytest.raises(ValueError):
        ps_reversion(S(0, 0, 1))


@given(invertible())
def test_reversion_is_an_involution(f):
    assert ps_reversion(ps_reversion(f)).coeffs == f.coeffs


@given(invertible())
def test_compose_with_reversion_is_identity(f):
    ident = (0, 1) + (0,) * (f.order - 1)
    assert ps_compose(f, ps_reversion(f)).coeffs == ident
    assert ps_compose(ps_reversion(f), f).coeffs == ident


def test_compose_with_reversion_hundred_random_series():
    import random

    rng = random.Random(100)
    for _ in range(100):
        n = rng.randint(1, 10)
        cs = [F(0), F(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 5))]
        cs += [F(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n - 1)]
        f = TruncatedSeries(tuple(cs))
        assert ps_compose(f, ps_reversion(f)).coeffs == (0, 1) + (0,) * (n - 1)


# evaluation

def test_eval_examples():
    assert ps_eval(S(1, 1), 2).value == 3
    ctx = mpctx(256)
    geo = TruncatedSeries.from_coeffs([1] * 51, bits=256)
    v = ps_eval(geo, ctx.mpf("0.1"))
    assert abs(v.value - 1 / ctx.mpf("0.9")) < 1e-40
    assert v.tail_bound < 1e-40
    assert ps_eval(S(0, 1, bits=64), 1j).value == 1j


def test_eval_outside_radius_warns_not_silent():
    res = ps_eval(S(1, 1, 1), F(3), radius=1.0)
    assert res.warning is not None
    assert res.value == 13


def test_exact_mode_never_rounds():
    v = ps_eval(S(F(1, 3), F(1, 7)), F(2, 11))
    assert v.value == F(1, 3) + F(2, 77)
    assert isinstance(v.value, Fraction)


@pytest.mark.parametrize("cs", [[1, 2, 3, 4, 5], [0, 1, -1, 2, -5, 14], [1] * 20])
def test_float_modes_agree_to_2_pow_200(cs):
    out = []
    for bits in (256, 512):
        ctx = mpctx(bits)
        f = TruncatedSeries.from_coeffs([ctx.mpf(c) / 3 for c in cs], bits=bits)
        g = TruncatedSeries.from_coeffs([0, ctx.mpf(1) / 7, ctx.mpf(2) / 9] + [0] * (len(cs) - 3),
                                        bits=bits)
        h = ps_mul(ps_compose(f, g), f)
        out.append([complex(c) for c in h.coeffs] + [ps_eval(h, ctx.mpf(1) / 3).value])
    for x, y in zip(*out):
        assert abs(x - y) <= 2.0 ** -200 * max(1, abs(x))


def test_precision_is_per_context_not_global():
    import mpmath

    before = mpmath.mp.prec
    TruncatedSeries.from_coeffs([1, 2, 3], bits=700)
    assert mpmath.mp.prec == before


# radius and JSON

def test_radius_estimate_geometric():
    assert abs(radius_estimate([F(1, 2 ** k) for k in range(40)]) - 2) < 1e-9
    assert radius_estimate([1, 1]) == float("inf")


@given(invertible())
def test_json_round_trip_exact(f):
    back = series_from_json(json.dumps(series_to_json(f)))
    assert back == f


def test_json_round_trip_float():
    ctx = mpctx(128)
    f = TruncatedSeries.from_coeffs([ctx.mpf(1) / 3, ctx.mpc(1, 2), 0], bits=128)
    d = series_to_json(f)
    assert d["var"] == "z" and d["order"] == 2 and isinstance(d["coeffs"][0], list)
    back = series_from_json(d)
    assert all(abs(x - y) < 2.0 ** -120 for x, y in zip(back.coeffs, f.coeffs))
