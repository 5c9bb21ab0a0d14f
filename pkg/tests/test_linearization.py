import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painleve_lab.linearization import (NotInBasin, OutsideValidity, ProbeReport, ResonanceError,
                                        barrier_probe, conjugation_residual, conserved_quantity,
                                        continue_solution, extend_Q, q_by_functional_equation,
                                        q_equation_residual, solve_conjugation)
from painleve_lab.maps import MapError, MapSpec
from painleve_lab.orbits import orbit
from painleve_lab.series import mpctx, ps_compose, ps_eval

F = Fraction
CTX = mpctx(512)


def test_linear_map_gives_identity():
    cd = solve_conjugation(MapSpec.polynomial((0, F(1, 3))), order=10, bits=None)
    assert cd.phi.coeffs == (0, 1) + (0,) * 9
    assert cd.q.coeffs == cd.phi.coeffs


def test_logistic_phi2():
    for a in (F(1, 2), F(1, 3), F(-2, 5)):
        cd = solve_conjugation(MapSpec.logistic(a), order=6, bits=None)
        assert cd.phi[2] == 1 / (1 - a)
    assert solve_conjugation(MapSpec.logistic(F(1, 2)), 4, None).phi[2] == 2


def test_linear_fractional_closed_form():
    a, b = F(1, 2), F(3)
    cd = solve_conjugation(MapSpec.linear_fractional(a, b), order=20, bits=None)
    # phi(w) = (a-1) w / ((a-1) + b w) = w / (1 + b w/(a-1))
    r = -b / (a - 1)
    assert cd.phi.coeffs == tuple([0] + [r ** (k - 1) for k in range(1, 21)])


def test_phi_normalization_and_inverse(cd64):
    assert cd64.phi[0] == 0 and cd64.phi[1] == 1
    ident = ps_compose(cd64.q, cd64.phi)
    assert abs(ident[1] - 1) < 1e-140
    assert max(abs(c) for c in ident.coeffs[2:]) < 1e-100


def test_q_two_ways_agree():
    G = MapSpec.logistic(F(1, 2))
    cd = solve_conjugation(G, 24, None)
    assert q_by_functional_equation(G, 24, None).coeffs == cd.q.coeffs


def test_rejected_multipliers():
    with pytest.raises(MapError):
        solve_conjugation(MapSpec.polynomial((0, 1, 1)), 8, None)
    with pytest.raises(MapError):
        solve_conjugation(MapSpec.polynomial((0, 0, 1)), 8, None)
    with pytest.raises(MapError):
        solve_conjugation(MapSpec.logistic(3), 8, None)
    solve_conjugation(MapSpec.linear_fractional(3, 1), 8, None)


def test_root_of_unity_multiplier_rejected():
    G = MapSpec.polynomial((0, -1, 1))
    with pytest.raises((MapError, ResonanceError)):
        solve_conjugation(G, 8, None)


def test_conserved_quantity_examples(cd64):
    lin = solve_conjugation(MapSpec.polynomial((0, F(1, 2))), 8, None)
    C = F(3, 10)
    assert conserved_quantity(lin, 5, C * F(1, 2) ** 5) == C
    x0 = CTX.mpf(1) / 20
    assert conserved_quantity(cd64, 0, x0) == ps_eval(cd64.q, x0).value


def test_drift_order_64_at_256_bits(logistic_half):
    cd = solve_conjugation(logistic_half, order=64, bits=256)
    ctx = mpctx(256)
    xs = orbit(logistic_half, ctx.mpf(1) / 20, 30, 256)
    c0 = conserved_quantity(cd, 0, xs[0])
    assert max(abs(conserved_quantity(cd, n, x) - c0) for n, x in enumerate(xs)) <= 1e-30


def test_outside_validity_raises(cd64):
    with pytest.raises(OutsideValidity):
        conserved_quantity(cd64, 0, CTX.mpf("1.5"))


def test_continue_solution_examples(cd64, logistic_half):
    assert continue_solution(cd64, 0, CTX.mpc(3, 4)) == 0
    x0 = CTX.mpf(1) / 20
    C = conserved_quantity(cd64, 0, x0)
    xs = orbit(logistic_half, x0, 20, 512)
    assert max(abs(continue_solution(cd64, C, n) - x) for n, x in enumerate(xs)) <= 1e-25
    with pytest.raises(OutsideValidity):
        continue_solution(cd64, C, -10)


def test_two_routes_agree_on_random_points(cd64):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        C = CTX.mpc(*rng.uniform(-0.1, 0.1, 2))
        z = CTX.mpc(rng.uniform(0, 8), rng.uniform(-6, 6))
        worst = max(worst, float(abs(continue_solution(cd64, C, z) -
                                     continue_solution(cd64, C, z, "transseries"))))
    assert worst <= 1e-30


def test_extend_Q(cd64, logistic_half):
    x = CTX.mpf("0.01")
    assert abs(extend_Q(logistic_half, cd64, x) - ps_eval(cd64.q, x).value) < 1e-60
    v1 = extend_Q(logistic_half, cd64, CTX.mpf("0.6"), eps=1e-2)
    v2 = extend_Q(logistic_half, cd64, CTX.mpf("0.6"), eps=1e-3)
    assert abs(v1 - v2) <= 1e-20
    with pytest.raises(NotInBasin):
        extend_Q(logistic_half, cd64, 10)


@settings(max_examples=20)
@given(st.floats(0.05, 0.9), st.floats(-math.pi, math.pi))
def test_extend_Q_eps_independent(logistic_half, r, theta):
    cd = solve_conjugation(logistic_half, order=64, bits=512)
    z = CTX.mpf(r) * CTX.expj(theta)
    try:
        v1 = extend_Q(logistic_half, cd, z, eps=1e-2)
    except NotInBasin:
        return
    v2 = extend_Q(logistic_half, cd, z, eps=1e-3)
    assert abs(v1 - v2) <= 1e-20 * max(1, abs(v1))


def test_barrier_probe_linear_fractional():
    G = MapSpec.linear_fractional(F(1, 2), 1)
    rep = barrier_probe(G, solve_conjugation(G, 32, 256))
    assert "no_barrier" in rep.flags and rep.boundary_distance is None


def test_barrier_probe_logistic(cd64, logistic_half):
    rep = barrier_probe(logistic_half, cd64, -1, steps=6)
    assert rep.relative_gap <= 0.05
    assert "radius_matches_boundary" in rep.flags
    # the ray towards -1 ends at the repelling fixed point 1 - 1/a
    assert abs(rep.boundary_distance - 1) < 1e-6
    assert "derivative_growth" in rep.flags
    back = ProbeReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert set(rep.to_json()) >= {"radius_estimate", "ray_samples", "boundary_distance"}


# invariants; conjugation residual at order 64 as stated (truncation-limited, see notes)

def test_conjugation_residual_order_64(cd64):
    assert conjugation_residual(cd64, cd64.phi_radius / 2) <= 1e-30


def test_conjugation_residual_order_128(cd128):
    assert conjugation_residual(cd128, cd128.phi_radius / 2) <= 1e-30


def _disk(n, radius, seed):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    return [CTX.mpf(float(x)) * CTX.expj(float(t)) for x, t in zip(r, 2 * np.pi * rng.random(n))]


def test_q_equation_order_64(cd64):
    assert q_equation_residual(cd64, _disk(1000, cd64.radius_estimate / 2, 2)) <= 1e-25


def test_q_equation_order_128(cd128):
    assert q_equation_residual(cd128, _disk(1000, cd128.radius_estimate / 2, 2)) <= 1e-25


@settings(max_examples=15)
@given(st.floats(0.0, 0.5), st.floats(-math.pi, math.pi))
def test_drift_along_orbits_in_half_disk(cd128, logistic_half, r, theta):
    x0 = CTX.mpf(r) * CTX.expj(theta)
    xs = orbit(logistic_half, x0, 30, 512)
    c0 = conserved_quantity(cd128, 0, x0)
    drift = max(abs(conserved_quantity(cd128, n, x) - c0) for n, x in enumerate(xs))
    assert drift <= 1e-25 * max(abs(c0), 1e-300) or drift == 0
