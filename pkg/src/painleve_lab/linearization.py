"""Poincare linearization near an attracting fixed point.

For ``G(x) = a x + F(x)`` with ``0 < |a| < 1`` the conjugation ``phi`` solves
``phi(a z) = G(phi(z))`` with ``phi(0) = 0, phi'(0) = 1``.  Its inverse ``Q``
satisfies ``Q(G(x)) = a Q(x)``, so ``C = Q(x_n) a^{-n}`` is constant along
orbits and ``x(z) = phi(C a^z)`` continues them to complex ``z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from .maps import MapError, MapSpec
from .orbits import (BASIN_MAX_ITER, EscapeClass, contraction_radius, escape_oracle,
                     ray_boundary_distance)
from .series import (CONJUGATION_ORDER, DEFAULT_BITS, TruncatedSeries, convert, mpctx,
                     ps_eval, ps_reversion, radius_estimate, scalar_abs)


class ResonanceError(ValueError):
    """``a^k`` is (numerically) equal to ``a`` for some ``k`` in range."""


class OutsideValidity(ValueError):
    """Evaluation point lies outside the series' trusted disk."""


class NotInBasin(ValueError):
    """The orbit never entered the contracting disk around the fixed point."""


@dataclass(frozen=True)
class ConjugacyData:
    """Paired conjugation ``phi`` and inverse ``q`` for one map.

    Attributes
    ----------
    phi, q : TruncatedSeries
    a : scalar
        Multiplier at the fixed point.
    radius_estimate : float
        Estimated radius of convergence of ``q``.
    phi_radius : float
        Estimated radius of convergence of ``phi`` (finite for polynomial
        maps: ``phi`` branches over the critical values of ``Q``).
    """

    phi: TruncatedSeries
    q: TruncatedSeries
    a: object
    radius_estimate: float
    phi_radius: float
    bits: Optional[int]
    map: MapSpec = field(repr=False)

    @property
    def order(self) -> int:
        return self.phi.order


@dataclass(frozen=True)
class OrbitRecord:
    x: list
    map: MapSpec

    @classmethod
    def iterate(cls, G: MapSpec, x0, n: int, bits: Optional[int] = DEFAULT_BITS) -> "OrbitRecord":
        from .orbits import orbit

        return cls(orbit(G, x0, n, bits), G)


def _resonance_guard(a, order: int, bits: Optional[int]):
    for k in range(2, order + 1):
        gap = a ** k - a
        if bits is None:
            if gap == 0:
                raise ResonanceError(f"resonant multiplier: a^{k} = a")
        elif abs(gap) < mpctx(bits).ldexp(1, -(bits // 2)):
            raise ResonanceError(f"resonant multiplier: |a^{k} - a| below 2^-{bits // 2}")


def _phi_coefficients(g: TruncatedSeries, a, order: int, zero, one) -> list:
    """Match powers in ``phi(a z) = G(phi(z))`` column by column.

    ``pw[j][k] = [z^k] phi^j``; for ``j >= 2`` it only involves
    ``phi_1..phi_{k-1}`` so ``phi_k`` can be solved for directly.
    """
    phi = [zero, one] + [zero] * (order - 1)
    pw = [None, phi] + [[zero] * (order + 1) for _ in range(order - 1)]
    for j in range(2, order + 1):
        pw[j][j] = one  # leading term of phi^j since phi_1 = 1
    ak = a
    for k in range(2, order + 1):
        ak = ak * a
        s = zero
        for j in range(2, k + 1):
            if j < k:
                acc = zero
                prev = pw[j - 1]
                for i in range(1, k - j + 2):
                    if phi[i]:
                        acc += phi[i] * prev[k - i]
                pw[j][k] = acc
            gj = g[j]
            if gj:
                s += gj * pw[j][k]
        phi[k] = s / (ak - a)
    return phi


def _phi_radius(s: TruncatedSeries, bits: Optional[int]) -> float:
    """Convergence radius of ``phi``; when the coefficients decay faster
    than any geometric rate, the radius where the last retained term drops
    below working precision."""
    est = radius_estimate(s.coeffs)
    if math.isfinite(est):
        return est
    last = scalar_abs(s.coeffs[-1])
    if last == 0:
        return est
    target = 2.0 ** -(bits if bits is not None else 200)
    return math.exp((math.log(target) - math.log(last)) / s.order)


def solve_conjugation(G: MapSpec, order: int = CONJUGATION_ORDER,
                      bits: Optional[int] = DEFAULT_BITS) -> ConjugacyData:
    """Conjugation series ``phi`` and ``Q = phi^{-1}`` for ``G`` at 0.

    Parameters
    ----------
    G : MapSpec
        Map with fixed point 0 and multiplier ``0 < |a| < 1``.  A repelling
        multiplier is accepted only for linear-fractional maps.
    order : int
        Truncation order of both series.
    bits : int or None
        Mantissa bits; ``None`` runs the recursion in exact rationals (needs
        an exact map).

    Raises
    ------
    ResonanceError
        If ``a^k`` coincides with ``a`` for some ``2 <= k <= order``.
    MapError
        For ``|a| in {0, 1}`` or an unsupported repelling map.
    """
    if order < 1:
        raise ValueError("order must be positive")
    if G.fixed_point != 0:
        raise MapError("conjugation is computed at a fixed point 0; recenter the map first")
    if bits is None and not G.exact:
        raise ValueError("exact mode needs exact map coefficients")
    a = convert(G.multiplier, bits)
    ma = scalar_abs(a)
    if ma == 0:
        raise MapError("multiplier 0: superattracting, no Poincare conjugation")
    if ma == 1:
        raise MapError("multiplier on the unit circle: use the parabolic (Borel) solver for a = 1")
    if ma > 1 and G.kind != "linear_fractional":
        raise MapError("repelling multipliers are supported only for linear-fractional maps")
    _resonance_guard(a, order, bits)
    g = G.series(order, bits)
    zero, one = convert(0, bits), convert(1, bits)
    phi = TruncatedSeries(tuple(_phi_coefficients(g, a, order, zero, one)), "z", bits)
    q = ps_reversion(phi)
    r = radius_estimate(q.coeffs)
    return ConjugacyData(phi, q, a, r, _phi_radius(phi, bits), bits, G)


def q_by_functional_equation(G: MapSpec, order: int = CONJUGATION_ORDER,
                             bits: Optional[int] = DEFAULT_BITS) -> TruncatedSeries:
    """``Q`` straight from ``Q(G(z)) = a Q(z)`` (independent of reversion).

    ``q_k (a - a^k) = sum_{j<k} q_j [z^k] G^j``.
    """
    a = convert(G.multiplier, bits)
    _resonance_guard(a, order, bits)
    g = G.series(order, bits)
    zero = convert(0, bits)
    powers = [None, list(g.coeffs)]
    for j in range(2, order + 1):
        prev = powers[-1]
        row = [zero] * (order + 1)
        for k in range(j, order + 1):
            acc = zero
            for i in range(1, k - j + 2):
                if g[i]:
                    acc += g[i] * prev[k - i]
            row[k] = acc
        powers.append(row)
    q = [zero, convert(1, bits)] + [zero] * (order - 1)
    ak = a
    for k in range(2, order + 1):
        ak = ak * a
        s = zero
        for j in range(1, k):
            if q[j]:
                s += q[j] * powers[j][k]
        q[k] = s / (a - ak)
    return TruncatedSeries(tuple(q), "z", bits)


def _trusted_q(cd: ConjugacyData, x):
    res = ps_eval(cd.q, x, radius=cd.radius_estimate)
    if res.warning:
        raise OutsideValidity(res.warning)
    return res.value


def conserved_quantity(cd: ConjugacyData, n: int, x, extend: bool = False):
    """``C(n, x) = Q(x) a^{-n}``.

    With ``extend=True`` points outside the disk of convergence are handled
    by :func:`extend_Q`; otherwise they raise :class:`OutsideValidity`.
    """
    xx = convert(x, cd.bits) if cd.bits is not None or isinstance(x, (int, Fraction)) else x
    if scalar_abs(xx) >= cd.radius_estimate:
        if not extend:
            raise OutsideValidity(f"|x| = {scalar_abs(xx):.6g} >= radius {cd.radius_estimate:.6g}")
        qv = extend_Q(cd.map, cd, xx)
    else:
        qv = _trusted_q(cd, xx)
    return qv * cd.a ** (-n)


def _a_power(cd: ConjugacyData, z):
    """``a^z`` with the principal logarithm (exact powers for integer ``z``)."""
    bits = cd.bits if cd.bits is not None else DEFAULT_BITS
    ctx = mpctx(bits)
    a = convert(cd.a, bits)
    if isinstance(z, int):
        return a ** z
    return ctx.exp(ctx.convert(z) * ctx.log(a))


def continue_solution(cd: ConjugacyData, C, z, route: str = "phi"):
    """Solution ``x(z) = phi(C a^z)`` of the recurrence at complex ``z``.

    Parameters
    ----------
    route : {"phi", "transseries"}
        ``"phi"`` evaluates ``phi`` by Horner at ``w = C a^z``;
        ``"transseries"`` sums ``exp(z k ln a) C^k D_k`` term by term.

    Raises
    ------
    OutsideValidity
        If ``|C a^z|`` leaves the disk where the truncated ``phi`` is accurate.
    """
    bits = cd.bits if cd.bits is not None else DEFAULT_BITS
    ctx = mpctx(bits)
    Cc = ctx.convert(convert(C, bits) if isinstance(C, (int, Fraction, str, float)) else C)
    if Cc == 0:
        return ctx.mpf(0)
    w = Cc * _a_power(cd, z)
    if float(abs(w)) > cd.phi_radius:
        raise OutsideValidity(f"|C a^z| = {float(abs(w)):.6g} exceeds phi radius {cd.phi_radius:.6g}")
    phi = cd.phi.with_bits(bits) if cd.bits is None else cd.phi
    if route == "phi":
        return ps_eval(phi, w).value
    if route == "transseries":
        zz = ctx.convert(z)
        la = ctx.log(convert(cd.a, bits))
        total = ctx.mpf(0)
        for k in range(1, phi.order + 1):
            dk = phi[k]
            if dk:
                total += ctx.exp(zz * k * la) * Cc ** k * dk
        return total
    raise ValueError(f"unknown route {route!r}")


def _default_eps(G: MapSpec, cd: ConjugacyData) -> float:
    return min(contraction_radius(G), cd.radius_estimate / 2)


def extend_Q(G: MapSpec, cd: ConjugacyData, z, eps: Optional[float] = None,
             max_iter: int = BASIN_MAX_ITER):
    """Continue ``Q`` into the basin with ``Q(z) = a^{-M} Q(G^M(z))``.

    ``M`` is the first iterate with ``|G^M(z)| < eps``.  ``eps`` must lie in
    the contracting disk and inside the convergence disk of ``Q``.

    Raises
    ------
    NotInBasin
        The orbit escapes or fails to enter ``D_eps`` within ``max_iter``.
    """
    if eps is None:
        eps = _default_eps(G, cd)
    elif eps > _default_eps(G, cd):
        raise ValueError(f"eps = {eps:g} is outside the admissible contracting disk")
    bits = cd.bits if cd.bits is not None else DEFAULT_BITS
    Gb = G.with_bits(bits)
    R = G.escape_radius() if G.kind == "polynomial" else 1e30
    w = convert(z, bits) if not hasattr(z, "context") else z
    M = 0
    while float(abs(w)) >= eps:
        if M >= max_iter:
            raise NotInBasin(f"no entry into D_eps after {max_iter} iterations")
        try:
            w = Gb(w)
        except ZeroDivisionError:
            raise NotInBasin("orbit hit a pole") from None
        M += 1
        aw = float(abs(w))
        if not math.isfinite(aw) or aw > R:
            raise NotInBasin(f"orbit escaped after {M} iterations")
    q = cd.q.with_bits(bits) if cd.bits is None else cd.q
    return ps_eval(q, w).value * convert(cd.a, bits) ** (-M)


@dataclass
class ProbeReport:
    radius_estimate: float
    ray_samples: List[dict]
    boundary_distance: Optional[float]
    direction: complex = 1.0
    flags: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "radius_estimate": self.radius_estimate,
            "ray_samples": self.ray_samples,
            "boundary_distance": self.boundary_distance,
            "direction": [self.direction.real, self.direction.imag],
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProbeReport":
        d = data.get("direction", [1.0, 0.0])
        return cls(data["radius_estimate"], list(data["ray_samples"]), data["boundary_distance"],
                   complex(d[0], d[1]), list(data.get("flags", [])))

    @property
    def relative_gap(self) -> float:
        if self.boundary_distance is None or not math.isfinite(self.radius_estimate):
            return math.inf
        return abs(self.radius_estimate / self.boundary_distance - 1)


def barrier_probe(G: MapSpec, cd: ConjugacyData, direction=-1, steps: int = 32,
                  max_iter: int = BASIN_MAX_ITER, depth: float = 8.0) -> ProbeReport:
    """Compare the Taylor radius of ``Q`` with the basin boundary along a ray.

    Samples ``|Q|`` and a central-difference ``|Q'|`` at distances
    ``d * 10^{-depth k/(steps-1)}`` from the boundary point found by the
    escape oracle.  No blow-up rate is asserted; the data are reported raw.
    """
    u = complex(direction)
    if u == 0:
        raise ValueError("direction must be nonzero")
    u /= abs(u)
    flags: List[str] = []
    if G.kind == "linear_fractional":
        flags.append("no_barrier")
        flags.append("isolated_pole")
        return ProbeReport(cd.radius_estimate, [], None, u, flags)
    if G.kind != "polynomial":
        flags.append("inconclusive")
        flags.append("non_polynomial_map")
        return ProbeReport(cd.radius_estimate, [], None, u, flags)
    dist = ray_boundary_distance(G, u, max_iter)
    bits = cd.bits if cd.bits is not None else DEFAULT_BITS
    ctx = mpctx(bits)
    samples = []
    for k in range(steps):
        gap = dist * 10.0 ** (-depth * k / max(steps - 1, 1))
        t = dist - gap
        hh = gap / 16
        try:
            zc = ctx.mpc(u.real, u.imag)
            q0 = extend_Q(G, cd, zc * t, max_iter=max_iter)
            qp = extend_Q(G, cd, zc * (t + hh), max_iter=max_iter)
            qm = extend_Q(G, cd, zc * (t - hh), max_iter=max_iter)
        except NotInBasin:
            flags.append("sample_left_basin")
            break
        samples.append({"t": float(t), "q_abs": float(abs(q0)),
                        "dq_abs": float(abs(qp - qm) / (2 * hh))})
    rep = ProbeReport(cd.radius_estimate, samples, dist, u, flags)
    if rep.relative_gap > 0.05:
        rep.flags.append("inconclusive")
    else:
        rep.flags.append("radius_matches_boundary")
    if len(samples) >= 2 and samples[-1]["dq_abs"] > samples[0]["dq_abs"]:
        rep.flags.append("derivative_growth")
    return rep


def conjugation_residual(cd: ConjugacyData, radius: float, n: int = 64) -> float:
    """``max |phi(a z) - G(phi(z))|`` on the circle ``|z| = radius``."""
    bits = cd.bits if cd.bits is not None else DEFAULT_BITS
    ctx = mpctx(bits)
    phi = cd.phi.with_bits(bits) if cd.bits is None else cd.phi
    Gb = cd.map.with_bits(bits)
    a = convert(cd.a, bits)
    worst = 0.0
    for k in range(n):
        z = radius * ctx.expjpi(ctx.mpf(2 * k) / n)
        r = abs(phi(a * z) - Gb(phi(z)))
        worst = max(worst, float(r))
    return worst


def q_equation_residual(cd: ConjugacyData, points) -> float:
    """``max |Q(G(z)) - a Q(z)|`` over the given points."""
    bits = cd.bits if cd.bits is not None else DEFAULT_BITS
    q = cd.q.with_bits(bits) if cd.bits is None else cd.q
    Gb = cd.map.with_bits(bits)
    a = convert(cd.a, bits)
    worst = 0.0
    for z in points:
        zz = convert(z, bits) if not hasattr(z, "context") else z
        worst = max(worst, float(abs(q(Gb(zz)) - a * q(zz))))
    return worst
