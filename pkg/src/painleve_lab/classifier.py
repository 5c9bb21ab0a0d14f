"""Painleve-property classification of first-order recurrences.

An autonomous recurrence ``x_{n+1} = G(x_n)`` with an attracting fixed point
at 0 has the Painleve property exactly when ``G(z) = a z / (1 + b z)``.  For
the logistic family ``a x (1 - x)`` the property holds only for
``a in {-2, 0, 2, 4}``; the three non-degenerate cases ship with closed-form
solutions that are re-verified every time they are used.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .maps import (MapError, MapSpec, poly_add, poly_degree, poly_divmod, poly_eval,
                   poly_gcd, poly_mul, poly_pow, poly_scale, poly_trim)
from .series import DEFAULT_BITS, mpctx, to_fraction

DEGREE_CAP = 4096


class DegreeOverflow(ValueError):
    """Composition degree would exceed the configured cap."""


class PoleError(ZeroDivisionError):
    """The closed-form solution is infinite at this ``n`` (orbit hits a pole)."""


class Reason(str, enum.Enum):
    LINEAR_FRACTIONAL = "LinearFractional"
    NOT_LINEAR_FRACTIONAL = "NotLinearFractional"
    CATALOG_MATCH = "CatalogMatch"
    OUT_OF_SCOPE = "OutOfScope"


@dataclass(frozen=True)
class PainleveVerdict:
    """Outcome of :func:`painleve_test`.

    ``has_pp`` is true iff a linear-fractional witness ``(a, b)`` exists or
    the map is a verified catalog entry.
    """

    has_pp: bool
    witness: Optional[Tuple[Fraction, Fraction]]
    reason: Reason
    detail: str = ""
    fixed_point: object = Fraction(0)

    def __post_init__(self):
        if self.has_pp != (self.witness is not None or self.reason is Reason.CATALOG_MATCH):
            raise ValueError("inconsistent verdict: has_pp must match witness/catalog")

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            w = [_enc(self.witness[0]), _enc(self.witness[1])]
        return {"has_pp": self.has_pp, "witness": w, "reason": self.reason.value,
                "detail": self.detail, "fixed_point": _enc(self.fixed_point)}

    @classmethod
    def from_json(cls, data: dict) -> "PainleveVerdict":
        w = data.get("witness")
        if w is not None:
            w = (Fraction(w[0]), Fraction(w[1]))
        return cls(data["has_pp"], w, Reason(data["reason"]), data.get("detail", ""),
                   Fraction(data.get("fixed_point", "0")))


def _enc(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return str(x)


def _exact_map(G: MapSpec) -> MapSpec:
    if G.exact:
        return G
    try:
        return MapSpec(tuple(to_fraction(str(c)) for c in G.num), tuple(to_fraction(str(c)) for c in G.den),
                       to_fraction(str(G.fixed_point)), G.label)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise MapError(f"map coefficients have no exact rational form: {exc}") from None


def reduce_map(G: MapSpec) -> MapSpec:
    """Cancel the common polynomial factor of numerator and denominator."""
    G = _exact_map(G)
    g = poly_gcd(G.num, G.den)
    if poly_degree(g) <= 0:
        return G
    num, _ = poly_divmod(G.num, g)
    den, _ = poly_divmod(G.den, g)
    return MapSpec(num, den, G.fixed_point, G.label)


def is_linear_fractional(G: MapSpec) -> Optional[Tuple[Fraction, Fraction]]:
    """Return ``(a, b)`` when the reduced map is exactly ``a z / (1 + b z)``.

    The test is syntactic after gcd reduction, in exact rationals.  The
    constant map ``0`` (``a = 0``) is not accepted.
    """
    R = reduce_map(G)
    num, den = poly_trim(R.num), poly_trim(R.den)
    if poly_degree(num) != 1 or num[0] != 0 or poly_degree(den) > 1 or den[0] == 0:
        return None
    d0 = den[0]
    a = num[1] / d0
    b = (den[1] / d0) if len(den) > 1 else Fraction(0)
    return (a, b)


def _taylor_shift(p, c) -> tuple:
    """Coefficients of ``p(c + s)`` in powers of ``s``."""
    out: tuple = (Fraction(0),)
    shift = (c, Fraction(1))
    for coef in reversed(p):
        out = poly_add(poly_mul(out, shift), (coef,))
    return out


def recenter(G: MapSpec, p) -> MapSpec:
    """Conjugate by a translation so that the fixed point ``p`` moves to 0.

    ``G_1(s) = G(p + s) - p``.
    """
    G = _exact_map(G)
    p = to_fraction(p) if not isinstance(p, Fraction) else p
    if poly_eval(G.den, p) == 0 or G(p) != p:
        raise MapError(f"{p} is not a fixed point of G")
    num = _taylor_shift(G.num, p)
    den = _taylor_shift(G.den, p)
    num = poly_add(num, poly_scale(den, -p))
    label = f"{G.label} recentered at {p}" if G.label else f"recentered at {p}"
    return MapSpec(num, den, Fraction(0), label)


def compose(G: MapSpec, H: MapSpec, degree_cap: int = DEGREE_CAP) -> MapSpec:
    """``G(H(z))`` as a reduced rational map (exact)."""
    G, H = _exact_map(G), _exact_map(H)
    d = G.degree
    if d * max(H.degree, 1) > degree_cap:
        raise DegreeOverflow(f"composition degree {d * H.degree} exceeds cap {degree_cap}")
    p, q = H.num, H.den
    num: tuple = (Fraction(0),)
    den: tuple = (Fraction(0),)
    for k in range(d + 1):
        term = poly_mul(poly_pow(p, k), poly_pow(q, d - k))
        if k < len(G.num) and G.num[k]:
            num = poly_add(num, poly_scale(term, G.num[k]))
        if k < len(G.den) and G.den[k]:
            den = poly_add(den, poly_scale(term, G.den[k]))
    return reduce_map(MapSpec(num, den, H.fixed_point, ""))


def iterate_map(G: MapSpec, m: int, degree_cap: int = DEGREE_CAP) -> MapSpec:
    """The ``m``-fold composition ``G o ... o G`` as a reduced map.

    Raises
    ------
    DegreeOverflow
        If ``deg(G)^m`` exceeds ``degree_cap``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    G = reduce_map(G)
    if G.degree > 1 and m * math.log(G.degree) > math.log(degree_cap):
        raise DegreeOverflow(f"deg(G)^m = {G.degree}^{m} exceeds cap {degree_cap}")
    out = G
    for _ in range(m - 1):
        out = compose(G, out, degree_cap)
    label = f"{G.label}^[{m}]" if G.label else f"iterate {m}"
    return MapSpec(out.num, out.den, G.fixed_point, label)


def solve_linear_fractional(a, b, C, n, bits: Optional[int] = None):
    """Closed-form solution ``x_n = 1 / (C a^{-n} + b/(a - 1))``.

    Exact for rational inputs and integer ``n``.  Complex ``n`` is evaluated
    with ``a^{-n} = exp(-n log a)`` at ``bits`` precision.  ``C`` may be
    ``math.inf``, giving the second fixed point ``(a - 1)/b``.

    Raises
    ------
    PoleError
        When ``C a^{-n} = b/(1 - a)`` exactly; then ``x_n = inf`` and
        ``x_{n+1} = a/b``.
    """
    if isinstance(C, float) and math.isinf(C):
        a, b = to_fraction(a), to_fraction(b)
        if a == 1:
            raise ZeroDivisionError("a = 1 has no second fixed point")
        if b == 0:
            raise ZeroDivisionError("b = 0: the limit C -> inf is x_n = 0")
        return (a - 1) / b
    exact = isinstance(n, int) and all(isinstance(v, (int, Fraction, str)) for v in (a, b, C))
    if exact:
        a, b, C = to_fraction(a), to_fraction(b), to_fraction(C)
        if a == 0:
            raise ZeroDivisionError("a = 0 is degenerate")
        if a == 1:
            raise ZeroDivisionError("a = 1: division by a - 1")
        d = C * a ** (-n) + b / (a - 1)
        if d == 0:
            raise PoleError(f"x_{n} is infinite (the orbit passes through the pole of G)")
        return 1 / d
    ctx = mpctx(bits or DEFAULT_BITS)
    a = ctx.convert(a if not isinstance(a, Fraction) else ctx.mpf(a.numerator) / a.denominator)
    b = ctx.convert(b if not isinstance(b, Fraction) else ctx.mpf(b.numerator) / b.denominator)
    C = ctx.convert(C if not isinstance(C, Fraction) else ctx.mpf(C.numerator) / C.denominator)
    if a == 1:
        raise ZeroDivisionError("a = 1: division by a - 1")
    return 1 / (C * ctx.exp(-ctx.convert(n) * ctx.log(a)) + b / (a - 1))


# catalog of solvable logistic parameters

@dataclass(frozen=True)
class CatalogEntry:
    """A solvable logistic parameter with its closed-form orbit."""

    a: Fraction
    conjugation: str
    formula: str
    solution: Optional[Callable] = field(default=None, repr=False, compare=False)
    degenerate: bool = False


def _sol_a4(x0, n, ctx):
    th = ctx.asin(ctx.sqrt(x0))
    return ctx.sin(th * 2 ** n) ** 2


def _sol_a2(x0, n, ctx):
    return (1 - (1 - 2 * x0) ** (2 ** n)) / 2


def _sol_am2(x0, n, ctx):
    th = ctx.acos((2 * x0 - 1) / 2)
    return (1 + 2 * ctx.cos(th * 2 ** n)) / 2


CATALOG: Dict[Fraction, CatalogEntry] = {
    Fraction(4): CatalogEntry(Fraction(4), "x = sin^2(t) turns G into t -> 2t",
                              "x_n = sin^2(2^n t), sin^2 t = x_0", _sol_a4),
    Fraction(2): CatalogEntry(Fraction(2), "u = 1 - 2x turns G into u -> u^2",
                              "x_n = (1 - (1 - 2 x_0)^(2^n)) / 2", _sol_a2),
    Fraction(-2): CatalogEntry(Fraction(-2), "u = 2x - 1 turns G into u -> u^2 - 2, u = 2 cos t",
                               "x_n = (1 + 2 cos(2^n t)) / 2, 2 cos t = 2 x_0 - 1", _sol_am2),
    Fraction(0): CatalogEntry(Fraction(0), "none (G = 0)", "x_n = 0 for n >= 1 (degenerate)",
                              None, degenerate=True),
}


def verify_catalog_entry(entry: CatalogEntry, bits: int = 256, depth: int = 8,
                         tol_bits: int = 60) -> bool:
    """Substitute the closed form into ``x_{n+1} = a x_n (1 - x_n)``.

    Checks ``depth`` steps from several real and complex seeds at ``bits``
    precision, and compares against direct iteration.  Degenerate entries
    carry no formula and verify trivially as ``False``.
    """
    if entry.degenerate or entry.solution is None:
        return False
    ctx = mpctx(bits)
    a = ctx.mpf(entry.a.numerator) / entry.a.denominator
    tol = ctx.ldexp(1, -(bits - tol_bits))
    seeds = [ctx.mpf(1) / 10, ctx.mpf(1) / 3, ctx.mpf(7) / 10, ctx.mpc(0.2, 0.1)]
    for x0 in seeds:
        x = x0
        for n in range(depth):
            xn = entry.solution(x0, n, ctx)
            xn1 = entry.solution(x0, n + 1, ctx)
            scale = 1 + abs(xn1)
            if abs(xn1 - a * xn * (1 - xn)) > tol * scale * 4 ** n:
                return False
            if abs(xn - x) > tol * scale * 4 ** n:
                return False
            x = a * x * (1 - x)
    if entry.a == 2:
        # exact rational identity for this entry
        for x0 in (Fraction(1, 10), Fraction(2, 7)):
            x = x0
            for n in range(6):
                if (1 - (1 - 2 * x0) ** (2 ** n)) / 2 != x:
                    return False
                x = 2 * x * (1 - x)
    return True


def catalog_lookup(a) -> Optional[CatalogEntry]:
    return CATALOG.get(to_fraction(a) if not isinstance(a, Fraction) else a)


def logistic_parameter(G: MapSpec) -> Optional[Fraction]:
    """``a`` when ``G`` is literally ``a x (1 - x)`` with fixed point 0."""
    G = _exact_map(G)
    if G.fixed_point != 0 or G.kind != "polynomial":
        return None
    num = poly_trim(G.num)
    if len(num) == 3 and num[0] == 0 and num[2] == -num[1] and num[1] != 0:
        return num[1]
    if len(num) == 1 and num[0] == 0:
        return Fraction(0)
    return None


def _rational_fixed_points(G: MapSpec) -> List[Fraction]:
    import sympy

    x = sympy.Symbol("x")
    f = sum(sympy.Rational(c.numerator, c.denominator) * x ** k for k, c in enumerate(G.num))
    g = sum(sympy.Rational(c.numerator, c.denominator) * x ** k for k, c in enumerate(G.den))
    poly = sympy.Poly(sympy.expand(f - x * g), x)
    if poly.is_zero:
        return []
    roots = sympy.roots(poly, filter="Q")
    out = []
    for r in roots:
        fr = Fraction(int(r.p), int(r.q))
        if poly_eval(G.den, fr) != 0:
            out.append(fr)
    return sorted(out)


def painleve_test(G: MapSpec) -> PainleveVerdict:
    """Decide the Painleve property for ``x_{n+1} = G(x_n)``.

    Logistic maps are decided by the solvable-parameter catalog.  Other
    rational maps are moved to an attracting rational fixed point (if the
    stored one is not attracting) and tested for the form
    ``a z / (1 + b z)``.  No attracting fixed point gives ``OutOfScope``.
    """
    G = _exact_map(G)
    la = logistic_parameter(G)
    if la is not None:
        entry = catalog_lookup(la)
        if entry is not None:
            if entry.degenerate:
                return PainleveVerdict(True, None, Reason.CATALOG_MATCH,
                                       "a = 0: recurrence degenerates to x_{n+1} = 0")
            if not verify_catalog_entry(entry):
                raise RuntimeError(f"catalog entry a = {la} failed runtime verification")
            return PainleveVerdict(True, None, Reason.CATALOG_MATCH, entry.formula)
        return PainleveVerdict(False, None, Reason.NOT_LINEAR_FRACTIONAL,
                               f"logistic a = {la} is not a solvable parameter")
    H = reduce_map(G)
    center = H.fixed_point
    mult = H.multiplier
    if not 0 < abs(mult) < 1:
        candidates = [p for p in _rational_fixed_points(H) if p != H.fixed_point]
        attracting = [p for p in candidates if 0 < abs(recenter(H, p).multiplier) < 1]
        if not attracting:
            return PainleveVerdict(False, None, Reason.OUT_OF_SCOPE,
                                   f"no attracting rational fixed point (multiplier at {H.fixed_point} is {mult})",
                                   H.fixed_point)
        center = attracting[0]
        H = recenter(H, center)
    w = is_linear_fractional(H)
    if w is not None:
        return PainleveVerdict(True, w, Reason.LINEAR_FRACTIONAL,
                               f"G(z) = {w[0]} z / (1 + {w[1]} z)", center)
    return PainleveVerdict(False, None, Reason.NOT_LINEAR_FRACTIONAL,
                           f"reduced degree {H.degree} map is not linear-fractional", center)
