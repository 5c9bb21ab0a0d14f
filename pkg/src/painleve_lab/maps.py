"""Rational maps ``G = num / den`` stored as ascending coefficient tuples.

Coefficients are kept exact (:class:`fractions.Fraction`) whenever the input
allows it, so that the classifier can reason syntactically.  Float evaluation
takes an explicit precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .series import TruncatedSeries, convert, ps_inv, ps_mul, to_fraction


class MapError(ValueError):
    """Invalid map data, e.g. a claimed fixed point that is not fixed."""


# polynomial helpers, ascending order, exact or mpmath scalars

def poly_trim(p: Sequence) -> tuple:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p) if p else (Fraction(0),)


def poly_degree(p: Sequence) -> int:
    p = poly_trim(p)
    if len(p) == 1 and p[0] == 0:
        return -1
    return len(p) - 1


def poly_add(p, q) -> tuple:
    n = max(len(p), len(q))
    p = list(p) + [0] * (n - len(p))
    q = list(q) + [0] * (n - len(q))
    return poly_trim([x + y for x, y in zip(p, q)])


def poly_scale(p, c) -> tuple:
    return poly_trim([c * x for x in p])


def poly_mul(p, q) -> tuple:
    out = [0] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x == 0:
            continue
        for j, y in enumerate(q):
            out[i + j] += x * y
    return poly_trim(out)


def poly_pow(p, m: int) -> tuple:
    out: tuple = (Fraction(1),)
    base = tuple(p)
    while m:
        if m & 1:
            out = poly_mul(out, base)
        m >>= 1
        if m:
            base = poly_mul(base, base)
    return out


def poly_eval(p, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_deriv(p) -> tuple:
    if len(p) <= 1:
        return (Fraction(0),)
    return poly_trim([k * p[k] for k in range(1, len(p))])


def poly_divmod(p, q):
    """Exact long division; ``q`` must have a nonzero leading coefficient."""
    p = list(poly_trim(p))
    q = poly_trim(q)
    dq = poly_degree(q)
    if dq < 0:
        raise ZeroDivisionError("polynomial division by zero")
    lead = q[-1]
    if poly_degree(p) < dq:
        return (Fraction(0),), poly_trim(p)
    quot = [Fraction(0)] * (len(p) - dq)
    for k in range(len(p) - 1, dq - 1, -1):
        c = p[k] / lead
        quot[k - dq] = c
        if c:
            for j in range(dq + 1):
                p[k - dq + j] -= c * q[j]
    return poly_trim(quot), poly_trim(p[:dq] or [0])


def poly_gcd(p, q) -> tuple:
    """Monic gcd by the Euclidean algorithm (exact coefficients only)."""
    a, b = poly_trim(p), poly_trim(q)
    while poly_degree(b) >= 0:
        _, r = poly_divmod(a, b)
        a, b = b, r
    if poly_degree(a) < 0:
        return (Fraction(0),)
    return poly_scale(a, 1 / a[-1])


def _exact_tuple(cs) -> Optional[tuple]:
    try:
        return tuple(to_fraction(c) for c in cs)
    except TypeError:
        return None


@dataclass(frozen=True)
class MapSpec:
    """A rational map ``G(x) = num(x) / den(x)``.

    Parameters
    ----------
    num, den : sequence
        Ascending coefficients.  Exact rationals where possible.
    fixed_point : scalar
        Point ``p`` with ``G(p) = p``; checked on construction.
    label : str
        Free-form description kept for reports.

    Notes
    -----
    ``kind`` is derived: ``polynomial`` when ``den`` is constant,
    ``linear_fractional`` when both degrees are at most one, else
    ``rational``.
    """

    num: tuple
    den: tuple = (Fraction(1),)
    fixed_point: object = Fraction(0)
    label: str = ""
    kind: str = field(init=False)

    def __post_init__(self):
        num = _exact_tuple(self.num) or tuple(self.num)
        den = _exact_tuple(self.den) or tuple(self.den)
        num, den = poly_trim(num), poly_trim(den)
        if poly_degree(den) < 0:
            raise MapError("denominator is identically zero")
        # normalize a constant denominator into the numerator
        if poly_degree(den) == 0 and den[0] != 1:
            num = poly_scale(num, 1 / den[0])
            den = (Fraction(1),)
        fp = self.fixed_point
        if isinstance(fp, (int, float, str)):
            fp = to_fraction(fp)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "fixed_point", fp)
        dn, dd = poly_degree(num), poly_degree(den)
        if dd == 0:
            kind = "polynomial"
        elif dn <= 1 and dd <= 1:
            kind = "linear_fractional"
        else:
            kind = "rational"
        object.__setattr__(self, "kind", kind)
        dv = poly_eval(den, fp)
        if dv == 0:
            raise MapError(f"fixed point {fp} is a pole of G")
        gap = poly_eval(num, fp) / dv - fp
        if self.exact:
            if gap != 0:
                raise MapError(f"G({fp}) != {fp}")
        elif abs(gap) > 1e-12 * (1 + abs(fp)):
            raise MapError(f"G({fp}) != {fp} (off by {abs(gap):.3g})")

    # constructors

    @classmethod
    def polynomial(cls, coeffs: Sequence, fixed_point=0, label: str = "") -> "MapSpec":
        return cls(tuple(coeffs), (1,), fixed_point, label)

    @classmethod
    def logistic(cls, a, label: Optional[str] = None) -> "MapSpec":
        """``a x (1 - x)`` with its fixed point 0."""
        a = to_fraction(a) if not hasattr(a, "context") else a
        return cls((0, a, -a), (1,), 0, label or f"logistic a={a}")

    @classmethod
    def linear_fractional(cls, a, b, label: Optional[str] = None) -> "MapSpec":
        """``a z / (1 + b z)``."""
        a = to_fraction(a) if not hasattr(a, "context") else a
        b = to_fraction(b) if not hasattr(b, "context") else b
        return cls((0, a), (1, b), 0, label or f"lf a={a} b={b}")

    @classmethod
    def rational(cls, num: Sequence, den: Sequence, fixed_point=0, label: str = "") -> "MapSpec":
        return cls(tuple(num), tuple(den), fixed_point, label)

    @classmethod
    def parse(cls, expr: str, fixed_point=0, **params) -> "MapSpec":
        """Build a map from an expression in ``x`` (or ``z``) via sympy.

        Parameters are substituted exactly: ``parse("a*x*(1-x)", a="0.5")``
        gives the logistic map with ``a = 1/2``.
        """
        import sympy

        x = sympy.Symbol("x")
        local = {"x": x, "z": x}
        for k, v in params.items():
            local[k] = sympy.Rational(str(to_fraction(v)))
        try:
            e = sympy.sympify(expr, locals=local, rational=True)
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise MapError(f"cannot parse map expression {expr!r}: {exc}") from None
        free = e.free_symbols - {x}
        if free:
            names = ", ".join(sorted(str(s) for s in free))
            raise MapError(f"unbound parameters in map expression: {names}")
        n, d = sympy.fraction(sympy.together(e))
        try:
            pn, pd = sympy.Poly(n, x), sympy.Poly(d, x)
        except sympy.PolynomialError as exc:
            raise MapError(f"map is not rational in x: {exc}") from None

        def coeffs(p):
            out = []
            for c in reversed(p.all_coeffs()):
                if not c.is_rational:
                    raise MapError(f"non-rational coefficient {c} in {expr!r}")
                out.append(Fraction(int(c.p), int(c.q)))
            return out

        return cls(tuple(coeffs(pn)), tuple(coeffs(pd)), fixed_point, expr)

    # properties

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.num + self.den) and isinstance(
            self.fixed_point, Fraction)

    @property
    def degree(self) -> int:
        return max(poly_degree(self.num), poly_degree(self.den))

    @property
    def multiplier(self):
        """``G'(p)`` at the stored fixed point, exact when possible."""
        p = self.fixed_point
        n, d = self.num, self.den
        dv = poly_eval(d, p)
        return (poly_eval(poly_deriv(n), p) * dv - poly_eval(n, p) * poly_eval(poly_deriv(d), p)) / (dv * dv)

    @property
    def regime(self) -> str:
        m = abs(self.multiplier)
        if m == 0:
            return "superattracting"
        if m < 1:
            return "attracting"
        if m == 1:
            return "neutral"
        return "repelling"

    def __call__(self, x):
        return poly_eval(self.num, x) / poly_eval(self.den, x)

    def eval(self, x, bits: Optional[int] = None):
        """Evaluate at ``x`` in the arithmetic selected by ``bits``."""
        if bits is None:
            return self(x)
        num = tuple(convert(c, bits) for c in self.num)
        den = tuple(convert(c, bits) for c in self.den)
        xx = convert(x, bits)
        return poly_eval(num, xx) / poly_eval(den, xx)

    def with_bits(self, bits: int) -> "MapSpec":
        return MapSpec(tuple(convert(c, bits) for c in self.num),
                       tuple(convert(c, bits) for c in self.den),
                       convert(self.fixed_point, bits), self.label)

    def series(self, order: int, bits: Optional[int] = None, var: str = "z") -> TruncatedSeries:
        """Taylor series of ``G`` at 0 (the fixed point must be 0)."""
        if self.fixed_point != 0:
            raise MapError("series expansion is taken at a fixed point 0; recenter first")
        n = TruncatedSeries.from_coeffs(self.num, var, bits, order)
        d = TruncatedSeries.from_coeffs(self.den, var, bits, order)
        if poly_degree(self.den) == 0:
            return n * (1 / d[0])
        return ps_mul(n, ps_inv(d))

    def escape_radius(self) -> float:
        """Radius outside which orbits of a polynomial map diverge.

        For ``c_d x^d + ... + c_0`` the bound ``R = (2 + sum_{j<d}|c_j|)/|c_d|``
        (at least 1) guarantees ``|G(x)| >= 2|x| - ...`` so ``|G(x)| > |x|``.
        """
        if self.kind != "polynomial":
            raise MapError("escape radius is defined for polynomial maps")
        d = poly_degree(self.num)
        if d < 2:
            raise MapError("escape radius needs degree >= 2")
        lower = sum(abs(complex(c)) for c in self.num[:d])
        return max(1.0, (2.0 + float(lower)) / abs(complex(self.num[d])))

    def to_json(self) -> dict:
        def enc(c):
            if isinstance(c, Fraction):
                return f"{c.numerator}/{c.denominator}"
            return str(c)

        return {"kind": self.kind, "num": [enc(c) for c in self.num],
                "den": [enc(c) for c in self.den], "fixed_point": enc(self.fixed_point),
                "multiplier": enc(self.multiplier), "label": self.label}

    @classmethod
    def from_json(cls, data: dict) -> "MapSpec":
        return cls(tuple(Fraction(c) for c in data["num"]), tuple(Fraction(c) for c in data["den"]),
                   Fraction(data["fixed_point"]), data.get("label", ""))
