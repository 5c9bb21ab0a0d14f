"""Truncated power series over exact rationals or fixed-precision big floats.

A series carries its own precision: ``bits=None`` means every coefficient is a
:class:`fractions.Fraction` and arithmetic is exact; an integer ``bits`` means
coefficients live in an mpmath context of that many mantissa bits.  There is
no ambient precision anywhere in this module.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import NamedTuple, Optional, Sequence

from mpmath.ctx_mp import MPContext

DEFAULT_BITS = 512
CONJUGATION_ORDER = 64
FREL_ORDER = 128


@functools.lru_cache(maxsize=None)
def mpctx(bits: int) -> MPContext:
    """Return a private mpmath context with ``bits`` of working precision.

    Contexts are cached and must be treated as read-only; never change
    ``prec`` on the returned object.
    """
    if bits < 8:
        raise ValueError(f"precision must be at least 8 bits, got {bits}")
    ctx = MPContext()
    ctx.prec = int(bits)
    return ctx


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def to_fraction(x) -> Fraction:
    """Exact conversion of ints, Fractions and decimal strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # go through repr so that 0.3 means 3/10, not its binary expansion
        return Fraction(repr(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def convert(x, bits: Optional[int]):
    """Coerce a scalar to the arithmetic selected by ``bits``."""
    if bits is None:
        return to_fraction(x)
    ctx = mpctx(bits)
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return ctx.mpmathify(x.replace(" ", ""))
    return ctx.convert(x)


def _common_bits(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def scalar_abs(x) -> float:
    if isinstance(x, Fraction):
        return abs(float(x))
    return float(abs(x))


@dataclass(frozen=True)
class TruncatedSeries:
    """Power series ``sum(coeffs[k] * var**k)`` known up to order ``len(coeffs)-1``.

    Parameters
    ----------
    coeffs : tuple
        Coefficients 0..N, all Fractions (exact mode) or all mpmath numbers.
    var : str
        Variable label; arithmetic between different labels is refused.
    bits : int or None
        Mantissa bits of the float mode, ``None`` for exact rationals.
    """

    coeffs: tuple
    var: str = "z"
    bits: Optional[int] = None

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("a truncated series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(convert(c, self.bits) for c in self.coeffs))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, var: str = "z", bits: Optional[int] = None,
                    order: Optional[int] = None) -> "TruncatedSeries":
        cs = list(coeffs)
        if order is not None:
            cs = (cs + [0] * (order + 1))[: order + 1]
        return cls(tuple(cs), var, bits)

    @classmethod
    def variable(cls, order: int, var: str = "z", bits: Optional[int] = None):
        return cls.from_coeffs([0, 1], var, bits, order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return self.bits is None

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def zero(self):
        return convert(0, self.bits)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return TruncatedSeries(self.coeffs[: order + 1], self.var, self.bits)

    def with_bits(self, bits: Optional[int]) -> "TruncatedSeries":
        if bits == self.bits:
            return self
        if bits is None:
            raise ValueError("float series cannot be made exact")
        return TruncatedSeries(self.coeffs, self.var, bits)

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return ps_add(self, other)
        cs = list(self.coeffs)
        cs[0] = cs[0] + convert(other, self.bits)
        return TruncatedSeries(tuple(cs), self.var, self.bits)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(tuple(-c for c in self.coeffs), self.var, self.bits)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return ps_mul(self, other)
        c = convert(other, self.bits)
        return TruncatedSeries(tuple(c * x for x in self.coeffs), self.var, self.bits)

    __rmul__ = __mul__

    def __call__(self, z):
        return ps_eval(self, z).value

    def derivative(self) -> "TruncatedSeries":
        cs = [k * self.coeffs[k] for k in range(1, len(self.coeffs))] or [0]
        return TruncatedSeries(tuple(cs), self.var, self.bits)

    def equals(self, other: "TruncatedSeries", tol: float = 0.0) -> bool:
        n = min(self.order, other.order)
        return all(scalar_abs(self[k] - other[k]) <= tol for k in range(n + 1))

    def to_json(self) -> dict:
        return series_to_json(self)

    def __repr__(self):
        head = ", ".join(_short(c) for c in self.coeffs[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        mode = "exact" if self.bits is None else f"{self.bits} bits"
        return f"TruncatedSeries([{head}{more}], var={self.var!r}, order={self.order}, {mode})"


def _short(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return str(c.context.nstr(c, 8))


def _check_vars(a: TruncatedSeries, b: TruncatedSeries):
    if a.var != b.var:
        raise ValueError(f"variable mismatch: {a.var!r} vs {b.var!r}")


def _align(a: TruncatedSeries, b: TruncatedSeries):
    _check_vars(a, b)
    bits = _common_bits(a.bits, b.bits)
    n = min(a.order, b.order)
    ca = [convert(c, bits) for c in a.coeffs[: n + 1]]
    cb = [convert(c, bits) for c in b.coeffs[: n + 1]]
    return ca, cb, n, bits


def ps_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    ca, cb, n, bits = _align(a, b)
    return TruncatedSeries(tuple(x + y for x, y in zip(ca, cb)), a.var, bits)


def _cauchy(ca, cb, n, zero):
    out = []
    for k in range(n + 1):
        s = zero
        for i in range(k + 1):
            x = ca[i]
            if x:
                s += x * cb[k - i]
        out.append(s)
    return out


def ps_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated to the smaller order."""
    ca, cb, n, bits = _align(a, b)
    return TruncatedSeries(tuple(_cauchy(ca, cb, n, convert(0, bits))), a.var, bits)


def ps_inv(f: TruncatedSeries) -> TruncatedSeries:
    """Multiplicative inverse; requires a nonzero constant term."""
    c = f.coeffs
    if not c[0]:
        raise ZeroDivisionError("series with zero constant term has no reciprocal")
    inv0 = 1 / c[0]
    out = [inv0]
    for k in range(1, f.order + 1):
        s = f.zero()
        for i in range(1, k + 1):
            if c[i]:
                s += c[i] * out[k - i]
        out.append(-s * inv0)
    return TruncatedSeries(tuple(out), f.var, f.bits)


def ps_compose(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """``f(g(z))`` truncated to ``min(f.order, g.order)``; needs ``g(0) == 0``."""
    if g.coeffs[0]:
        raise ValueError("inner series must have zero constant term")
    bits = _common_bits(f.bits, g.bits)
    n = min(f.order, g.order)
    gc = [convert(c, bits) for c in g.coeffs[: n + 1]]
    zero = convert(0, bits)
    # Horner in series arithmetic; the k-th power of g starts at z**k so the
    # top coefficients of f only need n - k + 1 terms.
    acc = [zero] * (n + 1)
    for k in range(n, -1, -1):
        acc = _cauchy(acc, gc, n, zero) if k < n else acc
        acc[0] = acc[0] + convert(f.coeffs[k], bits)
    return TruncatedSeries(tuple(acc), g.var, bits)


def ps_reversion(f: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse by Lagrange inversion.

    ``[z^n] g = (1/n) [w^(n-1)] (w / f(w))^n``.
    """
    c = f.coeffs
    if c[0]:
        raise ValueError("reversion needs f(0) = 0")
    if f.order < 1 or not c[1]:
        raise ValueError("reversion needs a nonzero linear coefficient")
    n = f.order
    shifted = TruncatedSeries(tuple(c[1:]) + (f.zero(),), f.var, f.bits)
    h = ps_inv(shifted)
    hc = list(h.coeffs)
    out = [f.zero(), 1 / c[1]]
    power = list(hc)
    zero = f.zero()
    for k in range(2, n + 1):
        power = _cauchy(power, hc, n, zero)
        out.append(power[k - 1] / k)
    return TruncatedSeries(tuple(out), f.var, f.bits)


class SeriesValue(NamedTuple):
    """Result of evaluating a truncated series.

    ``warning`` is set when the point lies outside the caller's validity
    radius; the value is still returned so that callers can decide.
    """

    value: object
    tail_bound: float
    warning: Optional[str] = None


def ps_eval(f: TruncatedSeries, z, radius: Optional[float] = None) -> SeriesValue:
    """Horner evaluation with a crude geometric tail bound.

    The tail estimate is ``|c_N z^N| * rho / (1 - rho)`` with
    ``rho = |z| / radius`` (``radius`` defaults to 1).
    """
    if f.bits is None and is_exact(z):
        zz = to_fraction(z)
    else:
        bits = f.bits if f.bits is not None else 53
        zz = convert(z, bits)
    acc = f.zero() if f.bits is not None or is_exact(zz) else convert(0, 53)
    for c in reversed(f.coeffs):
        acc = acc * zz + c
    az = scalar_abs(zz)
    r = float(radius) if radius is not None else 1.0
    rho = az / r if r > 0 else math.inf
    warning = None
    if radius is not None and az > r:
        warning = f"|{f.var}| = {az:.6g} exceeds validity radius {r:.6g}"
    if rho >= 1:
        tail = math.inf
    else:
        last = scalar_abs(f.coeffs[-1])
        try:
            tail = last * az ** f.order * rho / (1 - rho)
        except OverflowError:
            tail = math.inf
    return SeriesValue(acc, tail, warning)


def radius_estimate(coeffs: Sequence, window: int = 16) -> float:
    """Radius of convergence from the tail of a coefficient list.

    Fits ``log|c_k| = A - k log R + g log k`` over the last ``window``
    nonzero coefficients.  The ``log k`` term absorbs the algebraic prefactor
    that makes a bare root test converge slowly.  Returns ``inf`` when fewer
    than four nonzero coefficients survive.
    """
    import numpy as np

    pts = []
    for k, c in enumerate(coeffs):
        if k == 0:
            continue
        m = scalar_abs(c)
        if m > 0:
            if isinstance(c, (int, Fraction)):
                c = Fraction(c)
                lm = math.log(abs(c.numerator)) - math.log(c.denominator)
            elif isinstance(c, (float, complex)):
                lm = math.log(abs(c))
            else:
                lm = float(c.context.log(abs(c)))
            pts.append((k, lm))
    pts = pts[-window:]
    if len(pts) < 4:
        return math.inf
    ks = np.array([p[0] for p in pts], dtype=float)
    ls = np.array([p[1] for p in pts])
    A = np.vstack([np.ones_like(ks), -ks, np.log(ks)]).T
    sol, *_ = np.linalg.lstsq(A, ls, rcond=None)
    log_r = sol[1]
    if log_r > 700:
        return math.inf
    return float(math.exp(log_r))


def _scalar_to_json(c):
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    ctx = c.context
    digits = int(ctx.prec * 0.30103) + 3
    z = ctx.mpc(c)
    return [ctx.nstr(z.real, digits), ctx.nstr(z.imag, digits)]


def series_to_json(f: TruncatedSeries) -> dict:
    out = {"var": f.var, "order": f.order, "coeffs": [_scalar_to_json(c) for c in f.coeffs]}
    if f.bits is not None:
        out["bits"] = f.bits
    return out


def series_from_json(data) -> TruncatedSeries:
    if isinstance(data, str):
        data = json.loads(data)
    raw = data["coeffs"]
    if len(raw) != data["order"] + 1:
        raise ValueError("coefficient count does not match the declared order")
    exact = all(isinstance(c, str) for c in raw)
    if exact:
        return TruncatedSeries(tuple(Fraction(c) for c in raw), data["var"], None)
    bits = int(data.get("bits", DEFAULT_BITS))
    ctx = mpctx(bits)
    cs = []
    for c in raw:
        if isinstance(c, str):
            c = [c, "0"]
        re, im = (ctx.mpf(str(x)) for x in c)
        cs.append(ctx.mpc(re, im) if im else re)
    return TruncatedSeries(tuple(cs), data["var"], bits)


def as_number(x, bits: int):
    """Scalars for callers that mix Python numbers with series values."""
    if isinstance(x, Number) or isinstance(x, str) or isinstance(x, Fraction):
        return convert(x, bits)
    return mpctx(bits).convert(x)
