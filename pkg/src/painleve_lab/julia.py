"""Conformal parametrization of logistic Julia sets.

For ``0 < a < 1`` the function ``G`` with ``G(0) = 0, G'(0) = a`` and

    G(z)^2 = a G(z^2) (1 + G(z))

maps the unit disk conformally onto the bounded region ``K_p``.  The series
is valid near 0; the rest of the disk is reached by taking square roots
backwards, ``G(z) = U(G(z^2))`` with ``U`` the root of
``U^2 - a s U - a s = 0`` selected by continuity.  Boundary points of the
Julia set of ``x -> a x (1 - x)`` are ``x = -1 / G(e^{i theta})``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .maps import MapSpec
from .orbits import EscapeClass, escape_oracle, escape_oracle_many  # noqa: F401  re-exported
from .series import (DEFAULT_BITS, FREL_ORDER, TruncatedSeries, convert, mpctx, ps_eval,
                     radius_estimate, to_fraction)

SERIES_RADIUS = 0.5
PREDICTOR_ORDER = 1024


class BranchAmbiguity(ArithmeticError):
    """Both roots of the continuation quadratic are equally plausible."""


def _exact_or_none(a):
    try:
        return to_fraction(a)
    except TypeError:
        return None


def frel_coefficients(a, order: int) -> list:
    """Taylor coefficients ``g_0..g_order`` of ``G``.

    Matching ``z^{n+1}`` in ``G^2 = a G(z^2) (1 + G)`` gives ``2 a g_n`` on
    the left plus known lower-order products, so each ``g_n`` is explicit.
    Works for Fractions (exact) and mpmath numbers alike.
    """
    g = [a * 0] * (order + 1)
    if order >= 1:
        g[1] = a
    for n in range(2, order + 1):
        m = n + 1
        rhs = a * g[m // 2] if m % 2 == 0 else a * 0
        acc = a * 0
        for j in range(1, m // 2 + 1):
            i = m - 2 * j
            if i >= 1:
                acc += g[j] * g[i]
        rhs += a * acc
        for i in range(2, n):
            rhs -= g[i] * g[m - i]
        g[n] = rhs / (2 * a)
    return g


@functools.lru_cache(maxsize=32)
def _predictor_coeffs(a: float, order: int = PREDICTOR_ORDER) -> np.ndarray:
    """Float64 coefficients used only to pick square-root branches."""
    g = np.zeros(order + 1)
    g[1] = a
    for n in range(2, order + 1):
        m = n + 1
        rhs = a * g[m // 2] if m % 2 == 0 else 0.0
        j = np.arange(1, m // 2 + 1)
        i = m - 2 * j
        ok = i >= 1
        rhs += a * np.dot(g[j[ok]], g[i[ok]])
        ii = np.arange(2, n)
        rhs -= np.dot(g[ii], g[m - ii])
        g[n] = rhs / (2 * a)
    return g


def _predict(coeffs: np.ndarray, w: complex) -> complex:
    # w**k for |w| < 1 is harmless; Horner in numpy would loop in Python
    return complex(np.dot(coeffs, w ** np.arange(coeffs.size)))


@dataclass(frozen=True)
class FrelSeries:
    """Series of ``G`` for one parameter ``a``.

    Attributes
    ----------
    a : Fraction or mpf
    series : TruncatedSeries
        Exact when ``a`` is rational.
    """

    a: object
    series: TruncatedSeries

    @property
    def order(self) -> int:
        return self.series.order

    @property
    def L(self):
        """Boundary value ``G(1) = a / (1 - a)``."""
        return self.a / (1 - self.a)

    @property
    def beta(self) -> float:
        """Lipschitz exponent ``log2(2 - a)``."""
        return math.log2(2 - float(self.a))

    def beta_mp(self, bits: int):
        ctx = mpctx(bits)
        return ctx.log(2 - convert(self.a, bits), 2)

    @functools.cached_property
    def predictor(self) -> np.ndarray:
        return _predictor_coeffs(float(self.a))

    def at_bits(self, bits: int) -> TruncatedSeries:
        return _series_at_bits(self, bits)


@functools.lru_cache(maxsize=64)
def _series_at_bits(fs: FrelSeries, bits: int) -> TruncatedSeries:
    return fs.series.with_bits(bits) if fs.series.bits != bits else fs.series


@functools.lru_cache(maxsize=32)
def _solve_frel_cached(a, order: int, bits: Optional[int]) -> FrelSeries:
    if bits is None:
        coeffs = frel_coefficients(a, order)
    else:
        coeffs = frel_coefficients(convert(a, bits), order)
    return FrelSeries(a if bits is None else convert(a, bits), TruncatedSeries(tuple(coeffs), "z", bits))


def solve_frel_series(a, order: int = FREL_ORDER, bits: Optional[int] = None) -> FrelSeries:
    """Solve ``G(z)^2 = a G(z^2)(1 + G(z))`` as a power series.

    Parameters
    ----------
    a : rational-like or mpf
        Parameter, validated in ``(0, 1)``.
    order : int
    bits : int or None
        ``None`` (default) computes exactly when ``a`` is rational.
    """
    fa = _exact_or_none(a)
    if fa is None and bits is None:
        bits = DEFAULT_BITS
    val = fa if fa is not None else a
    if not 0 < float(val) < 1:
        raise ValueError(f"a must lie in (0, 1), got {a}")
    if order < 1:
        raise ValueError("order must be positive")
    if fa is not None and bits is None:
        return _solve_frel_cached(fa, order, None)
    return _solve_frel_cached(fa if fa is not None else val, order, bits)


def _roots(a, s, ctx):
    d = ctx.sqrt(a * a * s * s + 4 * a * s)
    return (a * s + d) / 2, (a * s - d) / 2


def continuation_step(a, s, bits: int = DEFAULT_BITS, hint=None, tol: float = 1e-12):
    """One backward step ``U(s)``, a root of ``U^2 - a s U - a s = 0``.

    Without ``hint`` the principal square root is used (the branch with
    ``U(L) = L`` and ``U(0) = 0``).  With ``hint`` the root closest to it is
    returned.

    Raises
    ------
    BranchAmbiguity
        If the roots are closer than ``tol`` or the hint cannot tell them
        apart.
    """
    ctx = mpctx(bits)
    a = convert(a, bits)
    s = ctx.convert(s) if not isinstance(s, (int, Fraction, str)) else convert(s, bits)
    r1, r2 = _roots(a, s, ctx)
    if hint is None:
        return r1
    sep = abs(r1 - r2)
    if sep < tol:
        raise BranchAmbiguity(f"roots coincide to {float(sep):.3g}")
    h = complex(hint)
    d1 = abs(complex(r1) - h)
    d2 = abs(complex(r2) - h)
    if min(d1, d2) > 0.5 * max(d1, d2):
        raise BranchAmbiguity(f"branch hint at distances {d1:.3g} and {d2:.3g} is not decisive")
    return r1 if d1 <= d2 else r2


def _u_derivative(a, s, u):
    # from 2 U U' - a s U' - a U - a = 0
    return a * (u + 1) / (2 * u - a * s)


def _depth(z_abs, r0: float, ctx) -> int:
    if z_abs <= r0:
        return 0
    # |z|^(2^k) <= r0  <=>  2^k >= ln r0 / ln |z|
    return max(0, int(ctx.ceil(ctx.log(ctx.log(r0) / ctx.log(z_abs), 2) - ctx.mpf(2) ** -40)))


def eval_G(fs: FrelSeries, z, precision: int = DEFAULT_BITS, r0: float = SERIES_RADIUS,
           extra_depth: int = 0, derivative: bool = False):
    """Evaluate ``G`` anywhere in the open unit disk.

    Squares ``z`` until it falls in ``|w| <= r0``, sums the series there and
    walks back with :func:`continuation_step`, choosing each branch by a
    float64 series predictor.

    Parameters
    ----------
    extra_depth : int
        Additional squarings beyond the minimum (for depth-independence
        checks).
    derivative : bool
        Also return ``G'(z)`` (chain rule through every step).
    """
    ctx = mpctx(precision)
    zz = ctx.convert(z) if not isinstance(z, (Fraction, str)) else convert(z, precision)
    az = abs(zz)
    if az >= 1:
        raise ValueError(f"|z| = {ctx.nstr(az, 20)} is outside the open unit disk")
    k = _depth(az, r0, ctx) + extra_depth
    ws = [zz]
    for _ in range(k):
        ws.append(ws[-1] * ws[-1])
    ser = fs.at_bits(precision)
    if zz == 0:
        return (ctx.mpf(0), convert(fs.a, precision)) if derivative else ctx.mpf(0)
    val = ps_eval(ser, ws[-1]).value
    dval = ps_eval(ser.derivative(), ws[-1]).value if derivative else None
    a = convert(fs.a, precision)
    pred = fs.predictor
    for j in range(k - 1, -1, -1):
        w = ws[j]
        s = val
        cw = complex(w)
        if cw.imag == 0 and cw.real > 0:
            u = continuation_step(a, s, precision)
        else:
            u = continuation_step(a, s, precision, hint=_predict(pred, cw))
        if derivative:
            dval = _u_derivative(a, s, u) * dval * 2 * w
        val = u
    return (val, dval) if derivative else val


def eval_G_many(fs: FrelSeries, zs: Sequence, precision: int = DEFAULT_BITS) -> list:
    return [eval_G(fs, z, precision) for z in zs]


def boundary_value(fs: FrelSeries, p: int, q: int, precision: int = DEFAULT_BITS):
    """``G(e^{2 pi i p / 2^q})`` by walking back from ``G(1) = L``."""
    ctx = mpctx(precision)
    a = convert(fs.a, precision)
    val = convert(fs.a, precision) / (1 - a)
    pred = fs.predictor
    for j in range(q - 1, -1, -1):
        w = complex(ctx.expjpi(ctx.mpf(2 * p * 2 ** j) / 2 ** q))
        hint = _predict(pred, w)
        val = continuation_step(a, val, precision, hint=hint)
    return val


@functools.lru_cache(maxsize=16)
def lipschitz_constant(fs: FrelSeries, n_angles: int = 32, depth: int = 8,
                       precision: int = 128) -> float:
    """Estimate ``K`` with ``|G(e^{it}) - G(r e^{it})| <= K (1 - r)^beta``.

    Uses ``M = sup (1 - r)^{1 - beta} |G'(r e^{it})|`` over a radial grid
    (the bounded quantity behind the Lipschitz estimate) and returns
    ``2 M / beta``; the factor 2 is a safety margin for unsampled points.
    """
    beta = fs.beta
    ctx = mpctx(precision)
    M = 0.0
    for k in range(n_angles):
        t = 2 * math.pi * (k + 0.5) / n_angles
        u = ctx.expj(t)
        for d in range(1, depth + 1):
            eps = 10.0 ** (-d)
            _, dg = eval_G(fs, (1 - ctx.mpf(eps)) * u, precision, derivative=True)
            M = max(M, float(abs(dg)) * eps ** (1 - beta))
    return 2 * M / beta


@dataclass
class BoundaryTrace:
    """Points ``x(theta) = -1 / G((1 - inset) e^{i theta})`` with error bounds."""

    a: object
    angles: List[float]
    points: List[complex]
    inset: float
    error_bound: List[float]
    G_values: List[complex] = field(default_factory=list, repr=False)

    def to_rows(self):
        return [(t, p.real, p.imag, e) for t, p, e in zip(self.angles, self.points, self.error_bound)]

    def nearest(self, target: complex) -> float:
        arr = np.asarray(self.points)
        return float(np.min(np.abs(arr - target)))

    def polyline_distance(self, target: complex) -> float:
        """Distance from ``target`` to the closed polyline through the points."""
        p = np.asarray(self.points)
        q = np.roll(p, -1)
        d = q - p
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.clip(((target - p) * np.conj(d)).real / np.abs(d) ** 2, 0, 1)
        t = np.nan_to_num(t)
        return float(np.min(np.abs(p + t * d - target)))


def _trace_point(fs, theta, inset, precision, K):
    ctx = mpctx(precision)
    z = (1 - ctx.mpf(inset)) * ctx.expj(theta)
    g = eval_G(fs, z, precision)
    gc = complex(g)
    x = -1 / gc
    dG = K * inset ** fs.beta
    ag = abs(gc)
    err = dG / (ag * (ag - dG)) if ag > dG else math.inf
    return x, err, gc


def boundary_trace(a, n_angles: int, inset: float, precision: int = 128, threads: int = 1,
                   order: int = FREL_ORDER) -> BoundaryTrace:
    """Sample the Julia set of ``a x (1 - x)`` at equally spaced angles.

    Parameters
    ----------
    a : rational-like in (0, 1)
    n_angles : int
        Number of angles ``theta_k = 2 pi k / n_angles``.
    inset : float
        Evaluation radius is ``1 - inset``; must lie in ``(0, 0.1]``.
    threads : int
        Worker processes for the angle loop.

    Notes
    -----
    The per-point bound propagates ``|dG| <= K inset^beta`` through
    ``x = -1/G``.  ``K`` comes from :func:`lipschitz_constant` and is an
    estimate, not a proof.
    """
    if not 0 < inset <= 0.1:
        raise ValueError("inset must lie in (0, 0.1]")
    if n_angles < 1:
        raise ValueError("need at least one angle")
    fs = solve_frel_series(a, order)
    K = lipschitz_constant(fs)
    thetas = [2 * math.pi * k / n_angles for k in range(n_angles)]
    if threads > 1 and n_angles >= 64:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [thetas[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(threads) as ex:
            parts = list(ex.map(_trace_chunk, [(fs, c, inset, precision, K) for c in chunks]))
        res = [None] * n_angles
        for i, part in enumerate(parts):
            res[i::threads] = part
    else:
        res = [_trace_point(fs, t, inset, precision, K) for t in thetas]
    return BoundaryTrace(fs.a, thetas, [r[0] for r in res], inset, [r[1] for r in res],
                         [r[2] for r in res])


def _trace_chunk(args):
    fs, thetas, inset, precision, K = args
    return [_trace_point(fs, t, inset, precision, K) for t in thetas]


@dataclass
class HolderEstimate:
    exponent: float
    expected: float
    eps: List[float]
    gaps: List[float]
    monotone: bool

    @property
    def relative_error(self) -> float:
        return abs(self.exponent / self.expected - 1)


def holder_exponent_probe(a, theta0: float = 0.0, eps_range=(1e-30, 1e-5), n_points: int = 26,
                          precision: int = 512, detail: bool = False):
    """Radial Holder exponent of ``G`` at a binary-rational boundary angle.

    Fits the slope of ``log |G((1 - eps) e^{i theta0}) - G(e^{i theta0})|``
    against ``log eps``.  The boundary value is obtained exactly by walking
    back from ``G(1) = L``.

    Returns the exponent, or a :class:`HolderEstimate` when ``detail``.
    """
    p, q = _binary_angle(theta0)
    fs = solve_frel_series(a)
    ctx = mpctx(precision)
    glim = boundary_value(fs, p, q, precision)
    u = ctx.expjpi(ctx.mpf(2 * p) / 2 ** q)
    lo, hi = math.log10(eps_range[0]), math.log10(eps_range[1])
    eps = [10.0 ** (lo + (hi - lo) * k / (n_points - 1)) for k in range(n_points)]
    gaps = []
    for e in eps:
        g = eval_G(fs, (1 - ctx.mpf(e)) * u, precision)
        gaps.append(float(abs(g - glim)))
    le, lg = np.log(eps), np.log(gaps)
    slope = float(np.polyfit(le, lg, 1)[0])
    monotone = bool(np.all(np.diff(lg) > 0))
    est = HolderEstimate(slope, fs.beta, eps, gaps, monotone)
    if not monotone:
        raise ArithmeticError("non-monotone radial data; regression unreliable")
    return est if detail else slope


def _binary_angle(theta: float):
    """Write ``theta = 2 pi p / 2^q`` exactly (q <= 30)."""
    x = (theta / (2 * math.pi)) % 1.0
    for q in range(31):
        p = x * 2 ** q
        if abs(p - round(p)) < 1e-12:
            return int(round(p)) % 2 ** q if q else 0, q
    raise ValueError(f"theta0 = {theta} is not a binary-rational multiple of 2 pi")


@dataclass
class InjectivityReport:
    n_samples: int
    min_pair_distance: float
    collisions: int
    min_odd_gap: float
    min_derivative: float
    zeros_away_from_origin: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def injectivity_probe(fs: FrelSeries, n_samples: int = 10_000, seed: int = 0, tol: float = 1e-20,
                      precision: int = 96, radius: float = 0.99) -> InjectivityReport:
    """Nearest-pair and odd-part statistics of ``G`` on random disk samples.

    Reports the closest pair of images (a collision is a pair closer than
    ``tol``), ``min |G(z) - G(-z)|``, ``min |G'(z)|`` and the number of
    samples other than 0 where ``|G| < tol``.
    """
    from scipy.spatial import cKDTree

    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n_samples))
    t = 2 * np.pi * rng.random(n_samples)
    zs = r * np.exp(1j * t)
    vals, ders, odd = [], [], []
    for z in zs:
        g, dg = eval_G(fs, complex(z), precision, derivative=True)
        gm = eval_G(fs, complex(-z), precision)
        vals.append(complex(g))
        ders.append(float(abs(dg)))
        odd.append(float(abs(g - gm)) / abs(z) if z != 0 else math.inf)
    pts = np.column_stack([np.real(vals), np.imag(vals)])
    tree = cKDTree(pts)
    d, _ = tree.query(pts, k=2)
    nearest = d[:, 1]
    return InjectivityReport(n_samples, float(nearest.min()), int(np.sum(nearest < tol)),
                             float(min(odd)), float(min(ders)),
                             int(sum(1 for v, z in zip(vals, zs) if abs(v) < tol and z != 0)))


def disk_samples(n: int, seed: int = 0, radius: float = 1.0) -> np.ndarray:
    """Uniform samples in the open disk of the given radius."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    r = np.minimum(r, np.nextafter(radius, 0))
    return r * np.exp(2j * np.pi * rng.random(n))


def frel_residual(fs: FrelSeries, z, precision: int = DEFAULT_BITS) -> float:
    """``|G(z)^2 - a G(z^2)(1 + G(z))|`` with both values from :func:`eval_G`."""
    ctx = mpctx(precision)
    zz = ctx.convert(z)
    g = eval_G(fs, zz, precision)
    g2 = eval_G(fs, zz * zz, precision)
    a = convert(fs.a, precision)
    return float(abs(g * g - a * g2 * (1 + g)))


def series_radius_confirmed(fs: FrelSeries, r0: float = SERIES_RADIUS) -> bool:
    """Ratio-test confirmation that the series disk comfortably exceeds ``r0``."""
    return radius_estimate(fs.series.coeffs) > r0 * 1.5


def logistic(a) -> MapSpec:
    return MapSpec.logistic(a)


def matched_budget(distance: float, expansion: float) -> int:
    """Iterations a point ``distance`` from the Julia set needs to separate.

    Near ``J`` distances grow at most by ``expansion = sup |G'|`` per step,
    so for fewer than ``log(1/distance)/log(expansion)`` steps the orbit
    cannot have left an O(1) neighbourhood of ``J``.
    """
    return max(1, int(math.floor(math.log(1 / distance) / math.log(expansion))))
