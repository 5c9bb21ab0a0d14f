"""Orbit-level tools shared by the linearization and Julia-set code."""
from __future__ import annotations

import cmath
import enum
import math
from typing import List, Optional

import numpy as np

from .maps import MapError, MapSpec, poly_degree, poly_eval
from .series import convert

BASIN_MAX_ITER = 10_000


class EscapeClass(str, enum.Enum):
    INTERIOR = "Interior"
    EXTERIOR = "Exterior"
    UNDECIDED = "Undecided"


def _complex_coeffs(G: MapSpec):
    return ([complex(c) for c in G.num], [complex(c) for c in G.den])


def orbit(G: MapSpec, x0, n: int, bits: Optional[int] = None) -> list:
    """``[x_0, ..., x_n]`` with ``x_{k+1} = G(x_k)`` in the requested arithmetic."""
    xs = [x0]
    if bits is not None:
        Gb = G.with_bits(bits)
        x = convert(x0, bits)
        xs = [x]
        for _ in range(n):
            x = Gb(x)
            xs.append(x)
        return xs
    x = x0
    for _ in range(n):
        x = G(x)
        xs.append(x)
    return xs


def contraction_radius(G: MapSpec, factor: Optional[float] = None, cap: float = 0.5,
                       samples: int = 256) -> float:
    """Largest tested ``eps <= cap`` with ``|G(w)| < a1 |w|`` on ``|w| <= eps``.

    ``a1`` defaults to ``(1 + |a|) / 2``.  The disk condition is checked on a
    few concentric circles; by the maximum principle applied to ``G(w)/w``
    the outer circle is the binding one.
    """
    if G.fixed_point != 0:
        raise MapError("contraction radius is measured around a fixed point at 0")
    a = abs(complex(G.multiplier))
    if not 0 < a < 1:
        raise MapError(f"fixed point is not attracting (|a| = {a:g})")
    a1 = factor if factor is not None else (1 + a) / 2
    num, den = _complex_coeffs(G)
    ang = np.exp(2j * np.pi * np.arange(samples) / samples)
    eps = cap
    for _ in range(200):
        w = eps * ang
        with np.errstate(all="ignore"):
            ratio = np.abs(np.polyval(num[::-1], w) / np.polyval(den[::-1], w) / w)
        if np.all(np.isfinite(ratio)) and ratio.max() < a1:
            return float(eps)
        eps *= 0.5
    raise MapError("could not find a contracting disk around the fixed point")


def escape_oracle(G: MapSpec, z, max_iter: int = BASIN_MAX_ITER, eps: Optional[float] = None,
                  escape_radius: Optional[float] = None) -> EscapeClass:
    """Classify ``z`` for a polynomial map with attracting fixed point 0.

    Interior once the orbit enters ``D_eps`` (a disk mapped strictly into
    itself), Exterior once ``|G^n(z)|`` exceeds the escape radius, Undecided
    after ``max_iter`` steps otherwise.
    """
    if G.kind != "polynomial":
        raise MapError("escape_oracle needs a polynomial map")
    if eps is None:
        eps = contraction_radius(G)
    R = escape_radius if escape_radius is not None else G.escape_radius()
    coeffs = [complex(c) for c in G.num]
    x = complex(z)
    for _ in range(max_iter + 1):
        ax = abs(x)
        if ax < eps:
            return EscapeClass.INTERIOR
        if ax > R or not math.isfinite(ax):
            return EscapeClass.EXTERIOR
        acc = 0j
        for c in reversed(coeffs):
            acc = acc * x + c
        x = acc
    return EscapeClass.UNDECIDED


def escape_oracle_many(G: MapSpec, zs, max_iter: int = BASIN_MAX_ITER, eps: Optional[float] = None,
                       escape_radius: Optional[float] = None) -> List[EscapeClass]:
    """Vectorized :func:`escape_oracle` (numpy complex128)."""
    if G.kind != "polynomial":
        raise MapError("escape_oracle needs a polynomial map")
    if eps is None:
        eps = contraction_radius(G)
    R = escape_radius if escape_radius is not None else G.escape_radius()
    coeffs = np.array([complex(c) for c in G.num][::-1])
    x = np.asarray(zs, dtype=complex).copy()
    state = np.zeros(x.shape, dtype=np.int8)  # 0 undecided, 1 interior, 2 exterior
    for _ in range(max_iter + 1):
        ax = np.abs(x)
        live = state == 0
        state[live & (ax < eps)] = 1
        state[live & ((ax > R) | ~np.isfinite(ax))] = 2
        live = state == 0
        if not live.any():
            break
        x[live] = np.polyval(coeffs, x[live])
    names = {0: EscapeClass.UNDECIDED, 1: EscapeClass.INTERIOR, 2: EscapeClass.EXTERIOR}
    return [names[int(s)] for s in state.ravel()]


def ray_boundary_distance(G: MapSpec, direction, max_iter: int = BASIN_MAX_ITER,
                          scan: int = 400, tol: float = 1e-10) -> float:
    """Distance from 0 to the first non-interior point along ``t * direction``.

    A coarse scan finds the first bracket, bisection refines it.  Undecided
    points count as non-interior.
    """
    d = complex(direction)
    d /= abs(d)
    R = G.escape_radius()
    eps = contraction_radius(G)
    ts = np.linspace(0.0, R, scan + 1)
    cls = escape_oracle_many(G, ts * d, max_iter, eps, R)
    k = next((i for i, c in enumerate(cls) if c is not EscapeClass.INTERIOR), None)
    if k is None:
        return math.inf
    lo, hi = ts[k - 1], ts[k]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if escape_oracle(G, mid * d, max_iter, eps, R) is EscapeClass.INTERIOR:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def repelling_fixed_points(G: MapSpec) -> list:
    """Fixed points other than the stored one with ``|G'| > 1`` (polynomial maps)."""
    if G.kind != "polynomial":
        raise MapError("fixed-point search implemented for polynomials")
    p = list(complex(c) for c in G.num)
    if len(p) < 2:
        p += [0j]
    p[1] -= 1
    roots = np.roots(p[::-1]) if poly_degree(G.num) >= 1 else []
    dcoef = [k * complex(G.num[k]) for k in range(1, len(G.num))]
    out = []
    for r in roots:
        if abs(r - complex(G.fixed_point)) < 1e-12:
            continue
        m = abs(poly_eval(dcoef, complex(r)))
        if m > 1:
            out.append(complex(r))
    return sorted(out, key=lambda r: (round(r.real, 12), round(r.imag, 12)))


def unit(theta: float) -> complex:
    return cmath.exp(1j * theta)
