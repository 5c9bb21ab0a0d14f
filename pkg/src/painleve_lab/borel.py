"""Conserved quantity of the parabolic map ``v -> v - v^2`` by Borel summation.

Along orbits of ``v_{n+1} = v_n - v_n^2`` the quantity

    C(n; v) = n - 1/v - ln v - R(v)

is constant provided ``R(v) = R(v - v^2) + v/(1 - v) + ln(1 - v)``.  The
formal solution ``R ~ sum rho_k v^k`` diverges factorially; it is resummed
as ``R(v) = -h(1/v - 2)`` with ``h(x) = int_0^inf e^{-px} H(p) dp`` and
``H = H_0 + A H`` solved on a grid in the Borel plane:

    H_0(p) = (1 - e^{-p} - p) / (p (e^p - 1))
    (A H)(p) = (e^p - 1)^{-1} int_0^p K(p, s) H(s) ds
    K(p, s) = sum_{k>=1} (-1)^k s^k (p - s)^{k-1} / (k! (k-1)!)
            = -s J_1(2 sqrt(s(p-s))) / sqrt(s(p-s)).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np
from scipy.special import i1, j1, jv

BOREL_P = 40.0
BOREL_H = 1.0 / 64
BOREL_TOL = 1e-12
GREGORY_ORDER = 8
PANEL_DEGREE = 8
GAUSS_POINTS = 20


class NonContraction(ArithmeticError):
    """Picard residuals stopped decreasing."""


class SectorError(ValueError):
    """Point outside the region where the Laplace integral is valid."""


# formal series

@dataclass(frozen=True)
class FormalInvariant:
    """Coefficients ``rho_1..rho_order`` of ``R(v) = sum rho_k v^k`` (exact)."""

    rho: tuple
    order: int

    def __getitem__(self, k: int) -> Fraction:
        if k < 1 or k > self.order:
            raise IndexError(k)
        return self.rho[k - 1]

    def partial_sums(self, v: float) -> List[float]:
        out, s = [], 0.0
        for k, r in enumerate(self.rho, start=1):
            s += float(r) * v ** k
            out.append(s)
        return out

    def optimal_truncation(self, v: float):
        """Sum up to (excluding) the smallest term; returns ``(value, k, least_term)``."""
        logs = [_log_abs(r) + k * math.log(abs(v)) if r else -math.inf
                for k, r in enumerate(self.rho, start=1)]
        kmin = int(np.argmin(logs)) + 1
        if kmin == self.order:
            raise ValueError("least term not reached; increase the order")
        s = sum(float(self.rho[k - 1]) * v ** k for k in range(1, kmin))
        return s, kmin, math.exp(logs[kmin - 1])


def _log_abs(r: Fraction) -> float:
    return math.log(abs(r.numerator)) - math.log(r.denominator)


@functools.lru_cache(maxsize=8)
def formal_invariant_series(order: int) -> FormalInvariant:
    """Solve ``R(v) - R(v - v^2) = v/(1 - v) + ln(1 - v)`` order by order.

    The ``v^m`` coefficient reads
    ``(m-1) rho_{m-1} - sum_{k<m-1} rho_k (-1)^{m-k} C(k, m-k) = 1 - 1/m``.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    rho = [Fraction(0)]
    for m in range(2, order + 2):
        s = Fraction(m - 1, m)
        for k in range(max(1, (m + 1) // 2), m - 1):
            s += rho[k] * (-1) ** (m - k) * math.comb(k, m - k)
        rho.append(s / (m - 1))
    return FormalInvariant(tuple(rho[1:]), order)


def h_formal_coefficients(order: int) -> List[Fraction]:
    """``c_m`` with ``h(x) ~ sum_{m>=1} c_m x^{-m}``, from ``h(x) = -R(1/(x+2))``.

    ``c_{j+1} = H^{(j)}(0)`` by Watson's lemma.
    """
    rho = formal_invariant_series(order).rho
    out = []
    for m in range(1, order + 1):
        s = Fraction(0)
        for k in range(1, m + 1):
            j = m - k
            s += rho[k - 1] * (-1) ** j * math.comb(k + j - 1, j) * 2 ** j
        out.append(-s)
    return out


def h_optimal_truncation(x: float):
    """Least-term truncation of ``sum c_m x^{-m}``; returns ``(value, m, least_term)``."""
    order = 64
    while True:
        c = h_formal_coefficients(order)
        logs = [_log_abs(cm) - m * math.log(abs(x)) if cm else math.inf
                for m, cm in enumerate(c, start=1)]
        k = int(np.argmin(logs)) + 1
        if k < order - 4:
            break
        order *= 2
        if order > 2048:
            raise ValueError("least term not reached")
    val = sum(float(c[m - 1]) * x ** (-m) for m in range(1, k))
    return val, k, math.exp(logs[k - 1])


def borel_taylor_predictions(n: int = 4) -> List[Fraction]:
    """Predicted ``H^{(j)}(0) / j!`` for ``j < n`` (exact)."""
    c = h_formal_coefficients(n)
    return [c[j] / math.factorial(j) for j in range(n)]


# inhomogeneous term

def h0_eval(p):
    """``H_0(p) = (1 - e^{-p} - p) / (p (e^p - 1))`` with a series near 0.

    Accepts scalars or arrays, real or complex.  ``H_0(0) = -1/2``.
    """
    p = np.asarray(p)
    out = np.empty(p.shape, dtype=np.result_type(p, float))
    small = np.abs(p) < 1e-2
    ps = p[small]
    out[small] = -0.5 + ps * (5 / 12 + ps * (-1 / 6 + ps * (31 / 720 + ps * (-1 / 120 + ps * (
        41 / 30240 - ps / 5040)))))
    pl = p[~small]
    with np.errstate(over="ignore"):
        out[~small] = -(pl + np.expm1(-pl)) / (pl * np.expm1(pl))
    return out if out.shape else out[()]


# quadrature

@functools.lru_cache(maxsize=4)
def gregory_weights(q: int = GREGORY_ORDER):
    """Endpoint corrections and start-up weights for order-``q`` Gregory rules.

    Returns ``(corr, start)``: ``corr[j]`` is added to the trapezoid weight
    of node ``j`` (and mirrored at the right end); ``start[n]`` are weights
    on nodes ``0..2q`` integrating the interpolant over ``[0, n]`` for
    ``n < 2q``.  Both solved exactly in rationals.
    """
    import sympy

    rhs = []
    for m in range(q):
        rhs.append(sympy.bernoulli(m + 1) / (m + 1) if m % 2 == 1 else sympy.Integer(0))
    A = sympy.Matrix([[sympy.Integer(j) ** m if (j or m) else 1 for j in range(q)] for m in range(q)])
    corr = [float(c) for c in A.LUsolve(sympy.Matrix(rhs))]
    nodes = range(2 * q + 1)
    V = sympy.Matrix([[sympy.Integer(j) ** d if (j or d) else 1 for j in nodes] for d in nodes])
    start = {}
    for n in range(1, 2 * q):
        b = sympy.Matrix([sympy.Rational(n ** (d + 1), d + 1) for d in nodes])
        start[n] = np.array([float(x) for x in V.LUsolve(b)])
    return np.array(corr), start


def _row_weights(i: int, q: int, corr, start) -> np.ndarray:
    if i == 0:
        return np.zeros(1)
    if i >= 2 * q:
        w = np.ones(i + 1)
        w[0] = w[-1] = 0.5
        w[:q] += corr
        w[i - q + 1:][::-1] += corr
        return w
    return start[i]


# kernel

def kernel_factor_bessel(u):
    """``f(u) = J_1(2 sqrt u)/sqrt u`` (entire in ``u``), continued as ``I_1`` for ``u < 0``."""
    u = np.asarray(u)
    if np.iscomplexobj(u):
        r = np.sqrt(u)
        with np.errstate(invalid="ignore", divide="ignore"):
            f = jv(1, 2 * r) / r
        return np.where(np.abs(u) < 1e-12, 1 - u / 2, f)
    r = np.sqrt(np.abs(u))
    safe = np.where(r > 0, r, 1.0)
    with np.errstate(invalid="ignore", over="ignore"):
        f = np.where(u > 0, j1(2 * r), i1(2 * r)) / safe
    return np.where(r < 1e-8, 1 - u / 2, f)


def kernel_terms(P: float) -> int:
    """Number of terms with ``P^{2k} / (k! (k-1)!) >= 1e-20`` (at least 2)."""
    k = 1
    logP = math.log(max(P, 1e-300))
    while 2 * k * logP - math.lgamma(k + 1) - math.lgamma(k) >= math.log(1e-20):
        k += 1
    return max(k, 2)


def kernel_factor_series(u, kmax: int):
    """Truncated sum ``sum_{k=1}^{kmax} (-u)^{k-1} / (k! (k-1)!)``."""
    u = np.asarray(u)
    term = np.ones_like(u)
    total = term.copy()
    for k in range(1, kmax):
        term = term * (-u) / ((k + 1) * k)
        total = total + term
    return total


# grid and operator

@dataclass
class BorelGrid:
    """Solution ``H`` sampled on ``p_j = j h e^{i direction}``, ``0 <= j h <= P``."""

    P: float
    h: float
    samples: np.ndarray
    direction: float = 0.0
    residual: float = math.inf
    residual_history: List[float] = field(default_factory=list)
    tol: float = BOREL_TOL
    kernel: str = "bessel"
    A: float = math.nan
    nu: float = 0.0

    @property
    def n(self) -> int:
        return len(self.samples) - 1

    @property
    def ratios(self) -> List[float]:
        r = self.residual_history
        return [r[i + 1] / r[i] for i in range(len(r) - 1) if r[i] > 0]

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h * np.exp(1j * self.direction) if self.direction else \
            np.arange(self.n + 1) * self.h

    def to_json(self, include_samples: bool = False) -> dict:
        out = {"P": self.P, "h": self.h, "n": self.n, "direction": self.direction,
               "residual": self.residual, "residual_history": list(self.residual_history),
               "tol": self.tol, "kernel": self.kernel, "A": self.A, "nu": self.nu,
               "H0": _enc_complex(self.samples[0])}
        if include_samples:
            out["samples"] = [_enc_complex(x) for x in self.samples]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "BorelGrid":
        if "samples" not in data:
            raise ValueError("grid JSON carries no samples")
        s = np.array([_dec_complex(x) for x in data["samples"]])
        if np.all(np.imag(s) == 0):
            s = s.real
        return cls(data["P"], data["h"], s, data["direction"], data["residual"],
                   list(data["residual_history"]), data["tol"], data["kernel"], data["A"], data["nu"])

    @functools.cached_property
    def _panels(self):
        return _panel_rule(self.n, self.h)

    def bound(self) -> tuple:
        return self.A, self.nu


def _enc_complex(x):
    x = complex(x)
    return [float(x.real), float(x.imag)] if x.imag else float(x.real)


def _dec_complex(x):
    return complex(x[0], x[1]) if isinstance(x, list) else float(x)


def operator_matrix(n: int, h: float, direction: float = 0.0, kernel: str = "bessel",
                    kmax: Optional[int] = None, q: int = GREGORY_ORDER, block: int = 512) -> np.ndarray:
    """Dense matrix ``M`` with ``(A H)(p_i) = (M @ H)_i`` on the grid."""
    if n < 2 * q:
        raise ValueError(f"grid needs at least {2 * q} intervals")
    corr, start = gregory_weights(q)
    rot = np.exp(1j * direction) if direction else 1.0
    t = np.arange(n + 1) * h
    p = t * rot
    dtype = complex if direction else float
    M = np.zeros((n + 1, n + 1), dtype=dtype)
    if kernel == "series" and kmax is None:
        kmax = kernel_terms(n * h)
    for i0 in range(1, n + 1, block):
        i1_ = min(n + 1, i0 + block)
        rows = np.arange(i0, i1_)
        W = np.zeros((len(rows), n + 1))
        for r, i in enumerate(rows):
            w = _row_weights(int(i), q, corr, start)
            W[r, :len(w)] = w
        cols = max(int(rows[-1]), 2 * q) + 1
        S = p[None, :cols]
        Pm = p[rows][:, None]
        u = S * (Pm - S)
        if kernel == "bessel":
            f = kernel_factor_bessel(u)
        elif kernel == "series":
            f = kernel_factor_series(u, kmax)
        else:
            raise ValueError(f"unknown kernel {kernel!r}")
        K = -S * f
        pre = 1.0 / np.expm1(p[rows])
        blockM = (W[:, :cols] * K) * (h * rot) * pre[:, None]
        M[i0:i1_, :cols] = blockM
    return M


def solve_borel_fixed_point(P: float = BOREL_P, h: float = BOREL_H, tol: float = BOREL_TOL,
                            kmax: Optional[int] = None, kernel: str = "bessel",
                            direction: float = 0.0, max_iter: int = 200,
                            max_ratio: float = 0.5) -> BorelGrid:
    """Picard iteration ``H <- H_0 + A H`` on the grid.

    Parameters
    ----------
    P, h : float
        Ray length and step; ``P / h`` must be an integer.
    tol : float
        Stop once the sup-norm update falls below ``tol``.
    kmax : int, optional
        Term cap for ``kernel="series"``; default from the ``1e-20`` rule.
    kernel : {"bessel", "series"}
    direction : float
        Ray angle in the Borel plane (validated at 0 and +-pi/4).
    max_ratio : float
        Largest accepted ratio of successive residuals.

    Raises
    ------
    NonContraction
        If a residual exceeds ``max_ratio`` times the previous one.
    """
    n = int(round(P / h))
    if abs(n * h - P) > 1e-9 * P:
        raise ValueError("P must be an integer multiple of h")
    if abs(direction) >= math.pi / 2:
        raise SectorError("direction must lie in the open right half plane")
    M = operator_matrix(n, h, direction, kernel, kmax)
    p = np.arange(n + 1) * h * (np.exp(1j * direction) if direction else 1.0)
    H0 = h0_eval(p)
    H = H0.copy()
    hist: List[float] = []
    for it in range(max_iter):
        Hn = H0 + M @ H
        res = float(np.max(np.abs(Hn - H)))
        hist.append(res)
        H = Hn
        if len(hist) >= 2 and hist[-1] > max_ratio * hist[-2]:
            raise NonContraction(
                f"residual ratio {hist[-1] / hist[-2]:.3g} > {max_ratio} at iteration {it}; "
                "use a larger exponential weight or a shorter ray")
        if res < tol:
            break
    else:
        raise NonContraction(f"no convergence to {tol:g} in {max_iter} iterations")
    A, nu = growth_bound(H, h, direction)
    return BorelGrid(P, h, H, direction, hist[-1], hist, tol, kernel, A, nu)


def growth_bound(H, h: float, direction: float = 0.0, slack: float = 0.9):
    """``(A, nu)`` with ``|H(p_j)| <= A e^{nu |p_j|}`` on the grid.

    ``H`` inherits the ``e^{-p}`` decay of the prefactor, so ``nu`` is taken
    as ``-slack cos(direction)`` and ``A`` as the smallest valid constant.
    """
    nu = -slack * math.cos(direction)
    t = np.arange(len(H)) * h
    A = float(np.max(np.abs(H) * np.exp(-nu * t)))
    return A, nu


def apply_operator(grid: BorelGrid, kernel: str, kmax: Optional[int] = None) -> np.ndarray:
    """``A H`` on the grid with the chosen kernel implementation."""
    M = operator_matrix(grid.n, grid.h, grid.direction, kernel, kmax)
    return M @ grid.samples


def kernel_cross_check(grid: BorelGrid, kmax: Optional[int] = None) -> float:
    """``max |A_series H - A_bessel H|`` over the grid."""
    return float(np.max(np.abs(apply_operator(grid, "series", kmax) - apply_operator(grid, "bessel"))))


# Laplace transform

def _panel_rule(n: int, h: float, deg: int = PANEL_DEGREE, m: int = GAUSS_POINTS):
    """Gauss nodes (in ``t``), weights and the matrix mapping samples to node values."""
    gx, gw = np.polynomial.legendre.leggauss(m)
    nodes, weights, rows = [], [], []
    a0 = 0
    while a0 < n:
        lo, hi = a0, min(a0 + deg, n)
        idx0 = lo if hi - lo == deg else max(0, n - deg)
        idx = np.arange(idx0, idx0 + deg + 1)
        tt = (gx + 1) / 2 * (hi - lo) + lo
        B = np.ones((m, deg + 1))
        for j, xj in enumerate(idx):
            for k, xk in enumerate(idx):
                if k != j:
                    B[:, j] *= (tt - xk) / (xj - xk)
        full = np.zeros((m, n + 1))
        full[:, idx] = B
        nodes.append(tt * h)
        weights.append(gw * (hi - lo) / 2 * h)
        rows.append(full)
        a0 = hi
    return np.concatenate(nodes), np.concatenate(weights), np.vstack(rows)


def laplace(grid: BorelGrid, x, tail_tol: float = 1e-15, return_bound: bool = False):
    """``h(x) = int_0^inf e^{-p x} H(p) dp`` along the grid ray.

    The integral is truncated at ``P`` and the remainder bounded by
    ``A e^{-(Re(x e^{i dir}) - nu) P} / (Re(x e^{i dir}) - nu)``.

    Raises
    ------
    SectorError
        If ``Re(x e^{i dir}) <= nu`` or the tail bound exceeds ``tail_tol``.
    """
    rot = np.exp(1j * grid.direction) if grid.direction else 1.0
    xr = complex(x * rot).real
    if xr <= grid.nu:
        raise SectorError(f"Re(x e^(i dir)) = {xr:.3g} must exceed nu = {grid.nu:.3g}")
    tail = grid.A * math.exp(-(xr - grid.nu) * grid.P) / (xr - grid.nu)
    if tail > tail_tol:
        raise SectorError(f"tail bound {tail:.3g} exceeds {tail_tol:g}; x too small for P = {grid.P}")
    t, w, B = grid._panels
    vals = B @ grid.samples
    val = np.sum(w * np.exp(-x * rot * t) * vals) * rot
    if not np.iscomplexobj(val) or (np.isreal(x) and grid.direction == 0):
        val = float(np.real(val))
    return (val, tail) if return_bound else val


@functools.lru_cache(maxsize=1)
def default_grid() -> BorelGrid:
    return solve_borel_fixed_point()


def R_eval(v, grid: Optional[BorelGrid] = None):
    """``R(v) = -h(1/v - 2)``.

    Raises
    ------
    SectorError
        For ``v = 0``, ``arg v = pi`` or ``1/v - 2`` outside the Laplace
        half plane of the grid.
    """
    if v == 0:
        raise SectorError("v = 0 is excluded")
    vc = complex(v)
    if vc.imag == 0 and vc.real < 0:
        raise SectorError("arg(v) = pi is excluded")
    g = grid if grid is not None else default_grid()
    x = 1 / v - 2
    return -laplace(g, x)


def conserved_C(n, v, grid: Optional[BorelGrid] = None):
    """``C(n; v) = n - 1/v - ln v - R(v)`` with the principal logarithm."""
    vc = complex(v)
    log = math.log(vc.real) if vc.imag == 0 and vc.real > 0 else np.log(vc)
    return n - 1 / v - log - R_eval(v, grid)


def parabolic_orbit(v0, steps: int) -> list:
    out = [v0]
    v = v0
    for _ in range(steps):
        v = v - v * v
        out.append(v)
    return out


def drift_table(v0, steps: int, grid: Optional[BorelGrid] = None) -> List[dict]:
    """``C(n; v_n)`` along the orbit from ``v0`` and its drift from ``C(0; v0)``."""
    vs = parabolic_orbit(v0, steps)
    c0 = conserved_C(0, vs[0], grid)
    rows = []
    for k, v in enumerate(vs):
        c = conserved_C(k, v, grid)
        rows.append({"n": k, "v": _enc_complex(v), "C": _enc_complex(c), "drift": float(abs(c - c0))})
    return rows


def recR_residual(v, grid: Optional[BorelGrid] = None) -> float:
    """``|R(v) - R(v - v^2) - v/(1-v) - ln(1-v)|``."""
    return float(abs(R_eval(v, grid) - R_eval(v - v * v, grid) - v / (1 - v) - np.log(1 - v)))


class LeauClass(str, enum.Enum):
    IN_LEAU = "InLeau"
    NOT_IN_LEAU = "NotInLeau"
    UNDECIDED = "Undecided"


def leau_membership(v0, budget: int = 10_000) -> LeauClass:
    """Classify ``v0`` under ``v -> v - v^2``.

    InLeau once the orbit enters the attracting petal ``|v - 1/4| < 1/4``
    (equivalently ``Re(1/v) > 2``, mapped into itself with ``v_n -> 0``
    tangent to the positive axis); NotInLeau once ``|v| > 2`` (then
    ``|v - v^2| > |v|`` forever); Undecided otherwise.
    """
    v = complex(v0)
    if v == 0:
        return LeauClass.IN_LEAU
    for _ in range(budget + 1):
        if abs(v - 0.25) < 0.25:
            return LeauClass.IN_LEAU
        if abs(v) > 2:
            return LeauClass.NOT_IN_LEAU
        if v == 0:
            return LeauClass.IN_LEAU
        v = v - v * v
    return LeauClass.UNDECIDED


def fit_taylor_at_zero(grid: BorelGrid, n_coeffs: int = 4, p_max: float = 0.5, degree: int = 10) -> List[float]:
    """Least-squares Taylor coefficients of ``H`` from samples on ``[0, p_max]``."""
    k = int(round(p_max / grid.h))
    t = np.arange(k + 1) * grid.h
    coef = np.polynomial.polynomial.polyfit(t, np.real(grid.samples[:k + 1]), degree)
    return [float(c) for c in coef[:n_coeffs]]


def grid_refinement(P: float = BOREL_P, h: float = BOREL_H, tol: float = BOREL_TOL, v0: float = 0.05,
                    steps: int = 50) -> dict:
    """Compare conserved-quantity values on grids ``h`` and ``h/2``."""
    g1 = solve_borel_fixed_point(P, h, tol)
    g2 = solve_borel_fixed_point(P, h / 2, tol)
    vs = parabolic_orbit(v0, steps)
    diffs = [abs(conserved_C(k, v, g1) - conserved_C(k, v, g2)) for k, v in enumerate(vs)]
    dR = [abs(R_eval(v, g1) - R_eval(v, g2)) for v in vs]
    return {"max_change": float(max(diffs)), "max_change_R": float(max(dR)), "tol": tol,
            "factor": float(max(diffs) / tol)}
