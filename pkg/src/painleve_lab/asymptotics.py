"""Behaviour of ``G`` near the boundary point ``z = 1``.

Along ``z_n = z0^{1/2^n}`` the values ``G_n = G(z_n)`` increase to
``L = a/(1-a)`` with gaps ``delta_n = L - G_n`` shrinking like
``(2 - a)^{-n}``.  With ``tau = ln(1/z)^beta``, ``beta = log2(2 - a)``, one
has ``G - L = tau Psi (1 + O(tau))`` where ``Psi`` is periodic of period
``ln 2`` in ``t = ln ln(1/z0)``.

Two quantities are computed per sample: the finite-difference limit
``(g_{N+1}/tau_{N+1} - g_N/tau_N) / (tau_{N+1} - tau_N)`` (``psi``) and the
leading ratio ``g_N / tau_N`` (``leading``).  The first is the slope of
``g/tau`` against ``tau``; see the ``psi`` docstring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .julia import continuation_step, eval_G, solve_frel_series
from .series import DEFAULT_BITS, convert, mpctx

PSI_DEPTH = 300


class InsufficientPrecision(ValueError):
    """Working precision cannot resolve ``delta_N``."""

    def __init__(self, required: int, given: int):
        super().__init__(f"need at least {required} bits for this depth, got {given}")
        self.required = required
        self.given = given


def required_bits(a, N: int) -> int:
    """``ceil(N log2(2 - a)) + 80`` guard bits."""
    return math.ceil(N * math.log2(2 - float(a))) + 80


def _check_precision(a, N: int, precision: int):
    need = required_bits(a, N)
    if precision < need:
        raise InsufficientPrecision(need, precision)


def _gn_sequence(a, log_inv_z0, N: int, precision: int):
    """``G(z_n)`` for ``n = 0..N`` with ``ln(1/z0)`` given exactly."""
    ctx = mpctx(precision)
    fs = solve_frel_series(a)
    ell = ctx.convert(log_inv_z0)
    if not ell > 0:
        raise ValueError("z0 must lie in (0, 1)")
    z0 = ctx.exp(-ell)
    G = eval_G(fs, z0, precision)
    out = [G]
    for _ in range(N):
        G = continuation_step(fs.a, G, precision)
        out.append(G)
    return fs, ell, out


def delta_sequence(a, z0, N: int, precision: int = DEFAULT_BITS, log_inv_z0=None) -> list:
    """``delta_n = L - G(z0^{1/2^n})`` for ``n = 0..N``.

    Raises
    ------
    InsufficientPrecision
        If ``precision < ceil(N log2(2 - a)) + 80``.
    """
    _check_precision(a, N, precision)
    ctx = mpctx(precision)
    ell = log_inv_z0 if log_inv_z0 is not None else -ctx.log(convert(z0, precision))
    fs, _, gs = _gn_sequence(a, ell, N, precision)
    L = convert(fs.a, precision) / (1 - convert(fs.a, precision))
    return [L - g for g in gs]


@dataclass
class PsiSample:
    """One evaluation of the boundary oscillation.

    Attributes
    ----------
    z0 : mpf
    t : float
        ``ln ln(1/z0)``, the argument of ``Psi``.
    psi : mpf
        Finite-difference limit at depth ``N``.
    leading : mpf
        ``g_N / tau_N``, the coefficient of ``tau`` in ``G - L``.
    convergence : float
        ``|psi_N - psi_{N-10}|``, a cheap convergence estimate.
    """

    z0: object
    t: float
    N: int
    psi: object
    leading: object
    tau_list: List[object] = field(repr=False)
    g_list: List[object] = field(repr=False)
    precision: int = DEFAULT_BITS
    convergence: float = math.nan

    @property
    def deltas(self) -> list:
        return [-g for g in self.g_list]


def _slope(g, tau, n):
    return (g[n + 1] / tau[n + 1] - g[n] / tau[n]) / (tau[n + 1] - tau[n])


def psi_eval(a, z0=None, N: int = PSI_DEPTH, precision: int = DEFAULT_BITS, t=None) -> PsiSample:
    """Finite-difference limit for the boundary oscillation at ``z0``.

    Either ``z0`` in ``(0, 1)`` or ``t = ln ln(1/z0)`` may be given; ``t``
    avoids rounding ``z0`` when comparing ``t`` with ``t + ln 2``.

    Notes
    -----
    If ``G - L = tau Psi + c2 (tau Psi)^2 + ...`` then ``g/tau`` is affine in
    ``tau`` to leading order with slope ``c2 Psi^2``.  The finite-difference
    limit therefore returns ``c2 Psi^2`` and ``leading`` returns ``Psi``
    (normalized so that the map from ``tau Psi`` to ``G`` has unit
    derivative).
    """
    if N < 11:
        raise ValueError("N must be at least 11")
    _check_precision(a, N + 1, precision)
    ctx = mpctx(precision)
    if t is not None:
        ell = ctx.exp(ctx.convert(t))
    elif z0 is not None:
        zz = convert(z0, precision)
        if not 0 < zz < 1:
            raise ValueError("z0 must lie in (0, 1)")
        ell = -ctx.log(zz)
    else:
        raise ValueError("give z0 or t")
    fs, ell, gs = _gn_sequence(a, ell, N + 1, precision)
    a_ = convert(fs.a, precision)
    L = a_ / (1 - a_)
    beta = ctx.log(2 - a_, 2)
    g = [x - L for x in gs]
    tau = [(ell / ctx.mpf(2) ** n) ** beta for n in range(N + 2)]
    psi = _slope(g, tau, N)
    conv = float(abs(psi - _slope(g, tau, N - 10)))
    return PsiSample(ctx.exp(-ell), float(ctx.log(ell)), N, psi, g[N] / tau[N], tau, g,
                     precision, conv)


def _scan_point(args):
    a, t, N, precision = args
    s = psi_eval(a, N=N, precision=precision, t=t)
    return (t, s.psi, s.leading)


def period_grid(n: int, t0: Optional[float] = None) -> list:
    """``n`` equally spaced ``t`` values covering ``[t0, t0 + ln 2)``."""
    if t0 is None:
        t0 = math.log(math.log(2.0))  # z0 = 1/2
    return [t0 + math.log(2.0) * k / n for k in range(n)]


@dataclass
class PsiTable:
    a: object
    N: int
    precision: int
    t: List[float]
    psi: List[object]
    leading: List[object]

    def scaled(self, c: Optional[float] = None) -> List[float]:
        """``1e9 (psi + c)``; ``c`` defaults to ``-mean(psi)``."""
        if c is None:
            c = -self.mean()
        return [1e9 * (float(p) + c) for p in self.psi]

    def mean(self) -> float:
        ctx = mpctx(self.precision)
        return float(ctx.fsum(self.psi) / len(self.psi))

    def peak_to_peak(self, which: str = "psi") -> float:
        vals = self.psi if which == "psi" else self.leading
        return float(max(vals) - min(vals))


def psi_scan(a, grid: int = 64, N: int = PSI_DEPTH, precision: int = DEFAULT_BITS,
             t0: Optional[float] = None, threads: int = 1, t_values: Optional[Sequence[float]] = None) -> PsiTable:
    """Tabulate the boundary oscillation over one period in ``t``."""
    ts = list(t_values) if t_values is not None else period_grid(grid, t0)
    jobs = [(a, t, N, precision) for t in ts]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(threads) as ex:
            rows = list(ex.map(_scan_point, jobs))
    else:
        rows = [_scan_point(j) for j in jobs]
    return PsiTable(a, N, precision, [r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows])


def second_differences(values: Sequence) -> List[float]:
    v = [float(x) for x in values]
    return [v[i - 1] - 2 * v[i] + v[i + 1] for i in range(1, len(v) - 1)]


@dataclass
class NormalizationReport:
    a: object
    psi: float
    ratios: List[float]
    second_order: List[float]
    sign_ok: bool
    period_gap: float

    def to_json(self) -> dict:
        return dict(self.__dict__, a=str(self.a))


def phi_normalization_check(a, z0_values=(0.5, 0.35), N: int = 120,
                            precision: int = DEFAULT_BITS, checkpoints=(10, 20, 40, 80)) -> NormalizationReport:
    """Leading-order check of ``G - L = tau Psi (1 + O(tau Psi))``.

    For each checkpoint ``n`` reports ``(G(z_n) - L)/(tau_n Psi)`` (should
    tend to 1) and ``((G - L)/(tau Psi) - 1)/(tau Psi)`` (should settle to a
    constant, the second Taylor coefficient of the outer function).  Also
    checks ``Psi < 0`` and that ``z0`` and ``z0^2`` give the same ``Psi``.
    """
    ctx = mpctx(precision)
    s = psi_eval(a, z0=z0_values[0], N=N, precision=precision)
    psi = s.leading
    ratios, second = [], []
    for n in checkpoints:
        u = s.tau_list[n] * psi
        r = s.g_list[n] / u
        ratios.append(float(r))
        second.append(float((r - 1) / u))
    gaps = []
    for z in z0_values:
        s1 = psi_eval(a, z0=z, N=N, precision=precision)
        s2 = psi_eval(a, N=N, precision=precision, t=ctx.log(-2 * ctx.log(convert(z, precision))))
        gaps.append(float(abs(s1.leading - s2.leading)))
    return NormalizationReport(a, float(psi), ratios, second, bool(psi < 0), max(gaps))
