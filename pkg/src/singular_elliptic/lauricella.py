"""Lauricella's F_A in three variables, by several independent routes.

    F_A(a; b1, b2, b3; c1, c2, c3; x, y, z)
        = sum_{i,j,k} (a)_{i+j+k} (b1)_i (b2)_j (b3)_k
                      / ((c1)_i (c2)_j (c3)_k i! j! k!)  x^i y^j z^k

Routes:

``series``
    the triple sum itself, grouped by total degree; |x|+|y|+|z| < 1.
``integral``
    the Euler triple integral, tensor Gauss-Jacobi quadrature; c_i > b_i > 0.
``decomposed``
    expansion in products of three Gauss functions, each factor with a
    negative argument rewritten by the Pfaff transformation.
``laplace``
    F_A = Gamma(a)^-1 int_0^inf e^-s s^(a-1) prod_i M(b_i; c_i; x_i s) ds,
    a one-dimensional integral that stays cheap for arguments of any size on
    the negative axis.  It is what makes evaluation next to the pole of a
    fundamental solution (arguments of order -1e9) practical.

The decomposed route agrees with the integral and Laplace routes to about
1e-13 on the box [-3, 0]^3 (tests/test_lauricella.py); its cost grows quickly
as the transformed arguments x / (x - 1) approach one, so the automatic
dispatcher hands large negative arguments to the Laplace route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError, NonConvergent, PoleError
from .special_functions import (
    DEFAULT_CONTROL,
    EvalResult,
    SeriesControl,
    kummer_negative,
    log_gamma,
    log_pochhammer_table,
    pochhammer,
    truncate_terms,
)

__all__ = [
    "LauricellaParams",
    "TripleArg",
    "fa3_series",
    "fa3_integral",
    "fa3_decomposed",
    "fa3_laplace",
    "fa3_derivative",
    "fa3_auto",
    "decomposition_sum",
    "pair_rate",
    "derivative_prefactor",
]

_EPS = np.finfo(float).eps
# Scaled convolution stays inside the binary64 exponent range up to here.
_SERIES_SHELL_CAP = 1000
_CONV_SCALE = 200.0


@dataclass(frozen=True)
class LauricellaParams:
    a: float
    b1: float
    b2: float
    b3: float
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            c = getattr(self, name)
            if c <= 0 and c == math.floor(c):
                raise PoleError(f"{name}={c!r} is a nonpositive integer")

    @property
    def b(self) -> tuple[float, float, float]:
        return (self.b1, self.b2, self.b3)

    @property
    def c(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)

    def shifted(self, i: int, j: int, k: int) -> "LauricellaParams":
        return LauricellaParams(
            self.a + i + j + k,
            self.b1 + i, self.b2 + j, self.b3 + k,
            self.c1 + i, self.c2 + j, self.c3 + k,
        )

    def permuted(self, perm: tuple[int, int, int]) -> "LauricellaParams":
        b, c = self.b, self.c
        return LauricellaParams(self.a, *(b[q] for q in perm), *(c[q] for q in perm))


@dataclass(frozen=True)
class TripleArg:
    x: float
    y: float
    z: float

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def permuted(self, perm: tuple[int, int, int]) -> "TripleArg":
        v = (self.x, self.y, self.z)
        return TripleArg(*(v[q] for q in perm))


def _as_arg(t) -> TripleArg:
    return t if isinstance(t, TripleArg) else TripleArg(*map(float, t))


# ---------------------------------------------------------------------------
# direct triple series
# ---------------------------------------------------------------------------


def _series_shells(p: LauricellaParams, t: TripleArg, n_shells: int) -> np.ndarray:
    """Degree-shell sums S_0 .. S_{n_shells-1} of the triple series.

    S_N = (a)_N * sum_{i+j+k=N} u_i v_j w_k with u_i = (b1)_i x^i / ((c1)_i i!),
    evaluated as a convolution.  Arguments are normalised by their largest
    magnitude and rescaled by a fixed factor so that the factorial decay
    stays representable out to the shell cap.
    """
    args = (t.x, t.y, t.z)
    big = max(abs(v) for v in args)
    sigma = _CONV_SCALE
    seqs = []
    k = np.arange(n_shells - 1, dtype=float)
    for b, c, v in zip(p.b, p.c, args):
        ratios = (b + k) / ((c + k) * (k + 1.0)) * (sigma * v / big)
        seqs.append(np.concatenate(([1.0], np.cumprod(ratios))))
    conv = np.convolve(np.convolve(seqs[0], seqs[1])[:n_shells], seqs[2])[:n_shells]
    log_a, sign_a = log_pochhammer_table(p.a, n_shells - 1)
    scale = log_a + np.arange(n_shells) * math.log(big / sigma)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        shells = np.where(conv == 0.0, 0.0, conv * sign_a * np.exp(scale))
    return shells


def fa3_series(p: LauricellaParams, t, ctrl: SeriesControl = DEFAULT_CONTROL,
               guard: float = 0.05) -> EvalResult:
    """Direct triple series, summed over total-degree shells."""
    t = _as_arg(t)
    rho = abs(t.x) + abs(t.y) + abs(t.z)
    if rho > 1.0 - guard:
        raise DomainError(f"series route needs |x|+|y|+|z| <= {1 - guard}, got {rho:.6g}")
    if rho == 0.0:
        return EvalResult(1.0, 0.0, 1, True, "series")
    cap = min(3 * ctrl.max_terms, _SERIES_SHELL_CAP)
    n_shells = min(cap, int(math.log(1e-18) / math.log(rho)) + 60)
    while True:
        shells = _series_shells(p, t, n_shells)
        value, err, used, stopped = truncate_terms(shells, ctrl)
        if stopped:
            return EvalResult(value, err, used, ctrl.accepts(value, err), "series")
        if n_shells >= cap:
            raise NonConvergent(
                f"F_A series did not converge in {cap} shells at {tuple(t)}",
                EvalResult(value, err, used, False, "series"),
            )
        n_shells = min(cap, 2 * n_shells)


# ---------------------------------------------------------------------------
# Euler integral
# ---------------------------------------------------------------------------


def _jacobi_rule(b: float, c: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [0, 1] and weights for the normalised Beta(b, c - b) density."""
    s, w = roots_jacobi(nodes, c - b - 1.0, b - 1.0)
    log_beta = log_gamma(b) + log_gamma(c - b) - log_gamma(c)
    return 0.5 * (1.0 + s), w * math.exp((1.0 - c) * math.log(2.0) - log_beta)


def fa3_integral(p: LauricellaParams, t, nodes: int = 48) -> float:
    """Euler triple integral by tensor-product Gauss-Jacobi quadrature.

    The Jacobi weights absorb t^(b-1) (1-t)^(c-b-1) on each axis, so only the
    smooth factor (1 - x t1 - y t2 - z t3)^(-a) is sampled.
    """
    t = _as_arg(t)
    for b, c in zip(p.b, p.c):
        if not c > b > 0:
            raise DomainError(f"integral route needs c > b > 0, got b={b}, c={c}")
    if 1.0 - sum(max(v, 0.0) for v in t) <= 0.0:
        raise DomainError("1 - x t1 - y t2 - z t3 must stay positive on the unit cube")
    (t1, w1), (t2, w2), (t3, w3) = (_jacobi_rule(b, c, nodes) for b, c in zip(p.b, p.c))
    base = 1.0 - t.x * t1[:, None, None] - t.y * t2[None, :, None] - t.z * t3[None, None, :]
    return float(np.einsum("i,j,k,ijk->", w1, w2, w3, base ** (-p.a)))


# ---------------------------------------------------------------------------
# decomposition into Gauss functions
# ---------------------------------------------------------------------------


class _Stopper:
    """Incremental form of the stopping rule used by :func:`truncate_terms`."""

    def __init__(self, ctrl: SeriesControl):
        self.ctrl = ctrl
        self.mags: list[float] = []
        self.total = 0.0
        self.err = math.inf

    def push(self, term: float) -> bool:
        self.total += term
        mag = abs(term)
        self.mags.append(mag)
        n = len(self.mags) - 1
        if mag == 0.0 and n > 0:
            self.err = 0.0
            return True
        if n < 3 or mag > max(self.ctrl.abs_tol, _EPS * abs(self.total)):
            return False
        prev = self.mags[n - 3 : n]
        if min(prev) == 0.0:
            return False
        ratios = [self.mags[n - 2] / prev[0], self.mags[n - 1] / prev[1], mag / prev[2]]
        if max(ratios) < 1.0:
            self.err = mag / (1.0 - ratios[-1])
            return True
        return False


def _gauss_table(A, B, C, arg: float, ctrl: SeriesControl) -> np.ndarray:
    """Elementwise 2F1(A, B; C; arg) for broadcastable parameter arrays, 0 <= arg < 1."""
    A, B, C = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (A, B, C)))
    acc = np.ones(A.shape)
    if arg == 0.0 or A.size == 0:
        return acc
    budget = ctrl.max_terms if arg <= 0.5 else 10 * ctrl.max_terms
    # terms peak near n = |A B| arg / |C|; allow for that on top of the budget
    reach = np.max(np.abs(A) + np.abs(B)) * arg / (1.0 - arg)
    budget += int(2 * reach)
    term = np.ones(A.shape)
    prev = [np.full(A.shape, np.inf)] * 3
    for n in range(budget):
        with np.errstate(over="ignore", invalid="ignore"):
            new = term * ((A + n) * (B + n)) / ((C + n) * (n + 1.0)) * arg
        acc += new
        if not np.all(np.isfinite(acc)):
            raise NonConvergent(f"inner 2F1 table at argument {arg} overflowed")
        mag = np.abs(new)
        small = mag <= np.maximum(ctrl.abs_tol, _EPS * np.abs(acc))
        shrinking = (mag < np.abs(term)) & (prev[-1] < prev[-2]) & (prev[-2] < prev[-3])
        if np.all(small & (shrinking | (mag == 0.0))):
            return acc
        prev = prev[1:] + [np.abs(term)]
        term = new
    raise NonConvergent(f"inner 2F1 table at argument {arg} exceeded {budget} terms")


def _inner_table(a, b, c, arg, transformed, cols, rows, ctrl):
    """Gauss factors of one axis of the decomposition.

    Direct form: 2F1(a+N, b+p; c+p; T) with rows N.  Transformed form:
    2F1(c+p-(a+m+p), b+p; c+p; T) with rows m, evaluated after Euler's
    transformation as (1-T)^(a+m-b) 2F1(a+m+p, c-b; c+p; T) so that the
    summed terms keep one sign instead of cancelling.  ``rows=None`` means
    the row shift is zero and a 1-D table over p is returned.
    """
    shift = np.zeros(1) if rows is None else rows
    up = (a + shift)[:, None]
    col = cols[None, :]
    if not transformed:
        table = _gauss_table(up + (col if rows is None else 0.0), b + col, c + col, arg, ctrl)
    elif a > 0 and c - b > 0:
        with np.errstate(under="ignore"):
            scale = np.exp((a + shift - b) * math.log1p(-arg))[:, None]
        table = scale * _gauss_table(up + col, c - b, c + col, arg, ctrl)
    else:
        table = _gauss_table(c - up, b + col, c + col, arg, ctrl)
    return table[0] if rows is None else table


def decomposition_sum(p: LauricellaParams, inner_args, pfaff, ctrl: SeriesControl,
                      shell_cap: int | None = None) -> EvalResult:
    """Outer triple sum of the Gauss-function decomposition of F_A.

    For each axis q, ``inner_args[q]`` is the argument T_q of that axis's
    Gauss factors and ``pfaff[q]`` says whether the factor is in transformed
    form.  In direct form the axis contributes T^p 2F1(A, b+p; c+p; T); in
    transformed form (T = x / (x - 1) for an original x < 0) it contributes
    (-T)^p 2F1(c+p-A, b+p; c+p; T), and the constant (1 - x)^(-b) is left to
    the caller.  Returns the sum without that prefactor.
    """
    targs = tuple(float(v) for v in inner_args)
    taus = tuple(-v if tr else v for v, tr in zip(targs, pfaff))
    cap = shell_cap if shell_cap is not None else ctrl.max_terms
    # shells decay roughly like the sum of pairwise |tau_i tau_j| to the power N,
    # but the inner factors speed this up; start small and double on demand
    n_max = min(cap, 48)
    partial = EvalResult(math.nan, math.inf, 0, False, "decomposed")
    while True:
        try:
            result, stop = _decomposition_pass(p, targs, taus, pfaff, ctrl, n_max)
        except NonConvergent as exc:
            raise NonConvergent(f"decomposition failed in an inner factor: {exc}", partial) from exc
        if result is not None:
            return result
        partial = EvalResult(stop.total, stop.mags[-1], n_max + 1, False, "decomposed")
        if n_max >= cap:
            raise NonConvergent(f"decomposition did not converge in {n_max + 1} shells", partial)
        n_max = min(cap, 2 * n_max)


def _decomposition_pass(p, targs, taus, pfaff, ctrl, n_max):
    a = p.a
    idx = np.arange(n_max + 1, dtype=float)

    # inner Gauss factors; row index of g2, g3 is m, l (transformed) or N (direct)
    b1, b2, b3 = p.b
    c1, c2, c3 = p.c
    g1 = _inner_table(a, b1, c1, targs[0], pfaff[0], idx, None, ctrl)
    g2 = _inner_table(a, b2, c2, targs[1], pfaff[1], idx, idx, ctrl)
    g3 = _inner_table(a, b3, c3, targs[2], pfaff[2], idx, idx, ctrl)

    # outer weights in log form
    la, sa = log_pochhammer_table(a, n_max)
    lfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, n_max + 1)))))
    lratio, sratio, lpow, spow = [], [], [], []
    for b, c, tau in zip(p.b, p.c, taus):
        lb, sb = log_pochhammer_table(b, n_max)
        lc, sc = log_pochhammer_table(c, n_max)
        lratio.append(lb - lc)
        sratio.append(sb * sc)
        if tau == 0.0:
            lp = np.full(n_max + 1, -np.inf)
            lp[0] = 0.0
        else:
            lp = idx * math.log(abs(tau))
        lpow.append(lp)
        spow.append(np.where(idx % 2 == 1, math.copysign(1.0, tau), 1.0))

    stop = _Stopper(ctrl)
    grid = np.arange(n_max + 1)
    for n_tot in range(n_max + 1):
        ll, mm = np.meshgrid(grid[: n_tot + 1], grid[: n_tot + 1], indexing="ij")
        keep = ll + mm <= n_tot
        l, m = ll[keep], mm[keep]
        n = n_tot - l - m
        p1, p2, p3 = l + m, l + n, m + n
        log_w = (la[n_tot] + lratio[0][p1] + lratio[1][p2] + lratio[2][p3]
                 - lfact[l] - lfact[m] - lfact[n]
                 + lpow[0][p1] + lpow[1][p2] + lpow[2][p3])
        sign = sa[n_tot] * sratio[0][p1] * sratio[1][p2] * sratio[2][p3] * spow[0][p1] * spow[1][p2] * spow[2][p3]
        f2 = g2[m, p2] if pfaff[1] else g2[n_tot, p2]
        f3 = g3[l, p3] if pfaff[2] else g3[n_tot, p3]
        with np.errstate(under="ignore"):
            shell = float(np.sum(sign * np.exp(log_w) * g1[p1] * f2 * f3))
        if stop.push(shell):
            return EvalResult(stop.total, stop.err, n_tot + 1, ctrl.accepts(stop.total, stop.err), "decomposed"), stop
    return None, stop


def fa3_decomposed(p: LauricellaParams, t, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """F_A through its expansion in products of Gauss functions.

    Nonpositive components go through the Pfaff transformation, so the
    outer powers become (x / (1 - x))^p and the inner arguments x / (x - 1)
    lie in [0, 1).  Components in [0, 1) are used as they stand.
    """
    t = _as_arg(t)
    pfaff, inner, pref = [], [], 1.0
    for b, v in zip(p.b, t):
        if v >= 1.0:
            raise DomainError(f"decomposed route needs every argument below 1, got {v}")
        if v < 0.0:
            pfaff.append(True)
            inner.append(v / (v - 1.0))
            pref *= (1.0 - v) ** (-b)
        else:
            pfaff.append(False)
            inner.append(v)
    return decomposition_sum(p, inner, pfaff, ctrl).scaled(pref)


# ---------------------------------------------------------------------------
# Laplace integral
# ---------------------------------------------------------------------------


def fa3_laplace(p: LauricellaParams, t, step: float = 0.2) -> EvalResult:
    """One-dimensional Laplace representation for nonpositive arguments, a > 0.

    Trapezoidal rule in u = ln s on the fixed lattice u = k * step; the
    integrand is analytic in a strip of half-width pi/2, so the rule
    converges geometrically and the lattice makes results vary smoothly with
    the arguments.  error_estimate compares with the rule of twice the step.
    """
    t = _as_arg(t)
    if any(v > 0.0 for v in t):
        raise DomainError("laplace route needs nonpositive arguments")
    if not p.a > 0:
        raise DomainError(f"laplace route needs a > 0, got {p.a}")
    big = -min(t)
    sum_b = sum(p.b)
    # crude lower bound for ln(Gamma(a) F_A), used to place the lower cut-off
    log_floor = log_gamma(p.a) - max(p.a, sum_b, 0.0) * math.log1p(big) - 10.0
    u_lo = (math.log(1e-18) + log_floor + math.log(p.a)) / p.a
    u_hi = math.log(50.0 + 3.0 * p.a)
    k = np.arange(math.floor(u_lo / step), math.ceil(u_hi / step) + 1)
    u = k * step
    s = np.exp(u)
    log_g = -s + p.a * u - log_gamma(p.a)
    g = np.exp(log_g)
    for b, c, v in zip(p.b, p.c, t):
        if v != 0.0:
            g = g * kummer_negative(b, c, -v * s)
    value = step * float(np.sum(g))
    coarse = 2.0 * step * float(np.sum(g[(k % 2) == 0]))
    diff = abs(value - coarse)
    err = max(diff * diff / max(abs(value), 1e-300), 8 * _EPS * abs(value))
    return EvalResult(value, err, int(k.size), True, "laplace")


# ---------------------------------------------------------------------------
# dispatch and derivatives
# ---------------------------------------------------------------------------


def pair_rate(t) -> float:
    """Sum of pairwise |tau_i tau_j|, tau = x / (1 - x), for nonpositive arguments.

    The decomposed route's shells decay roughly geometrically at this rate,
    so it predicts that route's cost.
    """
    tau = [abs(v) / (1.0 - v) for v in t]
    return tau[0] * tau[1] + tau[0] * tau[2] + tau[1] * tau[2]


def fa3_auto(p: LauricellaParams, t, ctrl: SeriesControl = DEFAULT_CONTROL,
             guard: float = 0.05, decomposed_limit: float = 0.5) -> EvalResult:
    """Pick an evaluation route.

    series when |x|+|y|+|z| <= 1 - guard.  For nonpositive arguments beyond
    that: decomposed while :func:`pair_rate` <= ``decomposed_limit``, laplace
    when it is larger and a > 0, decomposed again as the last resort.
    Anything else is outside the supported domain.
    """
    t = _as_arg(t)
    if abs(t.x) + abs(t.y) + abs(t.z) <= 1.0 - guard:
        return fa3_series(p, t, ctrl, guard)
    if all(v <= 0.0 for v in t):
        if pair_rate(t) > decomposed_limit and p.a > 0:
            return fa3_laplace(p, t)
        return fa3_decomposed(p, t, ctrl)
    raise DomainError(f"no F_A route covers arguments {tuple(t)} with a={p.a}")


def derivative_prefactor(p: LauricellaParams, i: int, j: int, k: int) -> float:
    """(a)_{i+j+k} (b1)_i (b2)_j (b3)_k / ((c1)_i (c2)_j (c3)_k)."""
    return (pochhammer(p.a, i + j + k)
            * pochhammer(p.b1, i) * pochhammer(p.b2, j) * pochhammer(p.b3, k)
            / (pochhammer(p.c1, i) * pochhammer(p.c2, j) * pochhammer(p.c3, k)))


def fa3_derivative(p: LauricellaParams, t, i: int, j: int, k: int,
                   ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Partial derivative d^(i+j+k) F_A / dx^i dy^j dz^k via parameter shifts."""
    if min(i, j, k) < 0:
        raise ValueError("derivative orders must be nonnegative")
    base = fa3_auto(p.shifted(i, j, k), t, ctrl)
    return base.scaled(derivative_prefactor(p, i, j, k))
