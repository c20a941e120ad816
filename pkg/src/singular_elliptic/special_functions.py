"""Scalar building blocks: log-gamma, Pochhammer symbols and Gauss 2F1.

Everything here works in binary64.  The Gauss function is evaluated by its
power series, with the Pfaff transformation

    2F1(a, b; c; x) = (1 - x)^(-b) 2F1(c - a, b; c; x / (x - 1))

used for negative arguments and the Gauss summation theorem at x = 1.
A vectorised confluent function M(b; c; -z) is also provided; the Laplace
route for F_A in :mod:`singular_elliptic.lauricella` needs it for large
negative arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergent, PoleError

__all__ = [
    "SeriesControl",
    "EvalResult",
    "DEFAULT_CONTROL",
    "log_gamma",
    "gamma_ratio",
    "pochhammer",
    "log_pochhammer_table",
    "gauss_2f1",
    "gauss_2f1_at_one",
    "kummer_negative",
    "truncate_terms",
]

_EULER_GAMMA = 0.57721566490153286061
_HALF_LOG_2PI = 0.91893853320467274178
_EPS = np.finfo(float).eps

# B_2, B_4, ..., B_18
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation controls shared by every series in the package.

    ``max_terms`` bounds each summation index; triple sums may therefore use
    up to ``3 * max_terms`` degree shells.
    """

    abs_tol: float = 1e-14
    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")

    def accepts(self, value: float, error: float) -> bool:
        return error <= max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class EvalResult:
    value: float
    error_estimate: float
    terms_used: int
    converged: bool
    route: str = ""

    def __float__(self) -> float:
        return float(self.value)

    def scaled(self, factor: float, route: str | None = None) -> "EvalResult":
        return EvalResult(
            self.value * factor,
            self.error_estimate * abs(factor),
            self.terms_used,
            self.converged,
            self.route if route is None else route,
        )


# ---------------------------------------------------------------------------
# log-gamma
# ---------------------------------------------------------------------------


def _zeta_minus_one(k: int) -> float:
    # Euler-Maclaurin with cut N = 10; the remainder is far below 1e-17.
    n_cut = 10
    head = math.fsum(n ** -float(k) for n in range(2, n_cut))
    tail = n_cut ** (1.0 - k) / (k - 1) + 0.5 * n_cut ** -float(k)
    rising = float(k)
    for j, b2j in enumerate(_BERNOULLI[:8], start=1):
        tail += b2j / math.factorial(2 * j) * rising * n_cut ** (-k - 2 * j + 1)
        rising *= (k + 2 * j - 1) * (k + 2 * j)
    return head + tail


# coefficients (-1)^k (zeta(k) - 1) / k of the Taylor series of lnGamma(2 + e)
_LG_TAYLOR = tuple((-1) ** k * _zeta_minus_one(k) / k for k in range(2, 48))


def _lgamma_two_plus(eps: float) -> float:
    acc = 0.0
    power = eps * eps
    for coef in _LG_TAYLOR:
        term = coef * power
        acc += term
        if abs(term) < 1e-18 * max(abs(acc), 1e-300):
            break
        power *= eps
    return eps * (1.0 - _EULER_GAMMA) + acc


def _stirling(z: float) -> float:
    inv = 1.0 / z
    inv2 = inv * inv
    corr = 0.0
    power = inv
    for k, b2k in enumerate(_BERNOULLI, start=1):
        corr += b2k / (2 * k * (2 * k - 1)) * power
        power *= inv2
    return (z - 0.5) * math.log(z) - z + _HALF_LOG_2PI + corr


def log_gamma(a: float) -> float:
    """Natural log of Gamma(a) for a > 0, to about 1e-14 relative accuracy.

    Stirling's series for a >= 10, upward recurrence below that, and Taylor
    series about the zeros at a = 1 and a = 2 so the relative accuracy holds
    there too.
    """
    a = float(a)
    if not a > 0 or math.isinf(a):
        raise DomainError(f"log_gamma requires a finite a > 0, got {a!r}")
    if 0.5 < a <= 1.5:
        eps = a - 1.0
        return _lgamma_two_plus(eps) - math.log1p(eps)
    if 1.5 < a <= 2.5:
        return _lgamma_two_plus(a - 2.0)
    if a >= 10.0:
        return _stirling(a)
    shift = math.ceil(10.0 - a)
    prod = 1.0
    for k in range(shift):
        prod *= a + k
    return _stirling(a + shift) - math.log(prod)


def _log_abs_gamma(x: float) -> tuple[float, float]:
    """(ln|Gamma(x)|, sign Gamma(x)) for any real x; sign 0 marks a pole."""
    if x > 0:
        return log_gamma(x), 1.0
    if x == math.floor(x):
        return math.inf, 0.0
    # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    s = math.sin(math.pi * math.fmod(x, 2.0))
    return math.log(math.pi) - math.log(abs(s)) - log_gamma(1.0 - x), math.copysign(1.0, s)


def gamma_ratio(num: tuple[float, ...], den: tuple[float, ...]) -> float:
    """prod Gamma(num) / prod Gamma(den), evaluated through log-gamma."""
    log_val = 0.0
    sign = 1.0
    for x in num:
        lg, s = _log_abs_gamma(x)
        if s == 0.0:
            raise PoleError(f"Gamma has a pole at {x!r}")
        log_val += lg
        sign *= s
    for x in den:
        lg, s = _log_abs_gamma(x)
        if s == 0.0:
            return 0.0
        log_val -= lg
        sign *= s
    return sign * math.exp(log_val)


# ---------------------------------------------------------------------------
# Pochhammer symbols
# ---------------------------------------------------------------------------


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a (a + 1) ... (a + n - 1), with (a)_0 = 1."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    prod = 1.0
    log_mag = 0.0
    for k in range(int(n)):
        f = a + k
        if f == 0.0:
            return 0.0
        prod *= f
        if abs(prod) > 1e280:
            # keep the mantissa bounded and carry the magnitude in log-space
            log_mag += math.log(abs(prod))
            prod = math.copysign(1.0, prod)
    if log_mag == 0.0:
        return prod
    return prod * math.exp(log_mag)


def log_pochhammer_table(a: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """ln|(a)_k| and sign((a)_k) for k = 0..n as arrays."""
    factors = a + np.arange(n, dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.concatenate(([0.0], np.cumsum(np.log(np.abs(factors)))))
    signs = np.concatenate(([1.0], np.cumprod(np.sign(factors))))
    return logs, signs


# ---------------------------------------------------------------------------
# series truncation
# ---------------------------------------------------------------------------


def truncate_terms(terms: np.ndarray, ctrl: SeriesControl) -> tuple[float, float, int, bool]:
    """Apply the shared stopping rule to a precomputed sequence of terms.

    Stops at the first index n with |t_n| below tolerance and the last three
    ratios |t_k / t_(k-1)| all below one.  The tail is estimated
    geometrically as |t_n| / (1 - ratio).

    Returns ``(value, error_estimate, terms_used, stopped)``.
    """
    terms = np.asarray(terms, dtype=float)
    mags = np.abs(terms)
    partial = np.cumsum(terms)
    for n in range(terms.size):
        tol = max(ctrl.abs_tol, _EPS * abs(partial[n]))
        if mags[n] == 0.0 and n > 0:
            return float(partial[n]), 0.0, n + 1, True
        if n < 3 or mags[n] > tol:
            continue
        prev = mags[n - 3 : n]
        if np.any(prev == 0.0):
            continue
        ratios = mags[n - 2 : n + 1] / prev
        if np.all(ratios < 1.0):
            err = mags[n] / (1.0 - ratios[-1])
            return float(partial[n]), float(err), n + 1, True
    if terms.size == 0:
        return 0.0, math.inf, 0, False
    return float(partial[-1]), float(mags[-1]), int(terms.size), False


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------


def _check_c(c: float) -> None:
    if c <= 0 and c == math.floor(c):
        raise PoleError(f"2F1 lower parameter c={c!r} is a nonpositive integer")


def _series_2f1(a: float, b: float, c: float, x: float, ctrl: SeriesControl,
                budget: int, route: str) -> EvalResult:
    total = 1.0
    term = 1.0
    mags = [1.0]
    abs_sum = 1.0
    tol_abs = ctrl.abs_tol
    for n in range(budget):
        ratio = ((a + n) * (b + n)) / ((c + n) * (n + 1.0))
        term = term * ratio * x
        total += term
        mag = abs(term)
        mags.append(mag)
        abs_sum += mag
        if mag == 0.0:
            err = _EPS * abs_sum
            return EvalResult(total, err, n + 2, ctrl.accepts(total, err), route)
        k = len(mags) - 1
        if k >= 3 and mag <= max(tol_abs, _EPS * abs(total)):
            prev = mags[k - 3 : k]
            if all(p > 0.0 for p in prev):
                rs = (mags[k - 2] / prev[0], mags[k - 1] / prev[1], mag / prev[2])
                if max(rs) < 1.0:
                    # truncated tail plus rounding from cancellation
                    err = mag / (1.0 - rs[-1]) + _EPS * abs_sum
                    return EvalResult(total, err, k + 1, ctrl.accepts(total, err), route)
    partial = EvalResult(total, abs(term), budget + 1, False, route)
    raise NonConvergent(
        f"2F1({a}, {b}; {c}; {x}) did not converge in {budget} terms", partial
    )


def gauss_2f1(a: float, b: float, c: float, x: float,
              ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Gauss hypergeometric function 2F1(a, b; c; x) for real x <= 1.

    Routes: direct series on [0, 1), with ten times the term budget past
    x = 0.5; the Pfaff transformation for x < 0 (in whichever of its two
    forms cancels less); Gauss summation at x = 1.
    Near x = 1 with small c - a - b the direct series is slow and may raise
    :class:`NonConvergent`; no connection formula is attempted.
    """
    a, b, c, x = float(a), float(b), float(c), float(x)
    _check_c(c)
    if x > 1.0 or math.isnan(x):
        raise DomainError(f"2F1 argument x={x!r} exceeds 1")
    if x == 1.0:
        value = gauss_2f1_at_one(a, b, c)
        return EvalResult(value, 4 * _EPS * abs(value), 0, True, "gauss-summation")
    if x < 0.0:
        t = x / (x - 1.0)
        budget = ctrl.max_terms if t <= 0.5 else 10 * ctrl.max_terms
        # both Pfaff variants; keep the one with less cancellation
        best, failure = None, None
        for u, v in ((a, b), (b, a)):
            try:
                cand = _series_2f1(c - u, v, c, t, ctrl, budget, "pfaff").scaled((1.0 - x) ** (-v))
            except NonConvergent as exc:
                failure = exc
                continue
            if best is None or cand.error_estimate < best.error_estimate:
                best = cand
        if best is None:
            raise failure
        return best
    if x <= 0.5:
        return _series_2f1(a, b, c, x, ctrl, ctrl.max_terms, "series")
    return _series_2f1(a, b, c, x, ctrl, 10 * ctrl.max_terms, "series")


def gauss_2f1_at_one(a: float, b: float, c: float) -> float:
    """Gauss summation: Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))."""
    a, b, c = float(a), float(b), float(c)
    _check_c(c)
    if not c - a - b > 0:
        raise DomainError(f"2F1 at 1 diverges: c - a - b = {c - a - b!r} <= 0")
    if a == 0.0 or b == 0.0:
        return 1.0
    return gamma_ratio((c, c - a - b), (c - a, c - b))


# ---------------------------------------------------------------------------
# confluent function on the negative axis
# ---------------------------------------------------------------------------

_KUMMER_SWITCH = 50.0
# beyond the switch the asymptotic terms shrink below 1e-19 by this index
_ASYMPTOTIC_TERMS = 40


def kummer_negative(b: float, c: float, z) -> np.ndarray:
    """Vectorised Kummer function M(b; c; -z) for z >= 0.

    Up to z = 50 the Kummer transformation e^(-z) M(c - b; c; z) is summed
    (positive terms whenever c > b > 0); beyond that the algebraic
    asymptotic series is used, the exponentially small part being below
    1e-19 relative there.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("kummer_negative expects z >= 0")
    _check_c(c)
    out = np.empty_like(z)
    cb = c - b
    terminating = cb <= 0 and cb == math.floor(cb)
    small = np.ones(z.shape, bool) if terminating else z <= _KUMMER_SWITCH
    if np.any(small):
        zs = z[small]
        zmax = float(zs.max())
        n_terms = int(-cb) + 1 if terminating else int(zmax + 12.0 * math.sqrt(zmax) + 30)
        k = np.arange(n_terms, dtype=float)[:, None]
        with np.errstate(under="ignore"):
            terms = np.cumprod((cb + k) / ((c + k) * (k + 1.0)) * zs[None, :], axis=0)
        out[small] = np.exp(-zs) * (1.0 + terms.sum(axis=0))
    large = ~small
    if np.any(large):
        zl = z[large]
        lead = gamma_ratio((c,), (cb,))
        s_idx = np.arange(_ASYMPTOTIC_TERMS, dtype=float)[:, None]
        ratios = ((b + s_idx) * (b - c + 1.0 + s_idx) / (s_idx + 1.0)) / zl[None, :]
        terms = np.cumprod(ratios, axis=0)
        out[large] = lead * zl ** (-b) * (1.0 + terms.sum(axis=0))
    return out
