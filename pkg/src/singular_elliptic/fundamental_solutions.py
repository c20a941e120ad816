"""The eight fundamental solutions q1..q8 of

    L u = u_xx + u_yy + u_zz + (2 alpha / x) u_x + (2 beta / y) u_y + (2 gamma / z) u_z

in the open octant x, y, z > 0, with 0 < 2 alpha, 2 beta, 2 gamma < 1.

Each q is  k (r^2)^p (x x0)^ex (y y0)^ey (z z0)^ez F_A(a; b; c; xi, eta, zeta)
with xi = -4 x x0 / r^2 and similarly for eta, zeta.  Kind q_k "flips" a
subset of axes: a flipped axis with parameter s contributes b = 1 - s,
c = 2 - 2s and exponent 1 - 2s; an unflipped one b = s, c = 2s and
exponent 0.  Then a = b1 + b2 + b3 + 1/2 and p = -a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CoincidentPole, DomainError
from .lauricella import (
    LauricellaParams,
    TripleArg,
    decomposition_sum,
    derivative_prefactor,
    fa3_auto,
    fa3_laplace,
    pair_rate,
)
from .special_functions import DEFAULT_CONTROL, EvalResult, SeriesControl, log_gamma

__all__ = [
    "SingularParams",
    "FieldPoint",
    "Pole",
    "GeometryFrame",
    "SolutionKind",
    "NormalizationConstants",
    "geometry",
    "solution_recipe",
    "evaluate",
    "regular_part_q1",
    "singular_limit_constant",
    "gradient",
    "grad_q1",
    "BoundaryEntry",
    "BoundaryReport",
    "boundary_property_table",
]


@dataclass(frozen=True)
class SingularParams:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 < 2.0 * v < 1.0:
                raise DomainError(f"need 0 < 2*{name} < 1, got {name}={v!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class FieldPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0 and self.z > 0):
            raise DomainError(f"field point must lie in x, y, z > 0, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Pole:
    x0: float
    y0: float
    z0: float

    def __post_init__(self):
        if not (self.x0 > 0 and self.y0 > 0 and self.z0 > 0):
            raise DomainError(f"pole must lie in x, y, z > 0, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x0, self.y0, self.z0)


def _point(v) -> FieldPoint:
    if isinstance(v, FieldPoint):
        return v
    if isinstance(v, Pole):
        return FieldPoint(*v.as_tuple())
    return FieldPoint(*map(float, v))


def _pole(v) -> Pole:
    if isinstance(v, Pole):
        return v
    if isinstance(v, FieldPoint):
        return Pole(*v.as_tuple())
    return Pole(*map(float, v))


@dataclass(frozen=True)
class GeometryFrame:
    r2: float
    r1_2: float
    r2_2: float
    r3_2: float
    xi: float
    eta: float
    zeta: float

    @property
    def args(self) -> TripleArg:
        return TripleArg(self.xi, self.eta, self.zeta)

    @property
    def reflected(self) -> tuple[float, float, float]:
        return (self.r1_2, self.r2_2, self.r3_2)


class SolutionKind(Enum):
    Q1 = 1
    Q2 = 2
    Q3 = 3
    Q4 = 4
    Q5 = 5
    Q6 = 6
    Q7 = 7
    Q8 = 8

    @property
    def flips(self) -> tuple[bool, bool, bool]:
        return _FLIPS[self]

    @classmethod
    def parse(cls, v) -> "SolutionKind":
        if isinstance(v, cls):
            return v
        if isinstance(v, int):
            return cls(v)
        return cls[str(v).strip().upper()]


_FLIPS = {
    SolutionKind.Q1: (False, False, False),
    SolutionKind.Q2: (True, False, False),
    SolutionKind.Q3: (False, True, False),
    SolutionKind.Q4: (False, False, True),
    SolutionKind.Q5: (True, True, False),
    SolutionKind.Q6: (True, False, True),
    SolutionKind.Q7: (False, True, True),
    SolutionKind.Q8: (True, True, True),
}


@dataclass(frozen=True)
class NormalizationConstants:
    k: tuple[float, ...] = (1.0,) * 8

    def __post_init__(self):
        if len(self.k) != 8:
            raise ValueError("need exactly eight normalisation constants")
        for v in self.k:
            if not math.isfinite(v) or v == 0.0:
                raise ValueError(f"normalisation constants must be finite and nonzero, got {v!r}")

    def of(self, kind: SolutionKind) -> float:
        return self.k[SolutionKind.parse(kind).value - 1]


def geometry(pt, pole) -> GeometryFrame:
    """Direct and reflected squared distances and the F_A arguments."""
    pt, pole = _point(pt), _pole(pole)
    x, y, z = pt.as_tuple()
    x0, y0, z0 = pole.as_tuple()
    r2 = (x - x0) ** 2 + (y - y0) ** 2 + (z - z0) ** 2
    if r2 == 0.0:
        raise CoincidentPole("coincident pole: field point equals the pole")
    frame = GeometryFrame(
        r2=r2,
        r1_2=(x + x0) ** 2 + (y - y0) ** 2 + (z - z0) ** 2,
        r2_2=(x - x0) ** 2 + (y + y0) ** 2 + (z - z0) ** 2,
        r3_2=(x - x0) ** 2 + (y - y0) ** 2 + (z + z0) ** 2,
        xi=-4.0 * x * x0 / r2,
        eta=-4.0 * y * y0 / r2,
        zeta=-4.0 * z * z0 / r2,
    )
    assert frame.xi <= 0.0 and frame.eta <= 0.0 and frame.zeta <= 0.0
    return frame


def solution_recipe(kind, sp: SingularParams) -> tuple[LauricellaParams, float, tuple[float, float, float]]:
    """F_A parameters, exponent of r^2 and axis exponents for one kind."""
    kind = SolutionKind.parse(kind)
    b, c, e = [], [], []
    for s, flipped in zip(sp.as_tuple(), kind.flips):
        if flipped:
            b.append(1.0 - s)
            c.append(2.0 - 2.0 * s)
            e.append(1.0 - 2.0 * s)
        else:
            b.append(s)
            c.append(2.0 * s)
            e.append(0.0)
    a = b[0] + b[1] + b[2] + 0.5
    return LauricellaParams(a, *b, *c), -a, (e[0], e[1], e[2])


def _prefactor(power: float, exps, frame: GeometryFrame, pt: FieldPoint, pole: Pole) -> float:
    log_p = power * math.log(frame.r2)
    for e, u, u0 in zip(exps, pt.as_tuple(), pole.as_tuple()):
        if e:
            log_p += e * math.log(u * u0)
    return math.exp(log_p)


def evaluate(kind, sp: SingularParams, pt, pole, kconst: float = 1.0,
             ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """q_kind(pt; pole) with normalisation constant ``kconst``."""
    pt, pole = _point(pt), _pole(pole)
    frame = geometry(pt, pole)
    params, power, exps = solution_recipe(kind, sp)
    f = fa3_auto(params, frame.args, ctrl)
    return f.scaled(kconst * _prefactor(power, exps, frame, pt, pole))


# ---------------------------------------------------------------------------
# behaviour at the pole
# ---------------------------------------------------------------------------


def regular_part_q1(sp: SingularParams, pt, pole, ctrl: SeriesControl = DEFAULT_CONTROL,
                    decomposed_limit: float = 0.5) -> EvalResult:
    """Bounded factor f in q1 = k1 r^-1 (r1^2)^-alpha (r2^2)^-beta (r3^2)^-gamma f.

    Summed as the decomposition with inner arguments 1 - r^2 / r_i^2 while
    that converges quickly; closer to the pole f is obtained from the
    Laplace route as prod (r_i^2 / r^2)^b_i F_A(xi, eta, zeta).
    """
    pt, pole = _point(pt), _pole(pole)
    frame = geometry(pt, pole)
    if frame.r2 >= 2.0 * min(frame.reflected):
        raise DomainError("regular part needs r^2 < 2 min(r_i^2)")
    params, _, _ = solution_recipe(SolutionKind.Q1, sp)
    if pair_rate(frame.args) <= decomposed_limit:
        inner = [1.0 - frame.r2 / ri for ri in frame.reflected]
        return decomposition_sum(params, inner, (True, True, True), ctrl)
    f = fa3_laplace(params, frame.args)
    log_scale = sum(b * math.log(ri / frame.r2) for b, ri in zip(params.b, frame.reflected))
    return f.scaled(math.exp(log_scale))


def singular_limit_constant(sp: SingularParams) -> float:
    """Limit of the regular part of q1 at the pole."""
    a, b, g = sp.as_tuple()
    num = log_gamma(2 * a) + log_gamma(2 * b) + log_gamma(2 * g) + 0.5 * math.log(math.pi)
    den = log_gamma(a) + log_gamma(b) + log_gamma(g) + log_gamma(a + b + g + 0.5)
    return math.exp(num - den)


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def gradient(kind, sp: SingularParams, pt, pole, kconst: float = 1.0,
             ctrl: SeriesControl = DEFAULT_CONTROL) -> tuple[float, float, float]:
    """Analytic gradient of q_kind with respect to the field point.

    Chain rule through r^2, the axis factors and the three F_A arguments;
    the F_A partial derivatives come from parameter shifts.
    """
    pt, pole = _point(pt), _pole(pole)
    frame = geometry(pt, pole)
    params, power, exps = solution_recipe(kind, sp)
    args = frame.args
    f0 = fa3_auto(params, args, ctrl).value
    dF = [derivative_prefactor(params, *s) * fa3_auto(params.shifted(*s), args, ctrl).value
          for s in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    pref = kconst * _prefactor(power, exps, frame, pt, pole)
    targs = (frame.xi, frame.eta, frame.zeta)
    out = []
    for q, (u, u0, e) in enumerate(zip(pt.as_tuple(), pole.as_tuple(), exps)):
        d = u - u0
        # d(arg_j)/du: -2 arg_j d / r^2 for every j, plus -4 u0 / r^2 on the own axis
        darg = [-2.0 * tj * d / frame.r2 for tj in targs]
        darg[q] += -4.0 * u0 / frame.r2
        chain = sum(dj * dfj for dj, dfj in zip(darg, dF))
        out.append(pref * ((2.0 * power * d / frame.r2 + e / u) * f0 + chain))
    return tuple(out)


def grad_q1(sp: SingularParams, pt, pole, kconst: float = 1.0,
            ctrl: SeriesControl = DEFAULT_CONTROL) -> tuple[float, float, float]:
    """Gradient of q1 in closed form.

    dq1/du = -2 A k (r^2)^(-A-1) [(u - u0) F_A(A+1; alpha, beta, gamma; 2alpha, 2beta, 2gamma)
                                  + u0 F_A(A+1; b + e_u; c + e_u)]
    with A = alpha + beta + gamma + 1/2 and e_u the unit shift of the own
    axis's b and c.  Two F_A values per component instead of four.
    """
    pt, pole = _point(pt), _pole(pole)
    frame = geometry(pt, pole)
    params, power, _ = solution_recipe(SolutionKind.Q1, sp)
    big_a = params.a
    args = frame.args
    lifted = LauricellaParams(big_a + 1, *params.b, *params.c)
    f_common = fa3_auto(lifted, args, ctrl).value
    scale = -2.0 * big_a * kconst * math.exp((power - 1.0) * math.log(frame.r2))
    out = []
    for q, (u, u0) in enumerate(zip(pt.as_tuple(), pole.as_tuple())):
        shift = [0, 0, 0]
        shift[q] = 1
        own = params.shifted(*shift)
        f_own = fa3_auto(own, args, ctrl).value
        out.append(scale * ((u - u0) * f_common + u0 * f_own))
    return tuple(out)


# ---------------------------------------------------------------------------
# behaviour on the coordinate planes
# ---------------------------------------------------------------------------


@dataclass
class BoundaryEntry:
    axis: str
    condition: str  # "dirichlet" (q -> 0) or "flux" (s^(2p) dq/ds -> 0)
    coords: list[float]
    values: list[float]
    measured_exponent: float
    expected_exponent: float
    tolerance: float
    passed: bool


@dataclass
class BoundaryReport:
    kind: str
    entries: list[BoundaryEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[BoundaryEntry]:
        return [e for e in self.entries if not e.passed]


def _loglog_slope(s, v) -> float:
    return float(np.polyfit(np.log(s), np.log(np.abs(v)), 1)[0])


def boundary_property_table(kind, sp: SingularParams, pole, coords=(1e-2, 1e-3, 1e-4),
                            tolerance: float = 0.05,
                            ctrl: SeriesControl = DEFAULT_CONTROL) -> BoundaryReport:
    """Measure how q_kind behaves as each coordinate goes to zero.

    A flipped axis carries the factor s^(1 - 2p), so q itself vanishes with
    that exponent.  On an unflipped axis dq/ds is proportional to s near the
    plane, so the weighted flux s^(2p) dq/ds vanishes like s^(1 + 2p).  The
    other two coordinates are held at the pole's values.
    """
    kind = SolutionKind.parse(kind)
    pole = _pole(pole)
    report = BoundaryReport(kind.name)
    base = pole.as_tuple()
    for q, (axis, s_par, flipped) in enumerate(zip("xyz", sp.as_tuple(), kind.flips)):
        values = []
        for s in coords:
            p = list(base)
            p[q] = s
            if flipped:
                values.append(evaluate(kind, sp, p, pole, 1.0, ctrl).value)
            else:
                values.append(s ** (2 * s_par) * gradient(kind, sp, p, pole, 1.0, ctrl)[q])
        slope = _loglog_slope(coords, values)
        expected = 1.0 - 2.0 * s_par if flipped else 1.0 + 2.0 * s_par
        passed = slope > 0.0 and abs(slope - expected) <= tolerance
        report.entries.append(BoundaryEntry(
            axis, "dirichlet" if flipped else "flux", list(coords), values,
            slope, expected, tolerance, passed,
        ))
    return report
