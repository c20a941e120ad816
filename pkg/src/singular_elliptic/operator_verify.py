"""Finite-difference checks that the constructed functions solve what they should.

Three families of checks:

* L q = 0 away from the pole for each fundamental solution q;
* the omega functions satisfy the three Lauricella equations;
* the weight identities L_{a,b,g}(w u) = w L_{a',b',g'}(u).

Residuals are normalised by the largest individual term entering the
residual (never by the value itself, which may be tiny), so a single
tolerance is meaningful everywhere.
"""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NonConvergent
from .fundamental_solutions import SingularParams, SolutionKind, evaluate, solution_recipe
from .lauricella import LauricellaParams, TripleArg, fa3_auto
from .special_functions import DEFAULT_CONTROL, SeriesControl

__all__ = [
    "FDConfig",
    "SmoothField",
    "TEST_FIELDS",
    "IDENTITIES",
    "ResidualSample",
    "ResidualReport",
    "operator_terms_fd",
    "apply_operator_fd",
    "analytic_operator",
    "residual_report",
    "interior_samples",
    "lauricella_system_residual",
    "constructive_identity_residual",
]

SCALE_FLOOR = 1e-30
DEFAULT_SEED = 20240611

Field = Callable[[float, float, float], float]


@dataclass(frozen=True)
class FDConfig:
    h: float = 1e-4  # relative to the local coordinate
    richardson: bool = True

    def __post_init__(self):
        if not 0.0 < self.h < 0.5:
            raise ValueError(f"finite-difference step must lie in (0, 0.5), got {self.h!r}")


def _coeffs(sp) -> tuple[float, float, float]:
    # operator coefficients are not restricted to (0, 1/2): the weight
    # identities need 1 - alpha and friends
    if isinstance(sp, SingularParams):
        return sp.as_tuple()
    return tuple(float(v) for v in sp)


def _derivatives_1d(f: Callable[[float], float], u0: float, step: float, f0: float,
                    richardson: bool) -> tuple[float, float]:
    def central(s):
        fp, fm = f(u0 + s), f(u0 - s)
        return (fp - fm) / (2.0 * s), (fp - 2.0 * f0 + fm) / (s * s)

    d1, d2 = central(step)
    if not richardson:
        return d1, d2
    e1, e2 = central(0.5 * step)
    return (4.0 * e1 - d1) / 3.0, (4.0 * e2 - d2) / 3.0


def operator_terms_fd(u: Field, sp, pt, fd: FDConfig = FDConfig()) -> np.ndarray:
    """The six terms u_xx, u_yy, u_zz, (2a/x) u_x, (2b/y) u_y, (2g/z) u_z."""
    coeffs = _coeffs(sp)
    p = tuple(float(v) for v in (pt.as_tuple() if hasattr(pt, "as_tuple") else pt))
    f0 = u(*p)
    second, first = [], []
    for q in range(3):
        def along(v, q=q):
            shifted = list(p)
            shifted[q] = v
            return u(*shifted)

        d1, d2 = _derivatives_1d(along, p[q], fd.h * p[q], f0, fd.richardson)
        second.append(d2)
        first.append(2.0 * coeffs[q] / p[q] * d1)
    return np.array(second + first)


def apply_operator_fd(u: Field, sp, pt, fd: FDConfig = FDConfig()) -> float:
    """L u at pt by central differences (fourth order with Richardson)."""
    return float(np.sum(operator_terms_fd(u, sp, pt, fd)))


# ---------------------------------------------------------------------------
# smooth test fields with analytic derivatives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothField:
    name: str
    value: Field
    grad: Callable[[float, float, float], tuple[float, float, float]]
    laplacian: Field

    def __call__(self, x, y, z):
        return self.value(x, y, z)


def analytic_operator(f: SmoothField, sp, pt) -> float:
    coeffs = _coeffs(sp)
    x, y, z = pt
    g = f.grad(x, y, z)
    return f.laplacian(x, y, z) + sum(2.0 * c / v * d for c, v, d in zip(coeffs, (x, y, z), g))


TEST_FIELDS: dict[str, SmoothField] = {
    f.name: f
    for f in (
        SmoothField("one", lambda x, y, z: 1.0, lambda x, y, z: (0.0, 0.0, 0.0), lambda x, y, z: 0.0),
        SmoothField("x2", lambda x, y, z: x * x, lambda x, y, z: (2 * x, 0.0, 0.0), lambda x, y, z: 2.0),
        SmoothField("r2", lambda x, y, z: x * x + y * y + z * z,
                    lambda x, y, z: (2 * x, 2 * y, 2 * z), lambda x, y, z: 6.0),
        SmoothField("sinx_y", lambda x, y, z: math.sin(x) * y,
                    lambda x, y, z: (math.cos(x) * y, math.sin(x), 0.0),
                    lambda x, y, z: -math.sin(x) * y),
        SmoothField("exp_sum", lambda x, y, z: math.exp(-x - y - z),
                    lambda x, y, z: (-math.exp(-x - y - z),) * 3,
                    lambda x, y, z: 3.0 * math.exp(-x - y - z)),
    )
}


# ---------------------------------------------------------------------------
# L q = 0
# ---------------------------------------------------------------------------


@dataclass
class ResidualSample:
    point: tuple[float, float, float]
    residual: float
    local_scale: float
    normalized_residual: float
    error: str | None = None


@dataclass
class ResidualReport:
    kind: str
    params: tuple[float, float, float]
    pole: tuple[float, float, float]
    samples: list[ResidualSample] = field(default_factory=list)

    @property
    def max_normalized(self) -> float:
        return max((s.normalized_residual for s in self.samples), default=0.0)

    @property
    def median_normalized(self) -> float:
        if not self.samples:
            return 0.0
        return statistics.median(s.normalized_residual for s in self.samples)

    @property
    def failures(self) -> list[ResidualSample]:
        return [s for s in self.samples if s.error is not None]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["max_normalized"] = self.max_normalized
        out["median_normalized"] = self.median_normalized
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)


def _one_sample(args) -> ResidualSample:
    kind, sp, pole, pt, fd, ctrl, kconst = args
    pole_t = pole.as_tuple() if hasattr(pole, "as_tuple") else tuple(pole)
    dist = math.dist(pt, pole_t)
    if dist < 10.0 * fd.h * max(pt):
        return ResidualSample(pt, math.nan, math.nan, math.inf, "sample too close to the pole")

    def q(x, y, z):
        return evaluate(kind, sp, (x, y, z), pole, kconst, ctrl).value

    try:
        terms = operator_terms_fd(q, sp, pt, fd)
    except (DomainError, NonConvergent) as exc:
        return ResidualSample(pt, math.nan, math.nan, math.inf, f"{type(exc).__name__}: {exc}")
    residual = float(np.sum(terms))
    scale = float(np.max(np.abs(terms)))
    return ResidualSample(pt, residual, scale, abs(residual) / (scale + SCALE_FLOOR))


def residual_report(kind, sp: SingularParams, pole, samples: Sequence, fd: FDConfig = FDConfig(),
                    ctrl: SeriesControl = DEFAULT_CONTROL, kconst: float = 1.0,
                    workers: int = 1) -> ResidualReport:
    """Normalised finite-difference residual of L q_kind at each sample point."""
    kind = SolutionKind.parse(kind)
    pole_t = pole.as_tuple() if hasattr(pole, "as_tuple") else tuple(float(v) for v in pole)
    pts = [tuple(float(v) for v in (s.as_tuple() if hasattr(s, "as_tuple") else s)) for s in samples]
    jobs = [(kind, sp, pole_t, p, fd, ctrl, kconst) for p in pts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_sample, jobs))
    else:
        results = [_one_sample(j) for j in jobs]
    return ResidualReport(kind.name, sp.as_tuple(), pole_t, results)


def interior_samples(n: int, seed: int = DEFAULT_SEED, low: float = 0.3, high: float = 2.0,
                     pole=None, min_distance: float = 0.25) -> list[tuple[float, float, float]]:
    """Reproducible uniform points in [low, high]^3, optionally kept away from a pole."""
    rng = np.random.default_rng(seed)
    pole_t = None if pole is None else (pole.as_tuple() if hasattr(pole, "as_tuple") else tuple(pole))
    out = []
    while len(out) < n:
        p = tuple(float(v) for v in rng.uniform(low, high, 3))
        if pole_t is None or math.dist(p, pole_t) >= min_distance:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# Lauricella system
# ---------------------------------------------------------------------------


def _omega(which: int, sp: SingularParams, ctrl: SeriesControl) -> Callable[[float, float, float], float]:
    params, _, exps = solution_recipe(SolutionKind(which), sp)

    def omega(t1, t2, t3):
        weight = 1.0
        for e, t in zip(exps, (t1, t2, t3)):
            if e:
                # |t|^e: a constant phase is irrelevant for a linear system
                weight *= abs(t) ** e
        return weight * fa3_auto(params, TripleArg(t1, t2, t3), ctrl).value

    return omega


def _partials(f, t: tuple[float, float, float], steps, richardson: bool):
    """Value, gradient and Hessian of f at t by central differences."""
    def at(shift):
        return f(*(ti + si for ti, si in zip(t, shift)))

    f0 = at((0.0, 0.0, 0.0))

    def once(scale):
        s = [scale * v for v in steps]
        grad = np.zeros(3)
        hess = np.zeros((3, 3))
        for i in range(3):
            e = [0.0, 0.0, 0.0]
            e[i] = s[i]
            fp, fm = at(e), at([-v for v in e])
            grad[i] = (fp - fm) / (2 * s[i])
            hess[i, i] = (fp - 2 * f0 + fm) / (s[i] ** 2)
            for j in range(i + 1, 3):
                def d(si, sj):
                    shift = [0.0, 0.0, 0.0]
                    shift[i], shift[j] = si, sj
                    return at(shift)

                hess[i, j] = hess[j, i] = (d(s[i], s[j]) - d(s[i], -s[j]) - d(-s[i], s[j])
                                           + d(-s[i], -s[j])) / (4 * s[i] * s[j])
        return grad, hess

    g1, h1 = once(1.0)
    if not richardson:
        return f0, g1, h1
    g2, h2 = once(0.5)
    return f0, (4 * g2 - g1) / 3, (4 * h2 - h1) / 3


def lauricella_system_residual(which, sp: SingularParams, args, fd: FDConfig = FDConfig(),
                               ctrl: SeriesControl = DEFAULT_CONTROL) -> tuple[float, float, float]:
    """Normalised residuals of the three Lauricella equations for omega_which.

    ``which`` is 1..8 or any callable omega(xi, eta, zeta).  The system is
    the one satisfied by F_A(a; alpha, beta, gamma; 2alpha, 2beta, 2gamma)
    with a = alpha + beta + gamma + 1/2.
    """
    omega = which if callable(which) else _omega(int(which), sp, ctrl)
    t = tuple(float(v) for v in args)
    steps = [fd.h * abs(v) if v != 0.0 else fd.h for v in t]
    w, g, hmat = _partials(omega, t, steps, fd.richardson)
    a = sum(sp.as_tuple()) + 0.5
    b = sp.as_tuple()
    c = tuple(2.0 * v for v in b)
    out = []
    for i in range(3):
        others = [j for j in range(3) if j != i]
        terms = [t[i] * (1.0 - t[i]) * hmat[i, i]]
        terms += [-t[i] * t[j] * hmat[i, j] for j in others]
        terms.append((c[i] - (a + b[i] + 1.0) * t[i]) * g[i])
        terms += [-b[i] * t[j] * g[j] for j in others]
        terms.append(-a * b[i] * w)
        scale = max(abs(v) for v in terms)
        out.append(float(abs(sum(terms)) / (scale + SCALE_FLOOR)))
    return tuple(out)


# ---------------------------------------------------------------------------
# weight identities
# ---------------------------------------------------------------------------

IDENTITIES = ("x", "y", "z", "xy", "xz", "yz", "xyz")


def constructive_identity_residual(which: str, sp, u: Field, pt, fd: FDConfig = FDConfig()) -> float:
    """|L(w u) - w L'(u)| normalised by the largest stencil term on either side.

    ``which`` names the weighted axes: "x" means w = x^(1-2 alpha) and
    L' = L_{1-alpha, beta, gamma}; "xyz" weights and flips all three.
    """
    if which not in IDENTITIES:
        raise ValueError(f"unknown identity {which!r}; expected one of {IDENTITIES}")
    coeffs = _coeffs(sp)
    flipped = tuple(1.0 - c if ax in which else c for c, ax in zip(coeffs, "xyz"))
    p = tuple(float(v) for v in (pt.as_tuple() if hasattr(pt, "as_tuple") else pt))

    def weight(x, y, z):
        w = 1.0
        for c, ax, v in zip(coeffs, "xyz", (x, y, z)):
            if ax in which:
                w *= v ** (1.0 - 2.0 * c)
        return w

    lhs_terms = operator_terms_fd(lambda x, y, z: weight(x, y, z) * u(x, y, z), coeffs, p, fd)
    rhs_terms = weight(*p) * operator_terms_fd(u, flipped, p, fd)
    scale = max(float(np.max(np.abs(lhs_terms))), float(np.max(np.abs(rhs_terms))))
    return abs(float(np.sum(lhs_terms)) - float(np.sum(rhs_terms))) / (scale + SCALE_FLOOR)
