import math

import numpy as np
import pytest

import oracles
from singular_elliptic import DomainError, NonConvergent, PoleError
from singular_elliptic.lauricella import (
    LauricellaParams,
    TripleArg,
    decomposition_sum,
    derivative_prefactor,
    fa3_auto,
    fa3_decomposed,
    fa3_derivative,
    fa3_integral,
    fa3_laplace,
    fa3_series,
    pair_rate,
)
from singular_elliptic.special_functions import SeriesControl, gauss_2f1


def rel(a, b):
    return abs(a - b) / abs(b)


QUARTER = LauricellaParams(1.25, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5)
MIXED = LauricellaParams(1.65, 0.75, 0.3, 0.1, 1.5, 0.6, 0.2)


class TestParams:
    def test_pole_in_c(self):
        with pytest.raises(PoleError):
            LauricellaParams(1.0, 0.5, 0.5, 0.5, 0.5, -1.0, 0.5)

    def test_shifted(self):
        s = QUARTER.shifted(1, 0, 2)
        assert s == LauricellaParams(4.25, 1.25, 0.25, 2.25, 1.5, 0.5, 2.5)

    def test_permuted(self):
        assert MIXED.permuted((2, 0, 1)).b == (0.1, 0.75, 0.3)
        assert TripleArg(1.0, 2.0, 3.0).permuted((2, 0, 1)) == TripleArg(3.0, 1.0, 2.0)


class TestSeries:
    def test_origin(self):
        r = fa3_series(QUARTER, (0.0, 0.0, 0.0))
        assert r.value == 1.0 and r.route == "series"

    @pytest.mark.parametrize("p,t", [
        (QUARTER, (-0.1, -0.15, -0.2)),
        (MIXED, (0.2, -0.3, 0.1)),
        (MIXED, (-0.05, 0.0, -0.4)),
    ])
    def test_against_brute_force(self, p, t):
        ref = oracles.fa3_brute(p.a, p.b, p.c, t, n=70)
        r = fa3_series(p, t)
        assert r.converged
        assert rel(r.value, ref) <= 1e-13

    def test_outside_region(self):
        with pytest.raises(DomainError):
            fa3_series(QUARTER, (-0.5, -0.3, -0.2))

    def test_nonconvergent(self):
        with pytest.raises(NonConvergent) as info:
            fa3_series(QUARTER, (-0.4, -0.3, -0.2), SeriesControl(max_terms=2))
        assert info.value.partial.route == "series"


class TestReduction:
    @pytest.mark.parametrize("x", [-0.9, -0.5, -0.1, 0.3, 0.9])
    def test_one_variable(self, x):
        g = gauss_2f1(MIXED.a, MIXED.b1, MIXED.c1, x).value
        assert rel(fa3_auto(MIXED, (x, 0.0, 0.0)).value, g) <= 1e-10

    @pytest.mark.parametrize("x", [-3.0, -20.0])
    def test_one_variable_outside_series_region(self, x):
        g = gauss_2f1(MIXED.a, MIXED.b1, MIXED.c1, x).value
        assert rel(fa3_auto(MIXED, (x, 0.0, 0.0)).value, g) <= 1e-10


class TestRoutes:
    def test_integral_matches_series(self):
        t = (-0.1, -0.15, -0.2)
        assert rel(fa3_integral(QUARTER, t), fa3_series(QUARTER, t).value) <= 1e-8

    def test_routes_at_origin(self):
        assert fa3_integral(MIXED, (0.0, 0.0, 0.0)) == pytest.approx(1.0, abs=1e-14)
        assert fa3_decomposed(MIXED, (0.0, 0.0, 0.0)).value == pytest.approx(1.0, abs=1e-15)

    def test_decomposed_matches_integral(self):
        t = (-0.3, -0.1, -0.05)
        assert rel(fa3_decomposed(QUARTER, t).value, fa3_integral(QUARTER, t)) <= 1e-7

    def test_integral_needs_c_above_b(self):
        with pytest.raises(DomainError):
            fa3_integral(LauricellaParams(1.0, 0.5, 0.5, 0.5, 0.4, 1.0, 1.0), (-0.1, -0.1, -0.1))

    @pytest.mark.parametrize("p", [QUARTER, MIXED, LauricellaParams(2.3, 0.9, 0.6, 0.6, 1.8, 1.2, 1.2)])
    def test_decomposed_matches_series(self, p):
        t = (-0.2, -0.2, -0.2)
        r = fa3_decomposed(p, t)
        assert r.converged and r.route == "decomposed"
        assert rel(r.value, fa3_series(p, t).value) <= 1e-8

    @pytest.mark.parametrize("t", [(-0.5, -0.4, -0.3), (-3.0, -0.1, -0.1), (-2.0, -2.0, -1.0)])
    def test_decomposed_against_mpmath(self, t):
        ref = oracles.fa3_laplace_quad(MIXED.a, MIXED.b, MIXED.c, t)
        assert rel(fa3_decomposed(MIXED, t).value, ref) <= 1e-12

    @pytest.mark.parametrize("t", [(-3.0, -3.0, -3.0), (-1e3, -20.0, -0.5), (-1e8, -1e8, -1e8)])
    def test_laplace_against_mpmath(self, t):
        ref = oracles.fa3_laplace_quad(MIXED.a, MIXED.b, MIXED.c, t)
        r = fa3_laplace(MIXED, t)
        assert r.route == "laplace"
        assert rel(r.value, ref) <= 1e-12

    def test_laplace_domain(self):
        with pytest.raises(DomainError):
            fa3_laplace(MIXED, (0.1, -1.0, -1.0))
        with pytest.raises(DomainError):
            fa3_laplace(LauricellaParams(-0.5, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0), (-1.0, -1.0, -1.0))

    def test_decomposition_at_zero_inner_arguments(self):
        r = decomposition_sum(QUARTER, (0.0, 0.0, 0.0), (True, True, True), SeriesControl())
        assert r.value == pytest.approx(1.0, abs=1e-15)

    def test_decomposed_budget(self):
        with pytest.raises(NonConvergent) as info:
            fa3_decomposed(QUARTER, (-3.0, -3.0, -3.0), SeriesControl(max_terms=5))
        assert not info.value.partial.converged


class TestAuto:
    def test_origin(self):
        r = fa3_auto(QUARTER, (0.0, 0.0, 0.0))
        assert (r.value, r.route) == (1.0, "series")

    def test_moderate_uses_decomposed(self):
        t = (-0.5, -0.4, -0.3)
        r = fa3_auto(QUARTER, t)
        assert r.route == "decomposed"
        assert rel(r.value, fa3_integral(QUARTER, t)) <= 1e-7

    def test_one_large_argument_uses_decomposed(self):
        t = (-3.0, -0.1, -0.1)
        assert pair_rate(t) <= 0.5
        r = fa3_auto(QUARTER, t)
        assert r.route == "decomposed"
        assert rel(r.value, fa3_integral(QUARTER, t)) <= 1e-7

    def test_large_arguments_use_laplace(self):
        assert fa3_auto(QUARTER, (-40.0, -40.0, -1.0)).route == "laplace"

    def test_unsupported(self):
        with pytest.raises(DomainError):
            fa3_auto(QUARTER, (0.8, -0.5, 0.0))

    def test_pair_rate(self):
        assert pair_rate((-1.0, -1.0, 0.0)) == 0.25


class TestDerivative:
    def test_order_zero(self):
        t = (-0.3, -0.2, -0.1)
        assert fa3_derivative(MIXED, t, 0, 0, 0).value == fa3_auto(MIXED, t).value
        assert derivative_prefactor(MIXED, 0, 0, 0) == 1.0

    def test_prefactor(self):
        # (a)_1 (b1)_1 / (c1)_1
        assert derivative_prefactor(MIXED, 1, 0, 0) == pytest.approx(1.65 * 0.75 / 1.5, rel=1e-15)

    @pytest.mark.parametrize("t", [(-0.1, -0.1, -0.1), (-2.0, -0.5, -0.3)])
    def test_first_derivative_against_fd(self, t):
        h = 1e-3
        f = [fa3_auto(MIXED, (t[0] + s, t[1], t[2])).value for s in (-2 * h, -h, h, 2 * h)]
        fd = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
        assert rel(fa3_derivative(MIXED, t, 1, 0, 0).value, fd) <= 1e-8

    def test_central_difference_small_step(self):
        t, h = (-0.1, -0.1, -0.1), 1e-5
        fd = (fa3_auto(QUARTER, (t[0] + h, t[1], t[2])).value
              - fa3_auto(QUARTER, (t[0] - h, t[1], t[2])).value) / (2 * h)
        assert rel(fa3_derivative(QUARTER, t, 1, 0, 0).value, fd) <= 1e-6

    def test_negative_order(self):
        with pytest.raises(ValueError):
            fa3_derivative(MIXED, (-0.1, -0.1, -0.1), -1, 0, 0)


def test_permutation_symmetry():
    t = TripleArg(-1.3, -0.2, -0.7)
    v = fa3_auto(MIXED, t).value
    for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
        assert rel(fa3_auto(MIXED.permuted(perm), t.permuted(perm)).value, v) <= 1e-12


def test_laplace_is_smooth_in_arguments():
    # the fixed lattice makes second differences follow the true curvature
    h = 1e-3
    v = [fa3_laplace(QUARTER, (-5.0 + k * h, -5.0, -5.0)).value for k in (-1, 0, 1)]
    second = (v[0] - 2 * v[1] + v[2]) / h ** 2
    exact = fa3_derivative(QUARTER, (-5.0, -5.0, -5.0), 2, 0, 0).value
    assert math.isfinite(second)
    assert rel(second, exact) <= 1e-4


def test_route_equivalence_200_sets():
    rng = np.random.default_rng(11)
    for _ in range(200):
        b = rng.uniform(0.05, 0.95, 3)
        c = b + rng.uniform(0.05, 1.5, 3)
        p = LauricellaParams(float(rng.uniform(0.1, 2.5)), *map(float, b), *map(float, c))
        t = -rng.dirichlet(np.ones(3)) * rng.uniform(0.0, 2.0)
        ref = fa3_integral(p, t, nodes=64)
        assert rel(fa3_decomposed(p, t).value, ref) <= 1e-7
        if abs(t).sum() <= 0.9:
            assert rel(fa3_series(p, t).value, ref) <= 1e-7
