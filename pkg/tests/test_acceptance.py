"""Acceptance criteria 1-11, one pass/fail line each.

Run with pytest (the lines appear in the terminal summary) or directly:

    python tests/test_acceptance.py
"""

import time

import pytest

from singular_elliptic.fundamental_solutions import SingularParams
from singular_elliptic.verification import (
    PARAM_GRID,
    criterion_boundary,
    criterion_decomposition,
    criterion_differentiation,
    criterion_gauss_summation,
    criterion_identities,
    criterion_invariants,
    criterion_lauricella_system,
    criterion_pfaff,
    criterion_residuals,
    criterion_route_equivalence,
    criterion_singularity,
)

REPORT: list[str] = []

THREE_TRIPLES = ((0.25, 0.25, 0.25), (0.1, 0.4, 0.25), (0.45, 0.05, 0.3))


def _judge(number: int, title: str, records, elapsed: float, budget: float | None = None) -> bool:
    worst = max(records, key=lambda r: r.measured / r.tolerance)
    ok = all(r.passed for r in records) and (budget is None or elapsed < budget)
    timing = f"{elapsed:.1f} s" + (f" of {budget:g} s" if budget is not None else "")
    line = (f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}: worst {worst.measured:.2e}"
            f" vs tol {worst.tolerance:.0e} over {len(records)} check{'s' if len(records) != 1 else ''} ({timing})")
    REPORT.append(line)
    print(line)
    return ok


def _timed(fn, *args):
    start = time.perf_counter()
    records = fn(*args)
    return records, time.perf_counter() - start


def test_criterion_01_gauss_summation():
    records, dt = _timed(criterion_gauss_summation)
    assert _judge(1, "Gauss summation at x = 1", records, dt, 1.0)


def test_criterion_02_pfaff():
    records, dt = _timed(criterion_pfaff)
    assert _judge(2, "Pfaff transformation both directions", records, dt, 1.0)


def test_criterion_03_route_equivalence():
    records, dt = _timed(criterion_route_equivalence)
    assert _judge(3, "series / decomposed / integral agreement", records, dt, 60.0)


def test_criterion_04_decomposition():
    records, dt = _timed(criterion_decomposition)
    assert _judge(4, "Gauss-function decomposition vs direct series", records, dt, 10.0)


def test_criterion_05_differentiation():
    records, dt = _timed(criterion_differentiation)
    assert _judge(5, "parameter-shift derivatives vs Richardson", records, dt)


@pytest.mark.slow
def test_criterion_06_residuals():
    records, dt = _timed(criterion_residuals, PARAM_GRID)
    assert _judge(6, "L q residual, 8 kinds x 27 parameter triples x 20 samples", records, dt, 300.0)


def test_criterion_07_lauricella_system():
    records = []
    start = time.perf_counter()
    for abg in THREE_TRIPLES:
        records += criterion_lauricella_system(SingularParams(*abg))
    assert _judge(7, "Lauricella system, omega_1..8", records, time.perf_counter() - start)


def test_criterion_08_identities():
    records = []
    start = time.perf_counter()
    for abg in THREE_TRIPLES + ((0.49, 0.3, 0.01),):
        records += criterion_identities(SingularParams(*abg))
    assert _judge(8, "seven weight identities on the test-field catalogue", records, time.perf_counter() - start)


def test_criterion_09_singularity():
    records, dt = _timed(criterion_singularity, THREE_TRIPLES)
    assert _judge(9, "r^-1 order and limit constant on three rays", records, dt)


def test_criterion_10_boundary():
    records, dt = _timed(criterion_boundary, THREE_TRIPLES)
    assert _judge(10, "decay exponents on the coordinate planes", records, dt)


def test_criterion_11_invariants():
    records, dt = _timed(criterion_invariants)
    assert _judge(11, "exchange symmetry, homogeneity, axis permutation", records, dt)


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
