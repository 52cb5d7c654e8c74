import itertools
from fractions import Fraction

import numpy as np
import pytest

from duelbench import lp as lpc


def vertex_optimum(A, b, c):
    """Brute force: best feasible basic point of ``min c.x, Ax <= b, x >= 0``."""
    m, n = A.shape
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = None
    for active in itertools.combinations(range(m + n), n):
        M = G[list(active)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(active)])
        if np.all(G @ x <= h + 1e-9):
            val = c @ x
            best = val if best is None else min(best, val)
    return best


def _random_lp(rng, m=6, n=8):
    A = rng.uniform(0.1, 1.0, (m, n))
    b = rng.uniform(1.0, 2.0, m)
    c = rng.normal(size=n)
    lp = lpc.LinearProgram(c, [dict(enumerate(r)) for r in A], ["<="] * m, b)
    return lp, A, b, c


@pytest.mark.parametrize("seed", range(8))
def test_simplex_matches_vertex_enumeration(seed):
    lp, A, b, c = _random_lp(np.random.default_rng(seed))
    sol = lpc.solve(lp, "simplex")
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(vertex_optimum(A, b, c), abs=1e-8)
    assert sol.gap < lpc.GAP_TOL


@pytest.mark.parametrize("seed", range(4))
def test_highs_agrees_with_simplex(seed):
    lp, *_ = _random_lp(np.random.default_rng(100 + seed))
    assert lpc.solve(lp, "highs").objective == pytest.approx(lpc.solve(lp, "simplex").objective, abs=1e-8)


def test_exact_solve_small():
    # max x + y, x + 2y <= 4, 3x + y <= 6
    lp = lpc.LinearProgram([1, 1], [{0: 1, 1: 2}, {0: 3, 1: 1}], ["<=", "<="], [4, 6], sense="max")
    sol = lpc.solve(lp, "exact")
    assert sol.objective == Fraction(14, 5)
    check = lpc.verify_certificate(lp, sol.certificate())
    assert check.valid and check.exact and check.max_residual == 0


def test_infeasible_and_unbounded():
    infeasible = lpc.LinearProgram([1], [{0: 1}, {0: 1}], ["<=", ">="], [1, 2])
    unbounded = lpc.LinearProgram([-1, 0], [{0: 1, 1: -1}], ["<="], [1])
    for method in ("simplex", "highs"):
        assert lpc.solve(infeasible, method).status == "infeasible"
        assert lpc.solve(unbounded, method).status == "unbounded"


def test_redundant_equalities():
    # duplicated and summed equality rows leave stuck artificials in phase 1
    rows = [{0: 1, 1: 1}, {0: 1, 1: 1}, {2: 1, 3: 1}, {0: 1, 1: 1, 2: 1, 3: 1}, {0: 1, 2: 1}]
    lp = lpc.LinearProgram([1, 2, 3, 1], rows, ["="] * 5, [1, 1, 1, 2, 1])
    sol = lpc.solve(lp, "simplex")
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(lpc.solve(lp, "highs").objective)
    assert sol.primal_residual < 1e-9


def test_free_and_bounded_variables():
    b = lpc.LpBuilder()
    x = b.add_var("x", lower=None, cost=1)
    y = b.add_var("y", lower=-2, upper=3, cost=-1)
    b.add_row({x: 1, y: 1}, ">=", -1)
    lp = b.build()
    sol = lpc.solve(lp, "simplex")
    assert sol.objective == pytest.approx(-7)
    assert sol.x[y] == pytest.approx(3)


def test_bad_certificate_rejected():
    lp = lpc.LinearProgram([1, 1], [{0: 1, 1: 1}], [">="], [1])
    good = lpc.verify_certificate(lp, lpc.DualCertificate((Fraction(1),), Fraction(1), "lower"))
    bad = lpc.verify_certificate(lp, lpc.DualCertificate((Fraction(2),), Fraction(2), "lower"))
    assert good.valid and not bad.valid
    assert bad.max_residual == 1


def test_dual_of_has_same_value():
    lp, *_ = _random_lp(np.random.default_rng(7), 4, 5)
    assert lpc.solve(lpc.dual_of(lp)).objective == pytest.approx(lpc.solve(lp).objective, abs=1e-8)


def test_row_validation():
    with pytest.raises(ValueError):
        lpc.LinearProgram([1], [{3: 1}], ["<="], [1])
    with pytest.raises(ValueError):
        lpc.LinearProgram([1], [{0: 1}], ["<"], [1])


def test_one_variable_and_box():
    sol = lpc.solve(lpc.LinearProgram([1], [{0: 1}], [">="], [3]))
    assert sol.objective == pytest.approx(3) and sol.x[0] == pytest.approx(3)
    box = lpc.LinearProgram([1, 1], [{0: 1}, {1: 1}], ["<=", "<="], [1, 1], sense="max")
    sol = lpc.solve(box)
    assert sol.objective == pytest.approx(2) and np.allclose(sol.x, [1, 1])


def test_zero_certificate():
    lp = lpc.LinearProgram([1, 2], [{0: 1, 1: 1}], [">="], [1])
    assert lpc.verify_certificate(lp, lpc.DualCertificate((Fraction(0),), Fraction(0), "lower")).valid


@pytest.mark.parametrize("seed", range(4))
def test_solution_certifies_itself(seed):
    lp, *_ = _random_lp(np.random.default_rng(50 + seed))
    sol = lpc.solve(lp)
    assert lpc.verify_certificate(lp, sol.certificate()).valid
