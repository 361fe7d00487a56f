import random
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.optimize import linprog

from oracle_complexity.errors import InfeasibleError
from oracle_complexity.lp import ExactLP, UnboundedError, make_lp, solve_dense


def test_textbook_program():
    # max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
    lp = solve_dense([-3, -5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18])
    assert lp.objective == -36 and lp.x == [2, 6]
    assert lp.duals_ub == [0, F(3, 2), 1]


def test_equality_and_negative_rhs():
    # min x + y st x - y = -1, x + y >= 3 (written as -x - y <= -3)
    lp = solve_dense([1, 1], A_eq=[[1, -1]], b_eq=[-1], A_ub=[[-1, -1]], b_ub=[-3])
    assert lp.objective == 3 and lp.x == [1, 2]


def test_infeasible_and_unbounded():
    with pytest.raises(InfeasibleError):
        solve_dense([1], A_eq=[[1]], b_eq=[1], A_ub=[[1]], b_ub=[0])
    with pytest.raises(UnboundedError):
        solve_dense([-1, 0], A_ub=[[1, -1]], b_ub=[1])


def test_columns_appended_after_solve():
    lp = ExactLP([1], [])
    lp.add_column(5, [1], [])
    lp.solve()
    assert lp.objective == 5
    assert lp.reduced_cost(2, [1], []) == -3
    lp.add_column(2, [1], [])
    assert lp.solve().objective == 2


def _random_program(rng):
    m, n = rng.randint(1, 4), rng.randint(1, 5)
    A = [[F(rng.randint(-3, 5), rng.randint(1, 3)) for _ in range(n)] for _ in range(m)]
    b = [F(rng.randint(0, 8), rng.randint(1, 3)) for _ in range(m)]
    c = [F(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(n)]
    # a simplex row keeps things bounded
    return c, [[1] * n], [1], A, b


@pytest.mark.parametrize("seed", range(40))
def test_against_highs(seed):
    rng = random.Random(seed)
    c, Ae, be, Au, bu = _random_program(rng)
    ref = linprog(np.array(c, float), A_ub=np.array(Au, float), b_ub=np.array(bu, float),
                  A_eq=np.array(Ae, float), b_eq=np.array(be, float), bounds=(0, None), method="highs")
    try:
        lp = solve_dense(c, Ae, be, Au, bu)
    except InfeasibleError:
        assert ref.status == 2
        return
    assert ref.status == 0
    assert abs(float(lp.objective) - ref.fun) < 1e-9
    # strong duality and dual feasibility, exactly
    y = lp.y
    assert sum(yi * bi for yi, bi in zip(y, be + bu)) == lp.objective
    assert all(v >= 0 for v in lp.duals_ub)
    for j in range(len(c)):
        assert c[j] - sum(yi * row[j] for yi, row in zip(y, Ae + Au)) >= 0


def test_float_mode_matches():
    lp = solve_dense([-3, -5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18], mode="float")
    assert abs(lp.objective + 36) < 1e-9
    assert np.allclose(lp.duals_ub, [0, 1.5, 1])
    with pytest.raises(ValueError):
        make_lp([1], [], "quantum")
