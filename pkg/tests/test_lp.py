from __future__ import annotations

import numpy as np
import pytest

from chargeplan.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp
from oracles import lp_vertex_optimum


def test_textbook_two_variable():
    # max 2a + 3b s.t. a+b<=100, 6a+3b<=360, a+2b<=120  -> (40, 40)
    res = solve_lp(
        c=[-2.0, -3.0],
        A_ub=[[1, 1], [6, 3], [1, 2]],
        b_ub=[100, 360, 120],
    )
    assert res.status == OPTIMAL
    assert res.x == pytest.approx([40.0, 40.0])
    assert res.objective == pytest.approx(-200.0)
    assert res.dual_objective == pytest.approx(res.objective, rel=1e-9)


def test_equality_and_bounds():
    # min x + 2y s.t. x + y == 10, 1 <= x <= 4
    res = solve_lp(
        c=[1.0, 2.0],
        A_eq=[[1, 1]],
        b_eq=[10.0],
        bounds=[(1.0, 4.0), (0.0, np.inf)],
    )
    assert res.status == OPTIMAL
    assert res.x == pytest.approx([4.0, 6.0])
    assert res.objective == pytest.approx(16.0)
    assert res.dual_objective == pytest.approx(16.0, rel=1e-9)


def test_free_variable():
    # min |angle-ish|: free var pinned by equality
    res = solve_lp(
        c=[0.0, 1.0],
        A_eq=[[1.0, 0.0]],
        b_eq=[-3.0],
        bounds=[(-np.inf, np.inf), (0.0, np.inf)],
    )
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(-3.0)


def test_infeasible():
    res = solve_lp(c=[1.0], A_eq=[[1.0]], b_eq=[5.0], bounds=[(0.0, 1.0)])
    assert res.status == INFEASIBLE


def test_unbounded():
    res = solve_lp(c=[-1.0], bounds=[(0.0, np.inf)])
    assert res.status == UNBOUNDED


def test_degenerate_does_not_cycle():
    # classic Beale-style degeneracy; Bland's rule must terminate
    res = solve_lp(
        c=[-0.75, 150.0, -0.02, 6.0],
        A_ub=[
            [0.25, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        b_ub=[0.0, 0.0, 1.0],
    )
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(-0.05)


def test_duals_mark_binding_constraints():
    # min -x s.t. x <= 5 (binding), x <= 9 (slack)
    res = solve_lp(c=[-1.0], A_ub=[[1.0], [1.0]], b_ub=[5.0, 9.0])
    assert res.x == pytest.approx([5.0])
    assert res.duals_ub[0] == pytest.approx(-1.0)
    assert res.duals_ub[1] == pytest.approx(0.0)


def test_equality_dual_is_shadow_price():
    # min 3x + y s.t. x + y == 4; cheapest unit is y at cost 1
    res = solve_lp(c=[3.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[4.0])
    assert res.duals_eq[0] == pytest.approx(1.0)
    bumped = solve_lp(c=[3.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[5.0])
    assert bumped.objective - res.objective == pytest.approx(res.duals_eq[0])


@pytest.mark.parametrize("seed", range(12))
def test_random_lp_matches_vertex_enumeration(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, 4))
    c = rng.uniform(-5, 5, size=n)
    A_ub = rng.uniform(-3, 3, size=(m, n))
    b_ub = rng.uniform(1, 10, size=m)
    bounds = [(0.0, float(rng.uniform(2, 8))) for _ in range(n)]
    mine = solve_lp(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds)
    ref_x, ref_obj = lp_vertex_optimum(c, None, None, A_ub, b_ub, bounds)
    assert mine.status == OPTIMAL
    assert ref_x is not None
    assert mine.objective == pytest.approx(ref_obj, abs=1e-7)
    assert mine.dual_objective == pytest.approx(mine.objective, rel=1e-6, abs=1e-9)
