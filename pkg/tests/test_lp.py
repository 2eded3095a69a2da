import numpy as np
import pytest
from scipy.optimize import linprog

from tracklim.errors import NumericalFailure, ValidationError
from tracklim.lp import (
    FEAS_TOL,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    dual_bound,
    solve_lp,
)

METHODS = [("dantzig", "dual"), ("bland", "dual"), ("dantzig", "primal"), ("bland", "primal")]


def random_lp(rng, feasible=True):
    n = int(rng.integers(2, 50))
    m_ub = int(rng.integers(0, 30))
    m_eq = int(rng.integers(0, min(n, 10)))
    x0 = rng.uniform(-1, 1, n)
    lower = np.where(rng.random(n) < 0.2, -np.inf, x0 - rng.uniform(0, 2, n))
    upper = np.where(rng.random(n) < 0.2, np.inf, x0 + rng.uniform(0, 2, n))
    # keep the problem bounded: a box row on the free directions
    A_ub = rng.standard_normal((m_ub, n))
    b_ub = A_ub @ x0 + rng.uniform(0, 1, m_ub)
    A_eq = rng.standard_normal((m_eq, n))
    b_eq = A_eq @ x0
    A_ub = np.vstack([A_ub, np.eye(n), -np.eye(n)])
    b_ub = np.concatenate([b_ub, x0 + 5, -(x0 - 5)])
    c = rng.standard_normal(n)
    return LinearProgram(c, A_ub, b_ub, A_eq, b_eq, lower, upper)


def highs(lp):
    res = linprog(-lp.c, A_ub=lp.A_ub if lp.A_ub.size else None, b_ub=lp.b_ub if lp.b_ub.size else None,
                  A_eq=lp.A_eq if lp.A_eq.size else None, b_eq=lp.b_eq if lp.b_eq.size else None,
                  bounds=list(zip(lp.lower, lp.upper)), method="highs")
    return res


def test_trivial_examples():
    sol = solve_lp(LinearProgram([1.0], A_ub=[[1.0]], b_ub=[1.0]))
    assert sol.status == OPTIMAL and sol.x[0] == pytest.approx(1) and sol.value == pytest.approx(1)
    sol = solve_lp(LinearProgram([1.0], A_ub=[[-1.0], [1.0]], b_ub=[-2.0, 1.0]))
    assert sol.status == INFEASIBLE
    sol = solve_lp(LinearProgram([1.0, 1.0], A_ub=[[1.0, 1.0]], b_ub=[1.0]))
    assert sol.status == OPTIMAL and sol.value == pytest.approx(1)
    assert sol.x.sum() == pytest.approx(1) and np.all(sol.x >= -FEAS_TOL)


def test_unbounded():
    sol = solve_lp(LinearProgram([1.0, 0.0], A_ub=[[-1.0, 1.0]], b_ub=[1.0]))
    assert sol.status == UNBOUNDED
    sol = solve_lp(LinearProgram([1.0], lower=[-np.inf], upper=[np.inf]))
    assert sol.status == UNBOUNDED


def test_infeasible_equalities_and_bounds():
    sol = solve_lp(LinearProgram([0.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[3.0], upper=[1.0, 1.0]))
    assert sol.status == INFEASIBLE
    sol = solve_lp(LinearProgram([1.0], lower=[2.0], upper=[1.0]))
    assert sol.status == INFEASIBLE


def test_rejects_malformed_programs():
    with pytest.raises(ValidationError):
        LinearProgram([1.0, 2.0], A_ub=[[1.0]], b_ub=[1.0])
    with pytest.raises(ValidationError):
        LinearProgram([np.nan])


@pytest.mark.parametrize("rule, method", METHODS)
def test_matches_highs_on_random_programs(rule, method):
    rng = np.random.default_rng(7)
    for _ in range(60):
        lp = random_lp(rng)
        ref = highs(lp)
        sol = solve_lp(lp, pivot_rule=rule, method=method)
        assert ref.status == 0
        assert sol.status == OPTIMAL
        assert sol.value == pytest.approx(-ref.fun, rel=1e-8, abs=1e-8)


def test_weak_duality_on_100_random_programs():
    rng = np.random.default_rng(100)
    for _ in range(100):
        lp = random_lp(rng)
        sol = solve_lp(lp)
        assert sol.optimal
        bound = dual_bound(lp, sol.y_ub, sol.y_eq)
        assert sol.value <= bound + 1e-7 * (1 + abs(bound))
        assert bound - sol.value <= 1e-6 * (1 + abs(bound))
        assert sol.primal_residual <= FEAS_TOL
        assert sol.slackness_residual <= FEAS_TOL * 10


def test_multipliers_from_other_points_are_still_bounds():
    rng = np.random.default_rng(3)
    lp = random_lp(rng)
    sol = solve_lp(lp)
    y_ub = sol.y_ub + rng.uniform(0, 1, sol.y_ub.size)
    assert sol.value <= dual_bound(lp, y_ub, sol.y_eq) + 1e-9


def test_permutation_invariance():
    rng = np.random.default_rng(11)
    for _ in range(20):
        lp = random_lp(rng)
        n = lp.c.size
        cols = rng.permutation(n)
        ru = rng.permutation(lp.b_ub.size)
        re = rng.permutation(lp.b_eq.size)
        perm = LinearProgram(lp.c[cols], lp.A_ub[ru][:, cols], lp.b_ub[ru], lp.A_eq[re][:, cols],
                             lp.b_eq[re], lp.lower[cols], lp.upper[cols])
        assert solve_lp(perm).value == pytest.approx(solve_lp(lp).value, rel=1e-9, abs=1e-9)


def test_degenerate_program_terminates_with_bland():
    # classic cycling example (Beale) in maximization form
    c = np.array([0.75, -150.0, 0.02, -6.0])
    A = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    b = np.array([0.0, 0.0, 1.0])
    for rule in ("bland", "dantzig"):
        for method in ("dual", "primal"):
            sol = solve_lp(LinearProgram(c, A, b), pivot_rule=rule, method=method)
            assert sol.value == pytest.approx(0.05)


def test_iteration_guard_raises_with_trace():
    rng = np.random.default_rng(5)
    lp = random_lp(rng)
    with pytest.raises(NumericalFailure) as info:
        solve_lp(lp, max_iter=1)
    assert info.value.trace is not None


def test_large_box_program_is_fast():
    rng = np.random.default_rng(1)
    n = 4000
    A_eq = rng.standard_normal((6, n)) / n
    x0 = rng.uniform(-1, 1, n)
    lp = LinearProgram(np.zeros(n), A_eq=A_eq, b_eq=A_eq @ x0, lower=-np.ones(n), upper=np.ones(n))
    sol = solve_lp(lp)
    assert sol.optimal and np.max(np.abs(A_eq @ sol.x - A_eq @ x0)) <= 1e-9
