"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``AC<n> PASS|FAIL`` line with the numbers it judged.
Run directly (``python3 tests/test_acceptance.py``) for a summary table.
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

sys.path.insert(0, str(Path(__file__).parent))
from conftest import make_problem  # noqa: E402

from tracklim.analytic import check_inequality_chain  # noqa: E402
from tracklim.dual import ALL_CRITERIA, reduce_by_gamma, solve_dual  # noqa: E402
from tracklim.lp import LinearProgram, dual_bound, solve_lp  # noqa: E402
from tracklim.primal import GridSignal, fl_identity, solve_primal  # noqa: E402
from tracklim.problem import Envelope  # noqa: E402
from tracklim.ratfun import Poly, mode_mass, poly_roots  # noqa: E402

H1 = ([-2, 1], [-1, 1])
H05 = ([-3, 1], [-1, 1])
US_PLANT = ([-1, 1], [-2, 1])
AC4_PLANT = (np.polynomial.polynomial.polyfromroots([2, 0.5 + 5j, 0.5 - 5j]).real,
             np.polynomial.polynomial.polyfromroots([1, -4, -5]).real)
PAIR = ([1], [5, -2, 1])
TRIVIAL = ([1], [1, 1])


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            print(f"\n{tag} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


def test_ac1_first_order_h1(report):
    pd = make_problem(*H1)
    targets = {"OS": (1.0, 0.005), "MA": (2.0, 0.01), "FL": (2.0, 0.01), "POS": (1.0, 0.005)}
    got, times = {}, {}
    for crit in targets:
        t0 = time.perf_counter()
        got[crit] = solve_dual(pd, crit).value
        times[crit] = time.perf_counter() - t0
    ok = all(within(got[c], *targets[c]) for c in targets) and max(times.values()) <= 10.0
    detail = ", ".join(f"{c}={got[c]:.7f} ({times[c]:.2f}s)" for c in targets)
    assert report("AC1", ok, detail)


def test_ac2_first_order_h05(report):
    pd = make_problem(*H05)
    targets = {"OS": 0.5, "MA": 4 / 3, "FL": 1.2990381}
    got = {c: solve_dual(pd, c).value for c in targets}
    ok = all(within(got[c], targets[c], 0.01) for c in targets)
    assert report("AC2", ok, ", ".join(f"{c}={got[c]:.7f} (target {targets[c]:.7f})" for c in targets))


def test_ac3_undershoot(report):
    v = solve_dual(make_problem(*US_PLANT), "US").value
    assert report("AC3", within(v, 1.0, 0.01), f"US={v:.7f} (target 1)")


def test_ac4_equivalence_class(report):
    pd = make_problem(*AC4_PLANT)
    full = solve_dual(pd, "OS").value
    reduced = solve_dual(reduce_by_gamma(pd), "OS").value
    ok = within(full, 1.0, 0.01) and within(reduced, 1.0, 0.01)
    assert report("AC4", ok, f"OS={full:.7f} without reduction, {reduced:.7f} with reduction")


def test_ac5_rise_time_constraint(report):
    pd = make_problem(*PAIR)
    dual = solve_dual(pd, "OS").value
    res = solve_primal(pd, "OS", Envelope(1.0, -0.1, 2.0))
    ok = dual == 0.0 and res.value <= 0.05 and res.signal.grid.size <= 4096 + 8
    assert report("AC5", ok, f"unconstrained OS dual={dual!r}, constrained primal OS={res.value:.3g} "
                             f"on {res.signal.grid.size} nodes")


def test_ac6_sandwich(report):
    lines, ok = [], True
    for name, plant in (("h=1", H1), ("h=0.5", H05)):
        pd = make_problem(*plant)
        for crit in ("MA", "OS", "POS"):
            d = solve_dual(pd, crit).value
            p = solve_primal(pd, crit).value
            gap = p - d
            ok &= gap >= -1e-6 and gap <= 0.02 * d
            lines.append(f"{name} {crit} gap={gap:.2e} ({100 * gap / d:.3f}%)")
    assert report("AC6", ok, "; ".join(lines))


def test_ac7_inequality_chain(report):
    lines, ok = [], True
    for name, plant in (("h=1", H1), ("h=0.5", H05), ("pair", PAIR), ("trivial", TRIVIAL)):
        pd = make_problem(*plant)
        for which, solve in (("dual", solve_dual), ("primal", solve_primal)):
            vals = {c: solve(pd, c).value for c in ("MA", "POS", "OS", "FL")}
            bad = check_inequality_chain(vals, tol=0.02 * max(vals.values()))
            ok &= not bad
            lines.append(f"{name}/{which}: {'ok' if not bad else bad}")
    assert report("AC7", ok, "; ".join(lines))


def test_ac8_fluctuation_initial_value_bound(report):
    pd = make_problem(*PAIR)
    d = solve_dual(pd, "FL")
    p = solve_primal(pd, "FL").value
    ok = d.value >= 0.5 and p >= d.value
    assert report("AC8", ok, f"alpha={pd.alpha}, FL dual={d.value:.7f} (corrected={d.corrected}), "
                             f"FL primal={p:.7f}")


def test_ac9_trivial_problem(report):
    # as stated: 1/(s+1) tracking a step should give five zero values
    pd = make_problem(*TRIVIAL)
    res = {c.value: solve_dual(pd, c) for c in ALL_CRITERIA}
    vals = {c: r.value for c, r in res.items()}
    ok = all(v == 0.0 for v in vals.values()) and all(r.coeffs.size == 0 for r in res.values())
    detail = ", ".join(f"{c}={v:g}" for c, v in vals.items())
    assert report("AC9", ok, f"{detail} (closure {pd.closure}, e(0)={pd.alpha})")


def test_ac9_supplement_trivial_without_initial_jump(report):
    # (s+2)/(s+1): stable, minimum phase, biproper, so e(0) is free
    pd = make_problem([2, 1], [1, 1])
    res = {c.value: solve_dual(pd, c) for c in ALL_CRITERIA}
    prim = {c.value: solve_primal(pd, c).value for c in ALL_CRITERIA}
    ok = (all(r.value == 0.0 and r.coeffs.size == 0 for r in res.values())
          and all(v == 0.0 for v in prim.values()))
    assert report("AC9-supplement", ok, f"dual {[r.value for r in res.values()]}, "
                                        f"primal {list(prim.values())}")


def test_ac10_property_suites(report):
    rng = np.random.default_rng(10)
    # polynomial roots
    worst_root = 0.0
    for _ in range(200):
        deg = int(rng.integers(1, 9))
        coeffs = rng.standard_normal(deg + 1)
        found = [r for r, m in poly_roots(Poly(coeffs)) for _ in range(m)]
        rebuilt = coeffs[-1] * np.real(np.polynomial.polynomial.polyfromroots(found))
        worst_root = max(worst_root, np.max(np.abs(rebuilt - coeffs)) / np.max(np.abs(coeffs)))
    # mode masses
    worst_mass = 0.0
    for x in (0.5, 1.0, 3.0):
        for y in (0.0, 1.0, 5.0):
            for kind, f in (("cos", np.cos), ("sin", np.sin)):
                q, _ = quad(lambda t: np.exp(-x * t) * f(y * t), 0, 40 / x, limit=400,
                            epsabs=1e-13, epsrel=1e-13)
                worst_mass = max(worst_mass, abs(mode_mass(x, y, kind) - q) if y or kind == "cos" else 0)
    # right-hand sides against quadrature of <w, mode>
    worst_b = 0.0
    for plant, ref in ((AC4_PLANT, ([1], [0, 1])), (H1, ([1], [0, 0, 1]))):
        pd = make_problem(*plant, ref=ref)
        u = [m for m in pd.modes if m.subspace == "U"]
        T = 40 / min(m.x for m in u)
        for m, b in zip(u, pd.b_vec):
            f = np.cos if m.kind == "cos" else np.sin
            q, _ = quad(lambda t: pd.w(t) * np.exp(-m.x * t) * f(m.y * t), 0, T, limit=2000,
                        epsabs=1e-12, epsrel=1e-12)
            worst_b = max(worst_b, abs(b - q))
    # fluctuation identity
    worst_fl = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 60))
        s = GridSignal(np.arange(n, dtype=float), rng.standard_normal(n) * 10 ** rng.uniform(-3, 3))
        a, b = fl_identity(s)
        worst_fl = max(worst_fl, abs(a - b))
    # weak duality
    duality_ok = 0
    for _ in range(100):
        n = int(rng.integers(2, 51))
        m = int(rng.integers(1, 30))
        A = rng.standard_normal((m, n))
        x0 = rng.uniform(0, 1, n)
        lp = LinearProgram(rng.standard_normal(n), A, A @ x0 + rng.uniform(0, 1, m),
                           lower=np.zeros(n), upper=np.full(n, 5.0))
        sol = solve_lp(lp)
        bound = dual_bound(lp, sol.y_ub, sol.y_eq)
        duality_ok += sol.optimal and sol.value <= bound + 1e-9 * (1 + abs(bound))
    ok = (worst_root <= 1e-8 and worst_mass <= 1e-8 and worst_b <= 1e-6 and worst_fl <= 1e-12
          and duality_ok == 100)
    assert report("AC10", ok, f"roots {worst_root:.1e}, masses {worst_mass:.1e}, b_vec {worst_b:.1e}, "
                              f"FL identity {worst_fl:.1e}, weak duality {duality_ok}/100")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
