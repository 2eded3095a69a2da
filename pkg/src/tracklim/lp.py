"""Dense revised simplex for small linear programs.

Programs are stated as::

    maximize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lower <= x <= upper      (bounds may be infinite)

The solver is a bounded-variable revised simplex with an explicit basis
inverse, a two-phase start on artificial variables (no big-M), Dantzig
pricing and Bland's rule as the anti-cycling fallback.  Entering variables
whose own bound range is the binding ratio simply flip bounds without a basis
change, which keeps box-constrained programs with many columns cheap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalFailure, ValidationError

FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-11
_REFACTOR_EVERY = 64
_STALL_LIMIT = 30
_FLIP_CHUNK = 2048

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub, self.b_ub = self._rows(self.A_ub, self.b_ub, n, "ub")
        self.A_eq, self.b_eq = self._rows(self.A_eq, self.b_eq, n, "eq")
        self.lower = np.zeros(n) if self.lower is None else np.broadcast_to(
            np.asarray(self.lower, dtype=float), (n,)).copy()
        self.upper = np.full(n, np.inf) if self.upper is None else np.broadcast_to(
            np.asarray(self.upper, dtype=float), (n,)).copy()
        for arr in (self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq):
            if not np.all(np.isfinite(arr)):
                raise ValidationError("LP coefficients must be finite")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValidationError("LP bounds must not be NaN")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValidationError("LP bounds point the wrong way")

    @staticmethod
    def _rows(A, b, n, name):
        if A is None:
            return np.zeros((0, n)), np.zeros(0)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape != (b.size, n):
            raise ValidationError(f"A_{name} has shape {A.shape}, expected ({b.size}, {n})")
        return A, b

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass
class LpSolution:
    status: str
    x: Optional[np.ndarray] = None
    value: float = np.nan
    y_ub: Optional[np.ndarray] = None
    y_eq: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    iterations: int = 0
    primal_residual: float = np.nan
    slackness_residual: float = np.nan

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def dual_bound(lp: LinearProgram, y_ub, y_eq, tol: float = FEAS_TOL) -> float:
    """Upper bound on the LP optimum implied by row multipliers.

    Any ``y_ub >= 0`` and ``y_eq`` give ``max c@x <= b@y + sup_x (c - A^T y)@x``
    with the supremum over the bound box.  Multiplier signs and reduced
    costs on unbounded directions within ``tol`` of zero are rounded to zero.
    """
    y_ub = np.asarray(y_ub, dtype=float)
    y_eq = np.asarray(y_eq, dtype=float)
    if np.any(y_ub < -tol):
        return np.inf
    y_ub = np.maximum(y_ub, 0.0)
    d = lp.c - lp.A_ub.T @ y_ub - lp.A_eq.T @ y_eq
    d[np.abs(d) <= tol * (1.0 + np.abs(lp.c))] = 0.0
    total = lp.b_ub @ y_ub + lp.b_eq @ y_eq
    for dj, lo, hi in zip(d, lp.lower, lp.upper):
        if dj > 0:
            total += dj * hi if np.isfinite(hi) else np.inf
        elif dj < 0:
            total += dj * lo if np.isfinite(lo) else np.inf
    return float(total)


class _Simplex:
    """Bounded revised simplex on ``min cost@x, A@x = b, lo <= x <= hi``."""

    def __init__(self, A, b, lo, hi, rule, max_iter):
        self.A = A
        self.b = b
        self.lo = lo
        self.hi = hi
        self.m, self.n = A.shape
        self.rule = rule
        self.max_iter = max_iter
        self.iterations = 0
        self.trace = []

    def refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B) if self.m else np.zeros((0, 0))
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis", trace=self.trace[-20:]) from exc
        self.pivots_since_refactor = 0

    def basic_values(self):
        xn = self.x.copy()
        xn[self.basis] = 0.0
        return self.Binv @ (self.b - self.A @ xn)

    def run(self, cost, allowed):
        """Iterate to optimality; ``allowed`` masks columns that may enter."""
        rule = self.rule
        stall = 0
        best = np.inf
        is_basic = np.zeros(self.n, dtype=bool)
        while True:
            is_basic[:] = False
            is_basic[self.basis] = True
            xB = self.basic_values()
            self.x[self.basis] = xB
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.A
            obj = cost @ self.x
            if obj < best - 1e-12 * (1 + abs(best)):
                best = obj
                stall = 0
                rule = self.rule
            else:
                stall += 1
                if stall > _STALL_LIMIT:
                    rule = "bland"
            tol = FEAS_TOL * (1.0 + np.abs(cost).max()) if self.n else FEAS_TOL
            room_up = self.x < self.hi - FEAS_TOL
            room_dn = self.x > self.lo + FEAS_TOL
            cand = allowed & ~is_basic & (((d < -tol) & room_up) | ((d > tol) & room_dn))
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                return OPTIMAL, y, d
            if rule != "bland":
                idx = idx[np.argsort(-np.abs(d[idx]), kind="stable")]
            self._step(idx, d, y, rule)
            if self.status is not None:
                return self.status, y, d

    def _step(self, idx, d, y, rule):
        """Apply a run of bound flips, then one pivot, over candidates ``idx``."""
        self.status = None
        m = self.m
        xB = self.x[self.basis]
        loB = self.lo[self.basis]
        hiB = self.hi[self.basis]
        tolB = FEAS_TOL * (1.0 + np.abs(xB))
        for lo_k in range(0, idx.size, _FLIP_CHUNK):
            chunk = idx[lo_k:lo_k + _FLIP_CHUNK]
            dirs = np.where(d[chunk] > 0, -1.0, 1.0)
            span = self.hi[chunk] - self.lo[chunk]
            delta = -(self.Binv @ self.A[:, chunk]) * dirs  # x_B change per unit step
            finite = np.isfinite(span)
            stop = chunk.size if finite.all() else int(np.argmin(finite))
            if stop and m:
                path = xB[:, None] + np.cumsum(delta[:, :stop] * span[:stop], axis=1)
                bad = (path < (loB - tolB)[:, None]) | (path > (hiB + tolB)[:, None])
                col_bad = bad.any(axis=0)
                if col_bad.any():
                    stop = int(np.argmax(col_bad))
            if stop:
                flips = chunk[:stop]
                self.x[flips] = np.where(dirs[:stop] > 0, self.hi[flips], self.lo[flips])
                if m:
                    xB = xB + delta[:, :stop] @ span[:stop]
                    self.x[self.basis] = xB
                self.iterations += stop
            if stop < chunk.size:
                j = chunk[stop]
                self._ratio_pivot(j, dirs[stop], delta[:, stop], xB, loB, hiB, rule)
                return
        # every candidate flipped; prices unchanged
        if self.iterations > self.max_iter:
            raise NumericalFailure(
                f"simplex iteration limit {self.max_iter} exceeded", trace=self.trace[-50:])

    def _ratio_pivot(self, j, direction, delta, xB, loB, hiB, rule):
        self.iterations += 1
        if self.iterations > self.max_iter:
            raise NumericalFailure(
                f"simplex iteration limit {self.max_iter} exceeded", trace=self.trace[-50:])
        ratios = np.full(self.m, np.inf)
        dec = delta < -_PIVOT_TOL
        inc = delta > _PIVOT_TOL
        ratios[dec] = np.maximum(xB[dec] - loB[dec], 0.0) / -delta[dec]
        ratios[inc] = np.maximum(hiB[inc] - xB[inc], 0.0) / delta[inc]
        theta_b = ratios.min() if self.m else np.inf
        theta_f = self.hi[j] - self.lo[j]
        if not np.isfinite(theta_b) and not np.isfinite(theta_f):
            self.status = UNBOUNDED
            return
        if theta_f <= theta_b:
            self.x[j] = self.hi[j] if direction > 0 else self.lo[j]
            self.x[self.basis] = xB + theta_f * delta
            return
        ties = np.flatnonzero(ratios <= theta_b + 1e-12 * (1.0 + theta_b))
        if rule == "bland":
            r = ties[np.argmin(self.basis[ties])]
        else:
            r = ties[np.argmax(np.abs(delta[ties]))]
        alpha = -direction * delta
        self._pivot(j, r, theta_b, direction, delta, alpha)

    def _replace(self, r, q, alpha_q):
        """Basis change only: column ``q`` replaces the variable in row ``r``."""
        piv = alpha_q[r]
        if abs(piv) < _PIVOT_TOL:
            raise NumericalFailure("pivot element too small", trace=self.trace[-20:])
        self.trace.append((self.iterations, int(q), int(self.basis[r]), 0.0))
        self.basis[r] = q
        row = self.Binv[r] / piv
        self.Binv -= np.outer(alpha_q, row)
        self.Binv[r] = row
        self.pivots_since_refactor += 1
        if self.pivots_since_refactor >= _REFACTOR_EVERY:
            self.refactor()

    def _verdict(self, ok, at_lo, at_hi, abar, cand=None):
        """INFEASIBLE unless a temporary bound blocks the infeasible row."""
        art_lo = getattr(self, "art_lo", None)
        if art_lo is None:
            return INFEASIBLE
        art_hi = self.art_hi
        if cand is not None and (art_lo[cand] | art_hi[cand]).any():
            return "blocked"
        past = ok & ((at_lo & art_lo & (abar > _PIVOT_TOL)) | (at_hi & art_hi & (abar < -_PIVOT_TOL)))
        return "blocked" if past.any() else INFEASIBLE

    def dual_run(self, cost, allowed):
        """Dual simplex with a bound-flipping ratio test.

        Requires a dual feasible start: every nonbasic variable sits at the
        bound its reduced cost favours.  Returns OPTIMAL once the basic
        solution is primal feasible, INFEASIBLE when a row admits no entering
        column.
        """
        stall = 0
        best = -np.inf
        is_basic = np.zeros(self.n, dtype=bool)
        movable = self.hi > self.lo
        while True:
            is_basic[:] = False
            is_basic[self.basis] = True
            xB = self.basic_values()
            self.x[self.basis] = xB
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.A
            loB = self.lo[self.basis]
            hiB = self.hi[self.basis]
            tolB = FEAS_TOL * (1.0 + np.abs(xB))
            below = loB - xB
            above = xB - hiB
            infeas = np.maximum(below, above)
            infeas[infeas <= tolB] = 0.0
            if not infeas.any():
                return OPTIMAL
            obj = cost @ self.x
            if obj > best + 1e-12 * (1.0 + abs(best)):
                best = obj
                stall = 0
            else:
                stall += 1
            bland = self.rule == "bland" or stall > _STALL_LIMIT
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise NumericalFailure(
                    f"dual simplex iteration limit {self.max_iter} exceeded", trace=self.trace[-50:])
            rows = np.flatnonzero(infeas > 0)
            r = rows[np.argmin(self.basis[rows])] if bland else int(np.argmax(infeas))
            s = 1.0 if below[r] > above[r] else -1.0
            slope = infeas[r]
            abar = s * (self.Binv[r] @ self.A)
            at_lo = self.x <= self.lo + FEAS_TOL
            at_hi = self.x >= self.hi - FEAS_TOL
            ok = ~is_basic & allowed & movable
            up = ok & at_lo & (abar < -_PIVOT_TOL)
            dn = ok & at_hi & (abar > _PIVOT_TOL) & ~up
            cand = np.flatnonzero(up | dn)
            if cand.size == 0:
                return self._verdict(ok, at_lo, at_hi, abar)
            dj = np.where(up[cand], np.maximum(d[cand], 0.0), np.maximum(-d[cand], 0.0))
            mag = np.abs(abar[cand])
            ratio = dj / mag
            if bland:
                order = np.lexsort((cand, ratio))
            else:
                order = np.lexsort((-mag, ratio))
            span = (self.hi - self.lo)[cand[order]]
            drop = mag[order] * span
            rem = slope - np.cumsum(drop)
            hit = np.flatnonzero(~(rem > 0))
            if hit.size == 0:
                return self._verdict(ok, at_lo, at_hi, abar, cand)
            k = int(hit[0])
            flips = cand[order[:k]]
            if flips.size:
                self.x[flips] = np.where(up[flips], self.hi[flips], self.lo[flips])
            q = int(cand[order[k]])
            alpha_q = self.Binv @ self.A[:, q]
            leaving = self.basis[r]
            self._replace(r, q, alpha_q)
            self.x[leaving] = self.lo[leaving] if s > 0 else self.hi[leaving]


    def _pivot(self, j, r, theta, direction, delta, alpha):
        leaving = self.basis[r]
        xB = self.x[self.basis] + theta * delta
        self.x[self.basis] = xB
        self.x[j] = self.x[j] + direction * theta
        # leaving variable sits exactly on the bound it reached
        self.x[leaving] = self.lo[leaving] if delta[r] < 0 else self.hi[leaving]
        self.trace.append((self.iterations, int(j), int(leaving), float(theta)))
        self.basis[r] = j
        piv = alpha[r]
        if abs(piv) < _PIVOT_TOL:
            raise NumericalFailure("pivot element too small", trace=self.trace[-20:])
        row = self.Binv[r] / piv
        self.Binv -= np.outer(alpha, row)
        self.Binv[r] = row
        self.pivots_since_refactor += 1
        if self.pivots_since_refactor >= _REFACTOR_EVERY:
            self.refactor()


def _standard_form(lp: LinearProgram):
    """Rows ``[A_ub I 0; A_eq 0 I] x = b`` with equilibrated rows.

    Slacks of inequality rows live in ``[0, inf)``; the logical columns of
    equality rows are fixed at zero and give an identity starting basis.
    """
    n = lp.n_vars
    m1, m2 = lp.b_ub.size, lp.b_eq.size
    m = m1 + m2
    A = np.zeros((m, n + m))
    A[:m1, :n] = lp.A_ub
    A[m1:, :n] = lp.A_eq
    A[:, n:] = np.eye(m)
    b = np.concatenate([lp.b_ub, lp.b_eq])
    scale = np.abs(A[:, :n]).max(axis=1) if n and m else np.ones(m)
    scale[scale == 0] = 1.0
    A /= scale[:, None]
    b = b / scale
    lo = np.concatenate([lp.lower, np.zeros(m)])
    hi = np.concatenate([lp.upper, np.full(m1, np.inf), np.zeros(m2)])
    cost = np.concatenate([-lp.c, np.zeros(m)])
    return A, b, lo, hi, cost, scale


def _dual_start(A, b, lo, hi, cost, rule, max_iter):
    """Slack basis, nonbasics on their cost-favoured bound.

    Where that bound is infinite a temporary box of width ``big`` is used; the
    returned mask marks those entries so the caller can lift them later.
    """
    m, ntot = A.shape
    n = ntot - m
    scale = max(1.0, np.abs(b).max(initial=0.0),
                np.abs(lo[np.isfinite(lo)]).max(initial=0.0),
                np.abs(hi[np.isfinite(hi)]).max(initial=0.0))
    big = 1e6 * scale
    lo_w, hi_w = lo.copy(), hi.copy()
    x = np.zeros(ntot)
    art_lo = np.zeros(ntot, dtype=bool)
    art_hi = np.zeros(ntot, dtype=bool)
    sx = _Simplex(A, b, lo_w, hi_w, rule, max_iter)
    sx.basis = np.arange(n, ntot)
    sx.refactor()
    # crash: free columns enter the basis first; a basic free variable is
    # never primal infeasible, so it never needs a temporary bound
    free = np.flatnonzero(~np.isfinite(lo[:n]) & ~np.isfinite(hi[:n]))
    taken = np.zeros(m, dtype=bool)
    for j in free:
        alpha = sx.Binv @ A[:, j]
        mag = np.where(taken | (sx.basis < n), 0.0, np.abs(alpha))
        if mag.size == 0 or mag.max() <= 1e-9:
            continue
        r = int(np.argmax(mag))
        sx._replace(r, j, alpha)
        taken[r] = True
    is_basic = np.zeros(ntot, dtype=bool)
    is_basic[sx.basis] = True
    y = cost[sx.basis] @ sx.Binv
    d = cost - y @ A
    for j in range(ntot):
        if is_basic[j]:
            continue
        c = d[j] if abs(d[j]) > FEAS_TOL * (1.0 + abs(cost[j])) else 0.0
        if c > 0 or (c == 0 and np.isfinite(lo[j])):
            if not np.isfinite(lo[j]):
                lo_w[j] = (hi[j] if np.isfinite(hi[j]) else 0.0) - big
                art_lo[j] = True
            x[j] = lo_w[j]
        elif c < 0 or np.isfinite(hi[j]):
            if not np.isfinite(hi[j]):
                hi_w[j] = (lo[j] if np.isfinite(lo[j]) else 0.0) + big
                art_hi[j] = True
            x[j] = hi_w[j]
        else:
            # free with zero cost: a symmetric temporary box around 0
            lo_w[j], hi_w[j] = -big, big
            art_lo[j] = art_hi[j] = True
            x[j] = -big
    sx.x = x
    return sx, art_lo, art_hi


def _primal_two_phase(A, b, lo, hi, cost, rule, max_iter, feas_tol):
    """Two-phase bounded primal simplex; returns the solver or None if infeasible."""
    m, ntot = A.shape
    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    resid = b - A @ x
    sgn = np.where(resid >= 0, 1.0, -1.0)
    Afull = np.hstack([A, np.diag(sgn)])
    lo_f = np.concatenate([lo, np.zeros(m)])
    hi_f = np.concatenate([hi, np.full(m, np.inf)])
    sx = _Simplex(Afull, b, lo_f, hi_f, rule, max_iter)
    sx.x = np.concatenate([x, np.abs(resid)])
    sx.basis = np.arange(ntot, ntot + m)
    sx.refactor()
    art = np.zeros(ntot + m, dtype=bool)
    art[ntot:] = True
    sx.run(art.astype(float), ~art)
    if float(sx.x[art].sum()) > feas_tol * max(1.0, np.abs(b).max(initial=0.0)):
        return None
    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if not art[sx.basis[r]]:
            continue
        row = sx.Binv[r] @ Afull
        basic = np.zeros(ntot + m, dtype=bool)
        basic[sx.basis] = True
        cands = np.flatnonzero(~art & ~basic & (np.abs(row) > 1e-9))
        if cands.size:
            j = cands[np.argmax(np.abs(row[cands]))]
            sx._replace(r, j, sx.Binv @ Afull[:, j])
    sx.hi[art] = 0.0
    sx.x[art] = 0.0
    sx.refactor()
    sx.cost = np.concatenate([cost, np.zeros(m)])
    sx.allowed = ~art
    return sx


def solve_lp(lp: LinearProgram, pivot_rule: str = "dantzig", method: str = "dual",
             max_iter: Optional[int] = None, feas_tol: float = FEAS_TOL) -> LpSolution:
    """Solve ``lp`` (a maximization).

    ``method="dual"`` (default) runs the bound-flipping dual simplex from the
    slack basis and finishes with primal simplex passes; any doubt about an
    infeasibility verdict that leaned on temporary bounds falls back to the
    two-phase primal method, which ``method="primal"`` selects directly.
    ``pivot_rule`` is ``"dantzig"`` (Bland's rule after a run of
    non-improving iterations) or ``"bland"`` throughout.
    """
    if pivot_rule not in ("dantzig", "bland"):
        raise ValidationError(f"unknown pivot rule {pivot_rule!r}")
    if method not in ("dual", "primal"):
        raise ValidationError(f"unknown method {method!r}")
    if np.any(lp.lower > lp.upper):
        return LpSolution(INFEASIBLE)
    n = lp.n_vars
    A, b, lo, hi, cost, scale = _standard_form(lp)
    m, ntot = A.shape
    if max_iter is None:
        max_iter = 50 * (ntot + m) + 20_000

    sx = None
    if method == "dual":
        sx, art_lo, art_hi = _dual_start(A, b, lo, hi, cost, pivot_rule, max_iter)
        allowed = np.ones(ntot, dtype=bool)
        sx.art_lo, sx.art_hi = art_lo, art_hi
        try:
            verdict = sx.dual_run(cost, allowed)
        except NumericalFailure:
            verdict = None
        if verdict == INFEASIBLE:
            return LpSolution(INFEASIBLE, iterations=sx.iterations)
        if verdict == OPTIMAL:
            sx.lo[:] = lo
            sx.hi[:] = hi
            sx.cost, sx.allowed = cost, allowed
        else:
            used = sx.iterations
            sx = None
    if sx is None:
        sx = _primal_two_phase(A, b, lo, hi, cost, pivot_rule, max_iter, feas_tol)
        if sx is None:
            return LpSolution(INFEASIBLE)
    status, y, d = sx.run(sx.cost, sx.allowed)
    xs = sx.x[:n].copy()
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, x=xs, value=np.inf, iterations=sx.iterations)
    # back to the maximization convention and unscaled rows
    m1 = lp.b_ub.size
    y_rows = -y[:m] / scale if m else np.zeros(0)
    y_ub, y_eq = y_rows[:m1], y_rows[m1:]
    red = lp.c - lp.A_ub.T @ y_ub - lp.A_eq.T @ y_eq
    value = float(lp.c @ xs)
    pres = max(
        float(np.max(lp.A_ub @ xs - lp.b_ub, initial=0.0)),
        float(np.max(np.abs(lp.A_eq @ xs - lp.b_eq), initial=0.0)),
        float(np.max(lp.lower - xs, initial=0.0)),
        float(np.max(xs - lp.upper, initial=0.0)),
    )
    slack = y_ub * (lp.b_ub - lp.A_ub @ xs)
    at_lo = np.isclose(xs, lp.lower, atol=feas_tol, rtol=0)
    at_hi = np.isclose(xs, lp.upper, atol=feas_tol, rtol=0)
    bad_red = np.where((red > 0) & ~at_hi, red, 0.0) - np.where((red < 0) & ~at_lo, red, 0.0)
    sres = max(float(np.max(np.abs(slack), initial=0.0)),
               float(np.max(np.abs(bad_red) * np.minimum(1.0, np.abs(xs) + 1.0), initial=0.0)))
    return LpSolution(OPTIMAL, x=xs, value=value, y_ub=y_ub, y_eq=y_eq, reduced_costs=red,
                      iterations=sx.iterations, primal_residual=pres, slackness_residual=sres)
