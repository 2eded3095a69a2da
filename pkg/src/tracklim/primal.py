"""Discretized primal problems: achievable upper bounds.

The error signal is restricted to continuous piecewise-linear functions on
``[0, T]`` that vanish from ``T`` on.  Interpolation constraints are the
exact moments of such a signal against the modes, so every returned signal
is a genuine member of the feasible set (up to LP round-off) and its cost is
an upper bound on the optimal value.

Each criterion is minimized by bisection on its level ``L``: for a fixed
level the cost and envelope conditions are simple variable bounds, leaving a
feasibility program with one row per mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .dual import Criterion
from .errors import InfeasibleProblemError, ReferenceSignError, ValidationError, EnvelopeError
from .lp import LinearProgram, solve_lp
from .problem import C0_ALPHA, Envelope, Mode, ProblemData
from .ratfun import time_eval


@dataclass(frozen=True)
class PrimalOptions:
    n_nodes: int = 1024
    max_nodes: int = 4096
    tol: float = 1e-3           # relative value change between grid doublings
    horizon: Optional[float] = None
    max_extend: int = 2
    bisect_tol: float = 1e-7
    pivot_rule: str = "dantzig"


@dataclass(frozen=True)
class GridSignal:
    """Continuous piecewise-linear signal on ``grid``, zero past its end."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValidationError("signal grid must be strictly increasing with >= 2 points")
        if values.shape != grid.shape:
            raise ValidationError("signal values must match the grid")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.grid, self.values)
        return np.where(t > self.grid[-1], 0.0, out)


@dataclass
class PrimalResult:
    value: float
    signal: GridSignal
    moment_residual: float
    criterion: Criterion
    level: float = np.nan
    horizon: float = np.nan
    history: tuple = ()
    converged: bool = True
    fl_shift_value: float = np.nan

    def to_dict(self):
        return {
            "criterion": self.criterion.value,
            "value": self.value,
            "moment_residual": self.moment_residual,
            "nodes": int(self.signal.grid.size),
            "horizon": self.horizon,
            "history": list(self.history),
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# moment rows


def _hat_integrals(mu):
    """``I0 = int_0^1 e^{-mu u} du`` and ``I1 = int_0^1 u e^{-mu u} du``."""
    mu = np.asarray(mu, dtype=complex)
    I0 = np.empty_like(mu)
    I1 = np.empty_like(mu)
    small = np.abs(mu) < 0.5
    m = mu[small]
    if m.size:
        # series: I0 = sum (-mu)^j/(j+1)!, I1 = sum (-mu)^j/(j! (j+2))
        s0 = np.zeros_like(m)
        s1 = np.zeros_like(m)
        term = np.ones_like(m)  # (-mu)^j / j!
        for j in range(25):
            s0 += term / (j + 1)
            s1 += term / (j + 2)
            term = term * (-m) / (j + 1)
        I0[small] = s0
        I1[small] = s1
    m = mu[~small]
    if m.size:
        em = np.exp(-m)
        I0[~small] = -np.expm1(-m) / m
        I1[~small] = (1.0 - (1.0 + m) * em) / (m * m)
    return I0, I1


def moment_row(mode: Mode, grid) -> np.ndarray:
    """Row ``r`` with ``r @ e = int_0^T e(t) mode(t) dt`` for piecewise-linear ``e``."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be strictly increasing with >= 2 points")
    lam = complex(mode.x, -mode.y)
    h = np.diff(grid)
    I0, I1 = _hat_integrals(lam * h)
    start = np.exp(-lam * grid[:-1]) * h
    right = start * I1          # weight of the right node of each segment
    left = start * (I0 - I1)    # weight of the left node
    row = np.zeros(grid.size, dtype=complex)
    row[:-1] += left
    row[1:] += right
    return row.real if mode.kind == "cos" else row.imag


def moment_matrix(modes, grid) -> np.ndarray:
    if not modes:
        return np.zeros((0, np.asarray(grid).size))
    return np.vstack([moment_row(m, grid) for m in modes])


# ---------------------------------------------------------------------------
# costs


def _fl_by_shift(values) -> float:
    """``min_xi max_k |e_k - xi|`` by ternary search on the convex objective."""
    lo, hi = float(np.min(values)), float(np.max(values))
    f = lambda xi: float(np.max(np.abs(values - xi)))
    for _ in range(200):
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi)):
            break
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        if f(a) <= f(b):
            hi = b
        else:
            lo = a
    return f(0.5 * (lo + hi))


def _us_sup(signal: GridSignal, w_terms, sub: int = 16) -> float:
    """sup_t (e(t) - w(t)) over the signal support, by subdivision and polish."""
    g = signal.grid
    frac = np.arange(sub) / sub
    ts = np.append((g[:-1, None] + np.diff(g)[:, None] * frac[None, :]).ravel(), g[-1])
    diff = signal(ts) - time_eval(w_terms, ts)
    k = int(np.argmax(diff))
    best = float(diff[k])
    a, b = ts[max(k - 1, 0)], ts[min(k + 1, ts.size - 1)]
    if b > a:
        res = minimize_scalar(lambda t: -(float(signal(t)) - float(time_eval(w_terms, t))),
                              bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def evaluate_cost(signal: GridSignal, crit, w_terms=None) -> float:
    """Exact cost of a piecewise-linear signal (zero past its grid)."""
    crit = Criterion.parse(crit)
    e = np.append(signal.values, 0.0)
    if crit is Criterion.MA:
        return float(np.max(np.abs(e)))
    if crit is Criterion.POS:
        return max(0.0, float(np.max(e)))
    if crit is Criterion.OS:
        return max(0.0, float(np.max(-e)))
    if crit is Criterion.FL:
        return 0.5 * (float(np.max(e)) - float(np.min(e)))
    if w_terms is None:
        raise ValidationError("undershoot cost needs the reference")
    return max(0.0, _us_sup(signal, w_terms))


def fl_identity(signal: GridSignal):
    """Fluctuation by the peak-to-peak formula and by the best constant shift."""
    e = np.append(signal.values, 0.0)
    return 0.5 * (float(np.max(e)) - float(np.min(e))), _fl_by_shift(e)


# ---------------------------------------------------------------------------
# solver


def primal_grid(horizon: float, n_nodes: int, envelope: Optional[Envelope] = None) -> np.ndarray:
    grid = np.linspace(0.0, horizon, n_nodes)
    if envelope is not None:
        extra = envelope.breakpoints()
        grid = np.union1d(grid, extra[extra < horizon])
        # drop near-duplicates created by the union
        keep = np.r_[True, np.diff(grid) > 1e-12 * horizon]
        grid = grid[keep]
    return grid


class _Feasibility:
    """Level-L feasibility programs for one grid."""

    def __init__(self, pd: ProblemData, crit: Criterion, grid, envelope, pivot_rule):
        self.pd = pd
        self.crit = crit
        self.grid = grid
        self.R = moment_matrix(pd.modes, grid)
        self.rhs = pd.rhs()
        N = grid.size
        self.env_lo = np.full(N, -np.inf)
        self.env_hi = np.full(N, np.inf)
        if envelope is not None:
            inside = grid <= envelope.t_bar
            self.env_lo[inside] = envelope.lower_at(grid[inside])
            self.env_hi[inside] = envelope.upper_at(grid[inside])
        self.fixed = {N - 1: 0.0}
        e0 = pd.boundary_value()
        if e0 is not None:
            self.fixed[0] = float(e0)
        self.w = time_eval(pd.w_terms, grid) if crit is Criterion.US else None
        self.pivot_rule = pivot_rule

    def _box(self, L):
        N = self.grid.size
        crit = self.crit
        lo = np.full(N, -np.inf)
        hi = np.full(N, np.inf)
        if crit in (Criterion.MA, Criterion.OS):
            lo[:] = -L
        if crit in (Criterion.MA, Criterion.POS):
            hi[:] = L
        if crit is Criterion.US:
            hi = self.w + L
        return lo, hi

    def solve(self, L):
        """A feasible node vector at level ``L`` or None."""
        if self.crit is Criterion.FL:
            return self._solve_fl(L)
        lo, hi = self._box(L)
        lo = np.maximum(lo, self.env_lo)
        hi = np.minimum(hi, self.env_hi)
        for k, v in self.fixed.items():
            if not lo[k] - 1e-12 <= v <= hi[k] + 1e-12:
                return None
            lo[k] = hi[k] = v
        if np.any(lo > hi):
            return None
        N = self.grid.size
        if self.R.shape[0] == 0:
            return np.clip(np.zeros(N), lo, hi)
        sol = solve_lp(LinearProgram(np.zeros(N), A_eq=self.R, b_eq=self.rhs, lower=lo, upper=hi),
                       pivot_rule=self.pivot_rule)
        return sol.x if sol.optimal else None

    def _solve_fl(self, L):
        # e_k = d_k + xi with |d_k| <= L; variables (d, xi)
        N = self.grid.size
        A_eq = [np.hstack([self.R, self.R.sum(axis=1)[:, None]])] if self.R.size else []
        b_eq = [self.rhs] if self.R.size else []
        for k, v in self.fixed.items():
            row = np.zeros((1, N + 1))
            row[0, k] = row[0, N] = 1.0
            A_eq.append(row)
            b_eq.append([v])
        A_ub, b_ub = [], []
        for k in np.flatnonzero(np.isfinite(self.env_hi)):
            row = np.zeros(N + 1)
            row[k] = row[N] = 1.0
            A_ub.append(row)
            b_ub.append(self.env_hi[k])
        for k in np.flatnonzero(np.isfinite(self.env_lo)):
            row = np.zeros(N + 1)
            row[k] = row[N] = -1.0
            A_ub.append(row)
            b_ub.append(-self.env_lo[k])
        lp = LinearProgram(
            np.zeros(N + 1),
            A_ub=np.array(A_ub) if A_ub else None, b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.vstack(A_eq), b_eq=np.concatenate([np.ravel(b) for b in b_eq]),
            lower=np.r_[np.full(N, -L), -np.inf], upper=np.r_[np.full(N, L), np.inf])
        sol = solve_lp(lp, pivot_rule=self.pivot_rule)
        if not sol.optimal:
            return None
        return sol.x[:N] + sol.x[N]


def _bisect(feas: _Feasibility, bisect_tol: float):
    """Smallest feasible level (to tolerance) and its signal values."""
    x0 = feas.solve(0.0)
    if x0 is not None:
        return 0.0, x0
    hi = 1.0
    x_hi = feas.solve(hi)
    lo = 0.0
    doublings = 0
    while x_hi is None:
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > 60:
            return None, None
        x_hi = feas.solve(hi)
    while hi - lo > bisect_tol * max(hi, 1e-12):
        mid = 0.5 * (lo + hi)
        x = feas.solve(mid)
        if x is None:
            lo = mid
        else:
            hi, x_hi = mid, x
    return hi, x_hi


def _solve_on(pd, crit, horizon, n_nodes, envelope, opts):
    grid = primal_grid(horizon, n_nodes, envelope)
    feas = _Feasibility(pd, crit, grid, envelope, opts.pivot_rule)
    level, x = _bisect(feas, opts.bisect_tol)
    if x is None:
        return None
    signal = GridSignal(grid, x)
    resid = float(np.max(np.abs(feas.R @ x - feas.rhs), initial=0.0))
    return level, signal, resid


def _pinned(out, crit) -> bool:
    level, signal, _ = out
    if level <= 0 or crit in (Criterion.FL, Criterion.US):
        return False
    last = signal.values[-2]
    if crit is Criterion.POS:
        last = max(last, 0.0)
    elif crit is Criterion.OS:
        last = max(-last, 0.0)
    return abs(last) >= level * (1 - 1e-6)


def solve_primal(pd: ProblemData, crit, envelope: Optional[Envelope] = None,
                 opts: Optional[PrimalOptions] = None) -> PrimalResult:
    """Best piecewise-linear error signal found for ``crit``; an upper bound."""
    crit = Criterion.parse(crit)
    opts = opts or PrimalOptions()
    envelope = envelope if envelope is not None else pd.envelope
    if crit is Criterion.US and not pd.w_nonnegative:
        raise ReferenceSignError("undershoot needs a nonnegative reference")
    if envelope is not None:
        e0 = pd.boundary_value()
        if e0 is not None:
            lo0, hi0 = float(envelope.lower_at(0.0)), float(envelope.upper_at(0.0))
            if pd.closure == C0_ALPHA and not (hi0 > e0 >= max(lo0, 0.0)):
                raise EnvelopeError(
                    f"envelope at t=0 is [{lo0}, {hi0}] but the error starts at {e0}")
            if not lo0 <= e0 <= hi0:
                raise EnvelopeError(f"envelope excludes the initial error value {e0}")
    x_min = pd.x_min if pd.modes else 1.0
    horizon = opts.horizon or 10.0 / x_min
    if envelope is not None:
        horizon = max(horizon, 2.0 * envelope.t_bar)

    best = None
    history = []
    extends = 0
    while True:
        out = _solve_on(pd, crit, horizon, opts.n_nodes, envelope, opts)
        if out is not None:
            break
        extends += 1
        if extends > opts.max_extend:
            raise InfeasibleProblemError(
                f"no {crit.value} signal meets the interpolation constraints on [0, {horizon:g}]")
        horizon *= 2.0
    # a signal pinned at its level right before the horizon wants more room
    while extends < opts.max_extend and _pinned(out, crit):
        longer = _solve_on(pd, crit, 2.0 * horizon, opts.n_nodes, envelope, opts)
        extends += 1
        if longer is None or longer[0] >= out[0] * (1 - opts.tol):
            break
        out, horizon = longer, 2.0 * horizon
    n = opts.n_nodes
    converged = False
    while True:
        level, signal, resid = out
        value = evaluate_cost(signal, crit, pd.w_terms)
        history.append(value)
        if best is None or value < best[0]:
            best = (value, level, signal, resid)
        if len(history) >= 2 and abs(history[-1] - history[-2]) <= opts.tol * max(abs(history[-1]), 1e-9):
            converged = True
            break
        if 2 * n > opts.max_nodes:
            break
        n *= 2
        nxt = _solve_on(pd, crit, horizon, n, envelope, opts)
        if nxt is None:
            break
        out = nxt
    value, level, signal, resid = best
    fl_shift = fl_identity(signal)[1] if crit is Criterion.FL else np.nan
    return PrimalResult(value, signal, resid, crit, level=level, horizon=horizon,
                        history=tuple(history), converged=converged, fl_shift_value=fl_shift)
