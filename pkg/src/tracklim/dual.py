"""Finite-mode dual problems and their certificates.

A dual certificate is a combination ``e*(t) = sum_i c_i m_i(t)`` of the
interpolation modes.  Every criterion restricts ``e*`` differently:

====  =========================================  ======================
crit  constraint on e*                           objective
====  =========================================  ======================
MA    int |e*| <= 1                              <Proj_U e*, w>
POS   e* >= 0, int e* <= 1                       <Proj_U e*, w>
OS    e* <= 0, int |e*| <= 1                     <Proj_U e*, w>
US    e* <= 0, int |e*| <= 1                     <Proj_{V+W} e*, w>
FL    int e*_+ <= 1/2, int e*_- >= -1/2          <Proj_U e*, w>
====  =========================================  ======================

When the error must start at ``e(0) = alpha`` (closure case C0_alpha) the
objective gains a correction that depends only on the masses of ``e*``
(:func:`compute_sharp_correction`).

The semi-infinite sign constraints are imposed on a time grid.  Grid
programs are solved in their small "moment" form (one row per mode) and the
row multipliers are the certificate.  Certificates are then re-evaluated
with closed-form masses, so reported values are lower bounds that do not
depend on the grid beyond the checked sign violation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (CertificateRejected, ContractError, NumericalFailure, RefinementError,
                     ReferenceSignError, ValidationError)
from .lp import LinearProgram, solve_lp
from .problem import C0, C0_ALPHA, C00, Mode, ProblemData, mode_matrix


class Criterion(str, enum.Enum):
    MA = "MA"
    POS = "POS"
    OS = "OS"
    US = "US"
    FL = "FL"

    @classmethod
    def parse(cls, value) -> "Criterion":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValidationError(f"unknown criterion {value!r}") from None

    @property
    def sign(self) -> int:
        """Required sign of e* (0 when unconstrained)."""
        return {"POS": 1, "OS": -1, "US": -1}.get(self.value, 0)


ALL_CRITERIA = (Criterion.MA, Criterion.POS, Criterion.OS, Criterion.US, Criterion.FL)


@dataclass(frozen=True)
class DualOptions:
    tol: float = 1e-5            # relative change between refinements
    cert_tol: float = 1e-6       # admissible sign violation of a certificate
    eps_tail: float = 1e-10      # mass neglected past the horizon
    n_init: int = 512
    max_grid: int = 40_000
    max_exchange: int = 40
    horizon: Optional[float] = None
    sharp: str = "derived"       # or "shortcut"
    pivot_rule: str = "dantzig"


@dataclass(frozen=True)
class CertificateMasses:
    """Closed-form masses of a certificate; ``negative`` is <= 0."""

    positive: float
    negative: float
    tail_bound: float = 0.0

    @property
    def total(self) -> float:
        return self.positive + self.negative

    @property
    def l1(self) -> float:
        return self.positive - self.negative

    @classmethod
    def zero(cls) -> "CertificateMasses":
        return cls(0.0, 0.0, 0.0)


@dataclass
class DualResult:
    criterion: Criterion
    value: float
    coeffs: np.ndarray
    modes: tuple
    max_sign_violation: float
    mass_used: float
    grid_stats: tuple            # (points, refinements)
    corrected: bool
    correction: float = 0.0
    horizon: float = 0.0
    masses: CertificateMasses = field(default_factory=CertificateMasses.zero)
    grid_value: float = np.nan
    history: tuple = ()
    violation_bound: float = 0.0

    def certificate(self, t):
        """Evaluate e*(t) for the reported coefficients."""
        t = np.asarray(t, dtype=float)
        if not self.modes:
            return np.zeros(t.shape)
        return mode_matrix(self.modes, t.ravel()).dot(self.coeffs).reshape(t.shape)

    def to_dict(self):
        return {
            "criterion": self.criterion.value,
            "value": self.value,
            "coeffs": [float(c) for c in self.coeffs],
            "modes": [[m.x, m.y, m.kind, m.subspace] for m in self.modes],
            "max_sign_violation": self.max_sign_violation,
            "violation_bound": self.violation_bound,
            "mass_used": self.mass_used,
            "masses": {"positive": self.masses.positive, "negative": self.masses.negative},
            "grid_points": self.grid_stats[0],
            "refinements": self.grid_stats[1],
            "corrected": self.corrected,
            "correction": self.correction,
            "horizon": self.horizon,
            "grid_value": self.grid_value,
        }


# ---------------------------------------------------------------------------
# corrections and gamma reduction


def _closure_alpha(pd: ProblemData) -> float:
    if pd.closure == C0_ALPHA:
        return float(pd.alpha)
    return 0.0


def compute_sharp_correction(crit, alpha: float, coeffs, masses: CertificateMasses,
                             closure: str = C0_ALPHA, variant: str = "derived") -> float:
    """Extra objective term when the error is pinned to ``e(0) = alpha``.

    It is ``max_lambda [alpha*lambda - f*(mu + lambda*delta_0)] + f*(mu)``,
    which for the five criteria evaluates to

    * MA:  ``|alpha| (1 - ||e*||_1)``
    * POS: ``alpha_+ (1 - ||e*||_1)``
    * OS:  ``(-alpha)_+ (1 - ||e*||_1)``
    * US:  ``0``
    * FL:  ``alpha (1/2 - int e*_+)`` for alpha >= 0,
      ``|alpha| (1/2 + int e*_-)`` for alpha < 0.

    ``variant="shortcut"`` returns the common simplification instead: zero
    for every criterion except FL, whose term is ``alpha (1/2 - int e*_+)``
    for either sign of alpha.
    """
    crit = Criterion.parse(crit)
    if closure == C0:
        raise ContractError("no boundary correction exists in closure case C0")
    if closure == C00:
        alpha = 0.0
    coeffs = np.asarray(coeffs, dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise ValidationError("certificate coefficients must be finite")
    if variant not in ("derived", "shortcut"):
        raise ValidationError(f"unknown correction variant {variant!r}")
    l1 = masses.l1
    if variant == "shortcut":
        if crit is Criterion.FL:
            return alpha * (0.5 - masses.positive)
        return 0.0
    if crit is Criterion.MA:
        return abs(alpha) * (1.0 - l1)
    if crit is Criterion.POS:
        return max(alpha, 0.0) * (1.0 - l1)
    if crit is Criterion.OS:
        return max(-alpha, 0.0) * (1.0 - l1)
    if crit is Criterion.US:
        return 0.0
    if alpha >= 0:
        return alpha * (0.5 - masses.positive)
    return -alpha * (0.5 + masses.negative)


def gamma_of(pd: ProblemData) -> float:
    """Smallest interpolation point on the positive real axis (inf if none)."""
    pts = [z.real for z in (*pd.plant_zeros, *pd.plant_poles, *pd.ref_zeros) if z.imag == 0]
    return min(pts, default=np.inf)


def reduce_by_gamma(pd: ProblemData, crit=Criterion.OS) -> ProblemData:
    """Drop oscillatory modes decaying slower than the smallest real point.

    Such modes carry zero weight in every overshoot/undershoot certificate,
    so the reduced problem has the same optimal value.
    """
    crit = Criterion.parse(crit)
    if crit not in (Criterion.OS, Criterion.US):
        raise ContractError(f"mode reduction does not preserve the {crit.value} limit")
    if pd.ref_zeros:
        raise ContractError("mode reduction needs a minimum-phase reference")
    if crit is Criterion.US and not pd.w_nonnegative:
        raise ReferenceSignError("undershoot needs a nonnegative reference")
    gamma = gamma_of(pd)
    keep = np.array([not (m.y != 0 and m.x < gamma) for m in pd.modes], dtype=bool)
    return pd.with_modes(keep) if not keep.all() else pd


# ---------------------------------------------------------------------------
# grids and exact certificate evaluation


def dual_horizon(modes: Sequence[Mode], eps_tail: float = 1e-10) -> float:
    x_min = min(m.x for m in modes)
    return float(np.log(1.0 / eps_tail) / x_min)


def initial_grid(modes: Sequence[Mode], horizon: float, n_init: int = 512) -> np.ndarray:
    """Log-spaced points near 0 joined with a uniform grid fine enough for beats."""
    x_max = max(m.x for m in modes)
    y_max = max(m.y for m in modes)
    half = max(n_init // 2, 8)
    t0 = min(1e-3 / x_max, horizon * 1e-6)
    logpart = np.geomspace(t0, horizon, half)
    step = horizon / half
    if y_max > 0:
        step = min(step, 2 * np.pi / y_max / 16)
    uni = np.linspace(0.0, horizon, int(np.ceil(horizon / step)) + 1)
    return np.unique(np.concatenate([[0.0], logpart, uni]))


def refine_grid(grid: np.ndarray) -> np.ndarray:
    mids = 0.5 * (grid[1:] + grid[:-1])
    return np.sort(np.concatenate([grid, mids]))


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    h = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


def _eval(modes, coeffs, t):
    return mode_matrix(modes, t) @ coeffs


def _segment_integrals(modes, coeffs, knots):
    """Exact integrals of e* between consecutive knots."""
    total = np.zeros(len(knots) - 1)
    for m, c in zip(modes, coeffs):
        if c != 0:
            prim = m.integral(0.0, np.asarray(knots))  # F(t) - F(0)
            total += c * np.diff(prim)
    return total


def _sample_grid(modes, horizon, grid=None, density=10):
    base = initial_grid(modes, horizon) if grid is None else np.asarray(grid)
    if base[-1] < horizon:
        base = np.append(base, horizon)
    h = np.diff(base)
    frac = np.arange(density) / density
    pts = (base[:-1, None] + h[:, None] * frac[None, :]).ravel()
    return np.append(pts, base[-1])


def certificate_masses(modes, coeffs, horizon, grid=None) -> CertificateMasses:
    """Positive and negative masses of e* from sign changes and closed forms.

    Sign changes are bracketed on a dense sample of ``[0, horizon]`` and
    located by Brent's method; past the horizon the contribution is bounded
    by ``sum |c_i| e^{-x_i T}/x_i``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if not modes or not np.any(coeffs):
        return CertificateMasses.zero()
    ts = _sample_grid(modes, horizon, grid)
    vals = _eval(modes, coeffs, ts)
    f = lambda t: float(_eval(modes, coeffs, np.array([t]))[0])
    knots = [0.0]
    # samples that hit a zero exactly are knots themselves
    knots.extend(ts[1:-1][vals[1:-1] == 0.0])
    idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    for k in idx:
        a, b = ts[k], ts[k + 1]
        fa, fb = f(a), f(b)
        if fa * fb < 0:
            knots.append(brentq(f, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps))
        else:
            # the root sits on a sample, where round-off decides the sign
            knots.append(a if abs(fa) <= abs(fb) else b)
    knots.append(float(horizon))
    knots = np.unique(knots)
    seg = _segment_integrals(modes, coeffs, knots)
    pos = float(seg[seg > 0].sum())
    neg = float(seg[seg < 0].sum())
    tail = float(sum(abs(c) * np.exp(-m.x * horizon) / m.x for m, c in zip(modes, coeffs)))
    return CertificateMasses(pos, neg, tail)


def verify_certificate(pd: ProblemData, crit, coeffs, grid=None, cert_tol: float = 1e-6,
                       horizon: Optional[float] = None, raise_on_fail: bool = True):
    """Check the sign constraint of a certificate and recompute its masses.

    Returns ``(max_sign_violation, masses)``.  The violation is the largest
    amount by which ``e*`` has the wrong sign, located on a sample ten times
    denser than ``grid`` and polished by a bounded scalar search around each
    sampled offender.  With ``raise_on_fail`` a violation above ``cert_tol``
    raises :class:`CertificateRejected` carrying the location.
    """
    crit = Criterion.parse(crit)
    coeffs = np.asarray(coeffs, dtype=float)
    modes = pd.modes
    if coeffs.shape != (len(modes),) or not np.all(np.isfinite(coeffs)):
        raise ValidationError("certificate must be a finite vector with one entry per mode")
    if not modes or not np.any(coeffs):
        return 0.0, CertificateMasses.zero()
    horizon = horizon or dual_horizon(modes)
    masses = certificate_masses(modes, coeffs, horizon, grid)
    viol, where, _ = _sign_violation(modes, coeffs, crit.sign, horizon, grid)
    if raise_on_fail and viol > cert_tol:
        raise CertificateRejected(
            f"{crit.value} certificate has the wrong sign by {viol:.3e} near t={where:.6g}",
            violation=viol, location=where)
    return viol, masses


def _sign_violation(modes, coeffs, sign, horizon, grid=None):
    """Largest wrong-sign excursion of e*, its location and all offending points."""
    if sign == 0:
        return 0.0, 0.0, np.zeros(0)
    ts = _sample_grid(modes, horizon, grid)
    g = -sign * _eval(modes, coeffs, ts)  # positive where the sign is wrong
    peaks = np.flatnonzero(g > 0)
    if peaks.size == 0:
        return 0.0, 0.0, np.zeros(0)
    # local maxima of g among offending samples
    left = np.r_[-np.inf, g[:-1]]
    right = np.r_[g[1:], -np.inf]
    peaks = peaks[(g[peaks] >= left[peaks]) & (g[peaks] >= right[peaks])]
    found = []
    for k in peaks:
        a = ts[max(k - 1, 0)]
        b = ts[min(k + 1, ts.size - 1)]
        if b > a:
            res = minimize_scalar(lambda t: sign * float(_eval(modes, coeffs, np.array([t]))[0]),
                                  bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-12 * max(1.0, b)})
            t_star, v = float(res.x), -float(res.fun)
            if v < g[k]:
                t_star, v = float(ts[k]), float(g[k])
        else:
            t_star, v = float(ts[k]), float(g[k])
        found.append((v, t_star))
    found.sort(reverse=True)
    return found[0][0], found[0][1], np.array([t for _, t in found])


def _lipschitz_bound(modes, coeffs, ts):
    """Worst-case wrong-sign excursion between samples from derivative bounds."""
    if not modes or ts.size < 2:
        return 0.0
    h = np.diff(ts)
    L = np.zeros(h.size)
    for m, c in zip(modes, coeffs):
        L += abs(c) * np.hypot(m.x, m.y) * np.exp(-m.x * ts[:-1])
    return float(np.max(L * h / 2))


# ---------------------------------------------------------------------------
# grid programs


def asymptotic_rows(modes, samples: int = 400, periods: int = 20) -> np.ndarray:
    """Rows ``R`` with ``R@c = lim e^{x_min t} e*(t)`` at sampled phases.

    A sign constraint on e* for all ``t`` forces the same sign on this limit,
    which the finite grid on ``[0, T_h]`` cannot see when the slowest mode
    is already below round-off at the horizon.
    """
    x = np.array([m.x for m in modes])
    slow = x <= x.min() * (1 + 1e-9)
    ys = [m.y for m, s in zip(modes, slow) if s and m.y > 0]
    if ys:
        theta = np.linspace(0.0, periods * 2 * np.pi / min(ys), samples)
    else:
        theta = np.zeros(1)
    R = np.zeros((theta.size, len(modes)))
    for i, m in enumerate(modes):
        if slow[i]:
            R[:, i] = np.cos(m.y * theta) if m.kind == "cos" else np.sin(m.y * theta)
    return R


def _solve_sign_lp(Phi, beta, masses, sign, pivot_rule):
    """``max beta@c`` s.t. ``sign*Phi@c >= 0``, ``sign*masses@c <= 1``.

    Solved through its moment form
    ``min rho  s.t.  -sign*Phi^T lam + rho*sign*masses = beta,  lam, rho >= 0``;
    the certificate is minus the row multipliers.
    """
    n = beta.size
    N = Phi.shape[0]
    A = np.hstack([-sign * Phi.T, (sign * masses)[:, None]])
    c = np.zeros(N + 1)
    c[-1] = -1.0
    sol = solve_lp(LinearProgram(c, A_eq=A, b_eq=beta, lower=0.0, upper=np.inf),
                   pivot_rule=pivot_rule)
    if sol.status == "infeasible":
        return None
    if sol.status != "optimal":
        raise NumericalFailure(f"sign-constrained grid program ended {sol.status}")
    return -sol.value, -sol.y_eq


def _solve_ma_lp(G, beta, pivot_rule):
    """``max beta@c`` s.t. ``sum_k W_k |(Phi c)_k| <= 1`` in moment form.

    ``max sigma  s.t.  G x = sigma*beta,  -1 <= x <= 1,  sigma >= 0`` with
    ``G = Phi^T diag(W)``; the grid value is ``1/sigma``.
    """
    n, N = G.shape
    A = np.hstack([G, -beta[:, None]])
    c = np.zeros(N + 1)
    c[-1] = 1.0
    lo = np.r_[-np.ones(N), 0.0]
    hi = np.r_[np.ones(N), np.inf]
    sol = solve_lp(LinearProgram(c, A_eq=A, b_eq=np.zeros(n), lower=lo, upper=hi),
                   pivot_rule=pivot_rule)
    if sol.status == "unbounded":
        return 0.0, np.zeros(n)
    if sol.status != "optimal":
        raise NumericalFailure(f"MA grid program ended {sol.status}")
    sigma = sol.value
    return (1.0 / sigma if sigma > 0 else np.inf), -sol.y_eq


def _solve_fl_lp(G, beta, a_pos, a_neg, pivot_rule):
    """Fluctuation grid program in moment form.

    ``max sigma  s.t.  G u + eta*G@1 = sigma*beta,  a_pos*sigma - eta <= 1,
    eta + a_neg*sigma <= 1,  -1 <= u <= 1,  sigma >= 0``; its value is
    ``1/sigma`` including the boundary correction.
    """
    n, N = G.shape
    A = np.hstack([G, G.sum(axis=1)[:, None], -beta[:, None]])
    A_ub = np.zeros((2, N + 2))
    A_ub[0, N], A_ub[0, N + 1] = -1.0, a_pos
    A_ub[1, N], A_ub[1, N + 1] = 1.0, a_neg
    c = np.zeros(N + 2)
    c[-1] = 1.0
    lo = np.r_[-np.ones(N), -np.inf, 0.0]
    hi = np.r_[np.ones(N), np.inf, np.inf]
    sol = solve_lp(LinearProgram(c, A_ub=A_ub, b_ub=np.ones(2), A_eq=A, b_eq=np.zeros(n),
                                 lower=lo, upper=hi), pivot_rule=pivot_rule)
    if sol.status == "unbounded":
        return 0.0, np.zeros(n)
    if sol.status != "optimal":
        raise NumericalFailure(f"FL grid program ended {sol.status}")
    sigma = sol.value
    return (1.0 / sigma if sigma > 0 else np.inf), -sol.y_eq


# ---------------------------------------------------------------------------


def _fl_weights(alpha, variant):
    if variant == "shortcut":
        return alpha, 0.0
    return max(alpha, 0.0), max(-alpha, 0.0)


def _fl_value(beta, coeffs, masses, alpha, variant):
    """Best value along the ray through ``coeffs`` and its scaling."""
    a_pos, a_neg = _fl_weights(alpha, variant)
    base = (abs(alpha) if variant == "derived" else alpha) / 2.0
    P = masses.positive + masses.tail_bound
    Q = -masses.negative + masses.tail_bound
    top = max(P, Q)
    if top <= 0:
        return base, 0.0
    s_max = 0.5 / top
    slope = beta @ coeffs - a_pos * P - a_neg * Q
    if slope <= 0:
        return base, 0.0
    return base + s_max * slope, s_max


def solve_dual(pd: ProblemData, crit, opts: Optional[DualOptions] = None) -> DualResult:
    """Lower bound on the optimal value of ``crit`` with a verified certificate."""
    crit = Criterion.parse(crit)
    opts = opts or DualOptions()
    if opts.sharp not in ("derived", "shortcut"):
        raise ValidationError(f"unknown correction variant {opts.sharp!r}")
    if crit is Criterion.US and not pd.w_nonnegative:
        raise ReferenceSignError("undershoot bounds need a nonnegative reference")
    alpha = _closure_alpha(pd)
    closure = pd.closure
    modes = pd.modes
    n = len(modes)
    zero = CertificateMasses.zero()

    def kappa():
        if closure == C0:
            return 0.0
        return compute_sharp_correction(crit, alpha, np.zeros(n), zero, closure, opts.sharp)

    if n == 0:
        k = kappa()
        return DualResult(crit, k, np.zeros(0), (), 0.0, 0.0, (0, 0), corrected=k != 0,
                          correction=k)

    beta = pd.objective(crit.value)
    horizon = opts.horizon or dual_horizon(modes, opts.eps_tail)
    grid = initial_grid(modes, horizon, opts.n_init)
    if crit.sign:
        return _solve_signed(pd, crit, opts, beta, horizon, grid, kappa())
    return _solve_unsigned(pd, crit, opts, beta, horizon, grid, alpha, kappa())


def _solve_signed(pd, crit, opts, beta, horizon, grid, k0):
    modes = pd.modes
    masses_vec = pd.masses()
    sign = crit.sign
    rounds = 0
    history = []
    far = asymptotic_rows(modes)
    while True:
        if grid.size > opts.max_grid:
            raise RefinementError(f"{crit.value} dual grid exceeded {opts.max_grid} points",
                                  history[-2:] or [np.nan, np.nan])
        Phi = np.vstack([mode_matrix(modes, grid), far])
        out = _solve_sign_lp(Phi, beta, masses_vec, sign, opts.pivot_rule)
        if out is None:
            # grid too coarse to pin the sign: the relaxation is unbounded
            grid = refine_grid(grid)
            rounds += 1
            continue
        grid_value, c = out
        history.append(grid_value)
        mass = sign * float(masses_vec @ c)
        c_hat = c / mass if mass > 1e-300 and beta @ c > 0 else np.zeros_like(c)
        viol, where, bad = _sign_violation(modes, c_hat, sign, horizon, grid)
        if viol <= opts.cert_tol:
            break
        rounds += 1
        if rounds > opts.max_exchange:
            raise RefinementError(
                f"{crit.value} certificate still violates its sign constraint by {viol:.3e}",
                history[-2:])
        # exchange step: add the offending points (and their neighbourhoods)
        extra = [bad]
        if rounds % 8 == 0:
            extra.append(0.5 * (grid[1:] + grid[:-1]))
        grid = np.unique(np.concatenate([grid, *extra]))
    masses = certificate_masses(modes, c_hat, horizon, grid)
    v0 = float(beta @ c_hat)
    if not np.any(c_hat):
        v0 = 0.0
    ts = _sample_grid(modes, horizon, grid)
    vb = _lipschitz_bound(modes, c_hat, ts)
    if k0 > v0:
        return DualResult(crit, k0, np.zeros_like(c_hat), modes, 0.0, 0.0,
                          (grid.size, rounds), corrected=True, correction=k0, horizon=horizon,
                          grid_value=grid_value, history=tuple(history))
    return DualResult(crit, v0, c_hat, modes, viol, masses.l1 + masses.tail_bound,
                      (grid.size, rounds), corrected=False, correction=0.0, horizon=horizon,
                      masses=masses, grid_value=grid_value, history=tuple(history),
                      violation_bound=vb)


def _solve_unsigned(pd, crit, opts, beta, horizon, grid, alpha, k0):
    modes = pd.modes
    variant = opts.sharp
    corrected_case = pd.closure != C0
    a_pos, a_neg = _fl_weights(alpha if corrected_case else 0.0, variant)
    history = []
    certified = []
    refinements = 0
    while True:
        Phi = mode_matrix(modes, grid)
        G = Phi.T * trapezoid_weights(grid)[None, :]
        if crit is Criterion.MA:
            grid_value, c = _solve_ma_lp(G, beta, opts.pivot_rule)
        else:
            grid_value, c = _solve_fl_lp(G, beta, a_pos, a_neg, opts.pivot_rule)
        history.append(grid_value)
        masses = certificate_masses(modes, c, horizon, grid)
        if crit is Criterion.MA:
            norm = masses.l1 + masses.tail_bound
            gain = float(beta @ c)
            if norm > 0 and gain > 0:
                value, coeffs = gain / norm, c / norm
            else:
                value, coeffs = 0.0, np.zeros_like(c)
            if k0 > value:
                value, coeffs = k0, np.zeros_like(c)
        else:
            value, s = _fl_value(beta, c, masses, alpha if corrected_case else 0.0, variant)
            coeffs = s * c
        certified.append((value, coeffs))
        if len(certified) >= 3:
            v = [x for x, _ in certified[-3:]]
            scale = max(abs(v[-1]), 1e-12)
            if abs(v[2] - v[1]) <= opts.tol * scale and abs(v[1] - v[0]) <= opts.tol * scale:
                break
        if 2 * grid.size > opts.max_grid:
            raise RefinementError(
                f"{crit.value} dual did not converge within {opts.max_grid} grid points",
                [x for x, _ in certified[-2:]])
        grid = refine_grid(grid)
        refinements += 1
    # best certified value seen (each one is a valid lower bound)
    value, coeffs = max(certified, key=lambda vc: vc[0])
    masses = certificate_masses(modes, coeffs, horizon, grid)
    if crit is Criterion.MA:
        corr = (compute_sharp_correction(crit, alpha, coeffs, masses, pd.closure, variant)
                if corrected_case else 0.0)
        used = masses.l1
    else:
        corr = (compute_sharp_correction(crit, alpha, coeffs, masses, pd.closure, variant)
                if corrected_case else 0.0)
        used = max(masses.positive, -masses.negative)
    return DualResult(crit, float(value), coeffs, modes, 0.0, used, (grid.size, refinements),
                      corrected=bool(corrected_case and corr != 0), correction=float(corr),
                      horizon=horizon, masses=masses, grid_value=history[-1],
                      history=tuple(history))
