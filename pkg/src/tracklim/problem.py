"""Problem data: interpolation points, mode basis, closure case, right-hand sides."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CoincidentPoleZeroError,
    EnvelopeError,
    ImaginaryAxisError,
    ImproperError,
    InfeasibleProblemError,
    InterpolationPoleError,
    NotDistinctError,
    NotSimpleError,
    PoleProximityError,
    ValidationError,
)
from .ratfun import PFTerm, RatFun, mode_integral, mode_mass, partial_fractions, time_eval

AXIS_TOL = 1e-8
DISTINCT_TOL = 1e-7
REAL_TOL = 1e-9

C0 = "C0"
C0_ALPHA = "C0_alpha"
C00 = "C00"


@dataclass(frozen=True)
class Mode:
    """``e^{-x t} cos(y t)`` or ``e^{-x t} sin(y t)`` from one pole/zero.

    ``subspace`` is ``"U"`` (plant zero), ``"V"`` (plant pole) or ``"W"``
    (reference zero); ``source`` indexes the originating point in its list.
    """

    x: float
    y: float
    kind: str
    subspace: str
    source: int = 0

    def __post_init__(self):
        if not self.x > 0:
            raise ValidationError(f"mode decay rate must be positive, got {self.x}")
        if self.kind == "sin" and not self.y > 0:
            raise ValidationError("sin modes need a positive frequency")
        if self.kind not in ("cos", "sin") or self.subspace not in ("U", "V", "W"):
            raise ValidationError(f"bad mode tags {self.kind!r}/{self.subspace!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        trig = np.cos if self.kind == "cos" else np.sin
        return np.exp(-self.x * t) * trig(self.y * t)

    @property
    def mass(self) -> float:
        return mode_mass(self.x, self.y, self.kind)

    def integral(self, t0, t1):
        return mode_integral(self.x, self.y, self.kind, t0, t1)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        lam = complex(-self.x, self.y)
        v = lam * np.exp(lam * t)
        return v.real if self.kind == "cos" else v.imag


def mode_matrix(modes: Sequence[Mode], t) -> np.ndarray:
    """Matrix with entry [k, i] = modes[i](t[k])."""
    t = np.asarray(t, dtype=float)
    out = np.empty((t.size, len(modes)))
    for i, m in enumerate(modes):
        out[:, i] = m(t)
    return out


@dataclass(frozen=True)
class Envelope:
    """Finite-horizon bounds ``lower(t) <= e(t) <= upper(t)`` on ``[0, t_bar]``.

    ``lower``/``upper`` are breakpoint lists ``[(t, value), ...]`` of
    piecewise-linear functions; constants may be given as a bare number.
    """

    t_bar: float
    lower: tuple
    upper: tuple

    def __init__(self, t_bar, lower, upper):
        object.__setattr__(self, "t_bar", float(t_bar))
        object.__setattr__(self, "lower", self._breaks(lower))
        object.__setattr__(self, "upper", self._breaks(upper))
        self._check()

    def _breaks(self, spec):
        if np.isscalar(spec):
            return ((0.0, float(spec)), (self.t_bar, float(spec)))
        pts = tuple((float(t), float(v)) for t, v in spec)
        ts = [t for t, _ in pts]
        if len(pts) < 1 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise EnvelopeError("envelope breakpoints must be strictly increasing in t")
        if ts[0] > 0 or ts[-1] < self.t_bar:
            raise EnvelopeError("envelope breakpoints must cover [0, t_bar]")
        return pts

    def _check(self):
        if not self.t_bar > 0:
            raise EnvelopeError("t_bar must be positive")
        t = self.breakpoints()
        lo, hi = self.lower_at(t), self.upper_at(t)
        if np.any(lo >= hi):
            raise EnvelopeError("envelope needs lower(t) < upper(t) on [0, t_bar]")
        if np.any(hi < 0):
            raise EnvelopeError("envelope needs upper(t) >= 0 on [0, t_bar]")

    def breakpoints(self):
        ts = {0.0, self.t_bar}
        ts.update(t for t, _ in self.lower if t <= self.t_bar)
        ts.update(t for t, _ in self.upper if t <= self.t_bar)
        return np.array(sorted(ts))

    def _interp(self, pts, t, outside):
        t = np.asarray(t, dtype=float)
        tp = np.array([p[0] for p in pts])
        vp = np.array([p[1] for p in pts])
        val = np.interp(t, tp, vp)
        return np.where(t <= self.t_bar, val, outside)

    def lower_at(self, t):
        return self._interp(self.lower, t, -np.inf)

    def upper_at(self, t):
        return self._interp(self.upper, t, np.inf)

    def to_dict(self):
        return {"t_bar": self.t_bar, "lower": [list(p) for p in self.lower],
                "upper": [list(p) for p in self.upper]}


@dataclass(frozen=True)
class ProblemData:
    plant: RatFun
    reference: RatFun
    plant_zeros: tuple
    plant_poles: tuple
    ref_zeros: tuple
    theta_p: int
    theta_w: int
    closure: str
    alpha: Optional[float]
    modes: tuple
    b_vec: np.ndarray
    us_obj: np.ndarray
    w_terms: tuple
    w_nonnegative: bool
    envelope: Optional[Envelope] = None

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def subspace_mask(self, *names) -> np.ndarray:
        return np.array([m.subspace in names for m in self.modes], dtype=bool)

    def objective(self, criterion: str = "MA") -> np.ndarray:
        """Dual objective vector over all modes.

        ``<Proj_U(e*), w>`` for every criterion except undershoot, which
        uses ``<Proj_{V+W}(e*), w>``.
        """
        out = np.zeros(self.n_modes)
        if criterion == "US":
            out[~self.subspace_mask("U")] = self.us_obj
        else:
            out[self.subspace_mask("U")] = self.b_vec
        return out

    def masses(self) -> np.ndarray:
        return np.array([m.mass for m in self.modes])

    @property
    def x_min(self) -> float:
        return min((m.x for m in self.modes), default=np.inf)

    def rhs(self) -> np.ndarray:
        """Moment right-hand sides: <w, a_i> on U modes, 0 on V and W."""
        out = np.zeros(self.n_modes)
        out[self.subspace_mask("U")] = self.b_vec
        return out

    def w(self, t):
        return time_eval(self.w_terms, t)

    def boundary_value(self) -> Optional[float]:
        """Required e(0): alpha in C0_alpha, 0 in C00, None (free) in C0."""
        if self.closure == C0_ALPHA:
            return self.alpha
        if self.closure == C00:
            return 0.0
        return None

    def with_modes(self, keep: np.ndarray) -> "ProblemData":
        keep = np.asarray(keep, dtype=bool)
        modes = tuple(m for m, k in zip(self.modes, keep) if k)
        u = self.subspace_mask("U")
        b = np.asarray(self.b_vec)[keep[u]]
        us = np.asarray(self.us_obj)[keep[~u]]
        b.setflags(write=False)
        us.setflags(write=False)
        return ProblemData(
            plant=self.plant, reference=self.reference,
            plant_zeros=self.plant_zeros, plant_poles=self.plant_poles,
            ref_zeros=self.ref_zeros, theta_p=self.theta_p, theta_w=self.theta_w,
            closure=self.closure, alpha=self.alpha, modes=modes, b_vec=b, us_obj=us,
            w_terms=self.w_terms, w_nonnegative=self.w_nonnegative, envelope=self.envelope,
        )


# ---------------------------------------------------------------------------


def classify_closure(theta_w: int, theta_p: int, ref: Optional[RatFun] = None):
    """Closure case of the achievable error set and the boundary value alpha.

    Returns ``(closure, alpha)`` with ``alpha = None`` in case C0.
    """
    if theta_w < 1 or theta_p < 0:
        raise ValidationError(f"need theta_w >= 1 and theta_p >= 0, got {theta_w}, {theta_p}")
    if theta_w == 1:
        if theta_p == 0:
            return C0, None
        if ref is None:
            raise ValidationError("alpha requires the reference transform")
        # initial value theorem: w(0+) = lim s*w(s) = ratio of leading coefficients
        return C0_ALPHA, ref.num.lead / ref.den.lead
    if ref is not None:
        h = ref.markov(theta_w - 1)
        scale = max(1.0, float(np.abs(h).max()))
        if np.any(np.abs(h) > 1e-12 * scale):
            raise InfeasibleProblemError(
                "reference has nonzero initial derivatives below order theta_w-1; "
                "the feasible error set is empty")
    return C00, 0.0


def _is_real(z: complex) -> bool:
    return abs(z.imag) <= REAL_TOL * (1.0 + abs(z))


def _reduce_conjugates(points):
    out = []
    unpaired = []  # (point, came from lower half-plane)
    for z in points:
        z = complex(z)
        if _is_real(z):
            out.append(complex(z.real, 0.0))
            continue
        lower = z.imag < 0
        z = z.conjugate() if lower else z
        hit = next((i for i, (q, fl) in enumerate(unpaired)
                    if fl != lower and abs(z - q) <= DISTINCT_TOL * max(1.0, abs(z))), None)
        if hit is not None:
            del unpaired[hit]  # conjugate partner of a retained point
            continue
        unpaired.append((z, lower))
        out.append(z)
    return out


def build_modes(z_list, p_list, v_list=()):
    """Mode basis for the interpolation points, U then V then W.

    Conjugate pairs are reduced to the member with positive imaginary part.
    Real points give one cos mode, complex points a cos/sin pair.
    """
    groups = [("U", _reduce_conjugates(z_list)), ("V", _reduce_conjugates(p_list)),
              ("W", _reduce_conjugates(v_list))]
    allpts = []
    for tag, pts in groups:
        for z in pts:
            if abs(z.real) < AXIS_TOL * (1.0 + abs(z)):
                raise ImaginaryAxisError(f"interpolation point {z} lies on the imaginary axis")
            if z.real < 0:
                raise ValidationError(f"interpolation point {z} is not in the right half-plane")
            allpts.append((tag, z))
    for i in range(len(allpts)):
        for j in range(i + 1, len(allpts)):
            (ti, zi), (tj, zj) = allpts[i], allpts[j]
            if abs(zi - zj) <= DISTINCT_TOL * max(1.0, abs(zi)):
                if {ti, tj} == {"U", "V"}:
                    raise CoincidentPoleZeroError(f"plant pole and zero coincide at {zi}")
                raise NotDistinctError(f"interpolation points {zi} and {zj} are not distinct")
    modes = []
    for tag, pts in groups:
        for idx, z in enumerate(pts):
            modes.append(Mode(z.real, abs(z.imag), "cos", tag, idx))
            if z.imag != 0.0:
                modes.append(Mode(z.real, abs(z.imag), "sin", tag, idx))
    return modes


def _interp_values(ref: RatFun, points):
    out = []
    for z in _reduce_conjugates(points):
        try:
            val = complex(ref(z))
        except PoleProximityError as exc:
            raise InterpolationPoleError(
                f"reference has a pole at interpolation point {z}") from exc
        out.append(val.real)
        if z.imag != 0.0:
            # w(x+iy) = <w, e^{-xt}cos yt> - i <w, e^{-xt}sin yt>
            out.append(-val.imag)
    return np.array(out, dtype=float)


def build_rhs(ref: RatFun, z_list) -> np.ndarray:
    """Moment values ``<w, a_i>`` over the U modes."""
    return _interp_values(ref, z_list)


def build_us_objective(ref: RatFun, p_list, v_list=()) -> np.ndarray:
    """``<w, mode>`` over the V then W modes (undershoot dual objective)."""
    return np.concatenate([_interp_values(ref, p_list), _interp_values(ref, v_list)])


def reference_nonnegative(terms, horizon: float, samples: int = 10_000) -> bool:
    """Sampled check of ``w(t) >= 0`` plus the sign of its dominant term."""
    if not terms:
        return True
    t = np.linspace(0.0, horizon, samples)
    w = time_eval(terms, t)
    scale = max(1.0, float(np.abs(w).max()))
    if np.any(w < -1e-12 * scale):
        return False
    # dominant term as t -> inf: largest real part, then highest power
    live = [tm for tm in terms if abs(tm.coeff) > 1e-14]
    if not live:
        return True
    top = max(live, key=lambda tm: (round(tm.pole.real, 12), tm.k))
    lead = [tm for tm in live if abs(tm.pole.real - top.pole.real) < 1e-12 and tm.k == top.k]
    if any(abs(tm.pole.imag) > 0 for tm in lead):
        return False
    return sum(tm.coeff.real for tm in lead) >= 0


def _rhp(roots, what):
    pts = []
    for r, m in roots:
        if abs(r.real) < AXIS_TOL * (1.0 + abs(r)):
            raise ImaginaryAxisError(f"{what} {r} lies on the imaginary axis")
        if r.real > 0:
            if m > 1:
                raise NotSimpleError(f"{what} {r} has multiplicity {m}")
            pts.append(complex(r))
    return pts


def validate_problem(plant: RatFun, ref: RatFun, envelope: Optional[Envelope] = None) -> ProblemData:
    """Check the standing assumptions and assemble the problem data."""
    theta_p = plant.relative_degree
    theta_w = ref.relative_degree
    if theta_w < 1:
        raise ImproperError("reference transform must be strictly proper")
    for p, _ in ref.poles():
        if p.real > AXIS_TOL * (1.0 + abs(p)):
            raise ValidationError(f"reference has an unstable pole at {p}")
    z_all = _rhp(plant.zeros(), "plant zero")
    p_all = _rhp(plant.poles(), "plant pole")
    v_all = _rhp(ref.zeros(), "reference zero")
    closure, alpha = classify_closure(theta_w, theta_p, ref)
    modes = build_modes(z_all, p_all, v_all)
    b = build_rhs(ref, z_all)
    us = build_us_objective(ref, p_all, v_all)
    terms = partial_fractions(ref)
    decays = [-p.real for p, _ in ref.poles() if p.real < 0] + [m.x for m in modes]
    horizon = 40.0 / min(decays) if decays else 40.0
    nonneg = reference_nonnegative(terms, horizon)
    if envelope is not None and closure == C0_ALPHA:
        lo0 = float(envelope.lower_at(0.0))
        hi0 = float(envelope.upper_at(0.0))
        if not (hi0 > alpha >= max(lo0, 0.0)):
            raise EnvelopeError(
                f"envelope incompatible with e(0) = {alpha}: need upper(0) > alpha >= max(lower(0), 0)")
    for arr in (b, us):
        arr.setflags(write=False)
    return ProblemData(
        plant=plant, reference=ref,
        plant_zeros=tuple(_reduce_conjugates(z_all)),
        plant_poles=tuple(_reduce_conjugates(p_all)),
        ref_zeros=tuple(_reduce_conjugates(v_all)),
        theta_p=theta_p, theta_w=theta_w, closure=closure, alpha=alpha,
        modes=tuple(modes), b_vec=b, us_obj=us, w_terms=tuple(terms),
        w_nonnegative=nonneg, envelope=envelope,
    )
