"""Real polynomials, rational functions and closed-form mode integrals.

Coefficient lists are in ascending degree order everywhere: ``coeffs[k]``
multiplies ``s**k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np

from .errors import (
    IllConditionedError,
    ImproperError,
    NumericalFailure,
    PoleProximityError,
    ValidationError,
)

CLUSTER_TOL = 1e-7
_EPS = np.finfo(float).eps


class Poly:
    """Polynomial with real coefficients, ascending order.

    Trailing (highest-degree) zeros are trimmed; the zero polynomial is ``[0]``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, Poly):
            coeffs = coeffs.coeffs
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).ravel()
        if c.size == 0:
            raise ValidationError("empty coefficient list (use [0] for the zero polynomial)")
        if not np.all(np.isfinite(c)):
            raise ValidationError("polynomial coefficients must be finite")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        self.coeffs = c
        self.coeffs.setflags(write=False)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def lead(self) -> float:
        return float(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    def __call__(self, s):
        s = np.asarray(s)
        out = np.zeros_like(s, dtype=np.result_type(s, float))
        for c in self.coeffs[::-1]:
            out = out * s + c
        return out if out.ndim else out[()]

    def abs_bound(self, s):
        """Horner sum of |coeff|*|s|^k, the natural scale of ``self(s)``."""
        r = np.abs(np.asarray(s))
        out = np.zeros_like(r, dtype=float)
        for c in np.abs(self.coeffs[::-1]):
            out = out * r + c
        return out if out.ndim else out[()]

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly([0.0])
        return Poly(self.coeffs[1:] * np.arange(1, self.coeffs.size))

    def __mul__(self, other):
        other = other if isinstance(other, Poly) else Poly(other)
        return Poly(np.convolve(self.coeffs, other.coeffs))

    def __eq__(self, other):
        return isinstance(other, Poly) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"Poly({self.coeffs.tolist()})"

    def roots(self, seed=0):
        return poly_roots(self, seed=seed)

    @classmethod
    def from_roots(cls, roots, lead=1.0):
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(np.real(c) * lead)


# ---------------------------------------------------------------------------
# root finding


def _aberth(a: np.ndarray, rng: np.random.Generator, maxiter: int = 500):
    """Aberth-Ehrlich simultaneous iteration on the monic polynomial ``a``.

    Returns the root estimates, or None if the iteration did not settle.
    """
    n = a.size - 1
    p = np.polynomial.Polynomial(a)
    dp = p.deriv()
    absa = np.abs(a)
    # Fujiwara-type radius, then a perturbed circle
    radius = 2.0 * max(abs(a[n - k] / a[n]) ** (1.0 / k) for k in range(1, n + 1))
    radius = max(radius, 1e-3)
    phase = 2 * np.pi * np.arange(n) / n + 0.4 + 0.1 * rng.standard_normal(n)
    z = 0.5 * radius * (1 + 0.05 * rng.standard_normal(n)) * np.exp(1j * phase)
    done = np.zeros(n, dtype=bool)
    for _ in range(maxiter):
        pz = p(z)
        # backward-error stopping test: |p(z)| at rounding level of its terms
        scale = np.polynomial.polynomial.polyval(np.abs(z), absa)
        done = np.abs(pz) <= 16 * _EPS * scale
        if done.all():
            return z
        dpz = dp(z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        recip = 1.0 / diff
        np.fill_diagonal(recip, 0.0)
        s = recip.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            w = ratio / (1.0 - ratio * s)
        w[done] = 0.0
        if not np.all(np.isfinite(w)):
            return None
        z = z - w
        if np.all(np.abs(w) <= 4 * _EPS * np.maximum(np.abs(z), 1.0)):
            return z
    return None


def _taylor_coeffs(a: np.ndarray, c: complex, k: int) -> np.ndarray:
    """First ``k`` Taylor coefficients of sum a_i s^i about ``s = c``."""
    out = np.zeros(k, dtype=complex)
    rem = np.asarray(a, dtype=complex)
    for j in range(k):
        if rem.size == 0:
            break
        # synthetic division by (s - c)
        q = np.zeros(max(rem.size - 1, 0), dtype=complex)
        acc = 0j
        for i in range(rem.size - 1, -1, -1):
            acc = acc * c + rem[i]
            if i > 0:
                q[i - 1] = acc
        out[j] = acc
        rem = q
    return out


def _cluster(a: np.ndarray, z: np.ndarray):
    """Merge root estimates into (root, multiplicity) pairs."""
    n = z.size
    label = np.arange(n)

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= CLUSTER_TOL * max(1.0, abs(z[i]), abs(z[j])):
                label[find(j)] = find(i)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = [list(g) for g in groups.values()]

    # multiple roots are only found to ~eps**(1/m); accept looser clusters
    # when the lower Taylor coefficients at the centre vanish
    merged = True
    while merged and len(clusters) > 1:
        merged = False
        centers = [z[g].mean() for g in clusters]
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = abs(centers[i] - centers[j])
                if d <= 1e-3 * max(1.0, abs(centers[i])):
                    if best is None or d < best[0]:
                        best = (d, i, j)
        if best is None:
            break
        _, i, j = best
        g = clusters[i] + clusters[j]
        k = len(g)
        c = _polish_multiple(a, z[g].mean(), k)
        tay = _taylor_coeffs(a, c, k)
        scale = _taylor_coeffs(np.abs(a), abs(c), k).real
        if np.all(np.abs(tay[: k - 1]) <= 1e-12 * np.maximum(scale[: k - 1], _EPS)):
            clusters[i] = g
            del clusters[j]
            z[g] = c
            merged = True
    return [(z[g].mean(), len(g)) for g in clusters]


def _polish_multiple(a, c, k, iters=8):
    """Newton on the (k-1)-th derivative, whose root is simple at a k-fold root."""
    dk = np.polynomial.polynomial.polyder(a, k - 1)
    dk1 = np.polynomial.polynomial.polyder(dk)
    for _ in range(iters):
        f = np.polynomial.polynomial.polyval(c, dk)
        fp = np.polynomial.polynomial.polyval(c, dk1)
        if fp == 0:
            break
        step = f / fp
        c = c - step
        if abs(step) <= 4 * _EPS * max(1.0, abs(c)):
            break
    return c


def _symmetrize(roots):
    """Enforce exact conjugate symmetry of (root, multiplicity) pairs."""
    out = []
    pending = list(roots)
    while pending:
        r, m = pending.pop(0)
        tol = 1e-9 * (1.0 + abs(r))
        if abs(r.imag) <= tol:
            out.append((complex(r.real, 0.0), m))
            continue
        # partner: closest remaining root to conj(r) with equal multiplicity
        cands = [(abs(q - np.conj(r)), i) for i, (q, mq) in enumerate(pending) if mq == m]
        d, i = min(cands) if cands else (np.inf, -1)
        if d > 1e-6 * (1.0 + abs(r)):
            # an unpaired root of a real polynomial is real; a small imaginary
            # part is conditioning noise from a tight cluster
            if abs(r.imag) <= 1e-6 * (1.0 + abs(r)):
                out.append((complex(r.real, 0.0), m))
                continue
            raise NumericalFailure(f"root {r} has no conjugate partner within tolerance")
        q, _ = pending.pop(i)
        avg = 0.5 * (r + np.conj(q))
        if avg.imag < 0:
            avg = np.conj(avg)
        out.append((complex(avg), m))
        out.append((complex(np.conj(avg)), m))
    out.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return out


def poly_roots(p: Poly, seed=0, restarts: int = 6):
    """Roots of a real polynomial with multiplicities.

    Roots closer than ``CLUSTER_TOL`` (relative) are merged, and complex roots
    are returned in exactly conjugate pairs.

    Parameters
    ----------
    p : Poly
        Degree must be at least one.
    seed : int or numpy Generator
        Seeds the random perturbation of the starting circle and restarts.

    Returns
    -------
    list of (complex, int)
        Distinct roots and multiplicities, sorted by real then imaginary part.
    """
    p = p if isinstance(p, Poly) else Poly(p)
    if p.degree < 1:
        raise ValidationError("poly_roots needs degree >= 1")
    a = p.coeffs
    nz0 = int(np.flatnonzero(a)[0])  # exact roots at the origin
    a = a[nz0:] / a[-1]
    roots = []
    if a.size > 1:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        z = None
        for _ in range(restarts):
            z = _aberth(a, rng)
            if z is not None:
                break
        if z is None:
            raise NumericalFailure(f"root iteration did not converge for {p!r}")
        roots = _cluster(a, z)
    if nz0:
        roots.append((0j, nz0))
    return _symmetrize(roots)


def expand_roots(roots):
    return [r for r, m in roots for _ in range(m)]


# ---------------------------------------------------------------------------
# rational functions


class RatFun:
    """Ratio ``num/den`` of real polynomials."""

    def __init__(self, num, den, seed=0):
        self.num = num if isinstance(num, Poly) else Poly(num)
        self.den = den if isinstance(den, Poly) else Poly(den)
        if self.den.is_zero():
            raise ValidationError("denominator is the zero polynomial")
        self.seed = seed
        self._zeros = None
        self._poles = None

    def __repr__(self):
        return f"RatFun({self.num.coeffs.tolist()}, {self.den.coeffs.tolist()})"

    def __call__(self, s):
        return rat_eval(self, s)

    def scaled(self, k: float) -> "RatFun":
        return RatFun(self.num.coeffs * k, self.den, seed=self.seed)

    def zeros(self):
        if self._zeros is None:
            self._zeros = [] if self.num.degree < 1 else poly_roots(self.num, seed=self.seed)
        return self._zeros

    def poles(self):
        if self._poles is None:
            self._poles = [] if self.den.degree < 1 else poly_roots(self.den, seed=self.seed)
        return self._poles

    @property
    def relative_degree(self) -> int:
        return relative_degree(self)

    def common_roots(self, tol=CLUSTER_TOL):
        out = []
        for z, _ in self.zeros():
            for p, _ in self.poles():
                if abs(z - p) <= tol * max(1.0, abs(z)):
                    out.append(z)
        return out

    def markov(self, count: int) -> np.ndarray:
        """Coefficients h_1..h_count of the expansion sum h_j s^-j at infinity.

        For a strictly proper transform of a time signal, ``h_{j+1}`` is the
        j-th derivative of the signal at ``0+``.
        """
        n = self.num.coeffs
        d = self.den.coeffs
        nd = d.size - 1
        # num(s) = den(s) * sum_j h_j s^-j, matched from the top power down
        h = np.zeros(count + 1)
        for j in range(count + 1):
            # coefficient of s^(nd - j)
            k = nd - j
            target = n[k] if 0 <= k < n.size else 0.0
            acc = sum(d[nd - i] * h[j - i] for i in range(1, j + 1) if nd - i >= 0)
            h[j] = (target - acc) / d[nd]
        if abs(h[0]) > 1e-12 * max(1.0, np.abs(n).max()):
            raise ImproperError("transform is not strictly proper")
        return h[1:]


def rat_eval(R: RatFun, s):
    """Evaluate ``R`` at (complex) ``s`` by Horner's rule."""
    den = R.den(s)
    tiny = 1e-13 * R.den.abs_bound(s)
    if np.any(np.abs(den) <= tiny):
        raise PoleProximityError(f"evaluation point {s} is at a pole of {R!r}")
    return R.num(s) / den


def relative_degree(R: RatFun) -> int:
    """deg(den) - deg(num); negative values (improper) are rejected."""
    if R.num.is_zero():
        raise ValidationError("relative degree of the zero function is undefined")
    r = R.den.degree - R.num.degree
    if r < 0:
        raise ImproperError(f"{R!r} is improper (relative degree {r})")
    return r


@dataclass(frozen=True)
class PFTerm:
    """One term ``coeff * t**k * exp(pole*t)`` of an inverse Laplace transform."""

    pole: complex
    k: int
    coeff: complex


def partial_fractions(R: RatFun, sep_tol: float = 1e-5):
    """Time-domain partial-fraction terms of a strictly proper ``R``.

    Poles closer than ``sep_tol`` (relative) without having been merged into a
    multiple root make the residues meaningless and raise
    :class:`IllConditionedError`.
    """
    if R.num.is_zero():
        return []
    if R.num.degree >= R.den.degree:
        raise ImproperError("partial_fractions needs a strictly proper function")
    poles = R.poles()
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            pi, pj = poles[i][0], poles[j][0]
            if abs(pi - pj) <= sep_tol * max(1.0, abs(pi)):
                raise IllConditionedError(f"poles {pi} and {pj} are too close to separate")
    lead = R.den.lead
    terms = []
    for idx, (lam, m) in enumerate(poles):
        if lam.imag < 0:
            continue
        # g(s) = num(s) / (lead * prod_{other} (s - p)^mp), Taylor at lam
        num_t = _taylor_coeffs(R.num.coeffs, lam, m)
        den_poly = np.array([lead + 0j])
        for jdx, (p, mp) in enumerate(poles):
            if jdx == idx:
                continue
            for _ in range(mp):
                den_poly = np.convolve(den_poly, [-p, 1.0])
        den_t = _taylor_coeffs(den_poly, lam, m)
        g = np.zeros(m, dtype=complex)
        for r in range(m):
            acc = num_t[r] - sum(g[i] * den_t[r - i] for i in range(r))
            g[r] = acc / den_t[0]
        # g[r] multiplies 1/(s-lam)^(m-r)  <->  t^(m-r-1) e^(lam t)/(m-r-1)!
        for r in range(m):
            k = m - r - 1
            c = g[r] / factorial(k)
            if lam.imag == 0:
                terms.append(PFTerm(complex(lam.real, 0.0), k, complex(c.real, 0.0)))
            else:
                terms.append(PFTerm(lam, k, c))
                terms.append(PFTerm(np.conj(lam), k, np.conj(c)))
    _check_pf(R, terms)
    return terms


def _check_pf(R, terms, tol=1e-8):
    probes = [0.7 + 1.3j, -0.4 + 2.9j, 3.1 - 0.2j]
    mag = max([1.0] + [abs(t.pole) for t in terms])
    for s0 in probes:
        s = s0 * mag
        exact = R(s)
        approx = sum(t.coeff * factorial(t.k) / (s - t.pole) ** (t.k + 1) for t in terms)
        scale = sum(abs(t.coeff * factorial(t.k) / (s - t.pole) ** (t.k + 1)) for t in terms)
        if abs(exact - approx) > tol * max(scale, abs(exact), 1e-300):
            raise IllConditionedError("partial-fraction expansion failed its residual check")


def time_eval(terms, t):
    """Evaluate Re sum c t^k e^(pole t) at times ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for term in terms:
        out = out + term.coeff * t**term.k * np.exp(term.pole * t)
    out = out.real
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# modes e^{-xt} cos(yt), e^{-xt} sin(yt)


def mode_mass(x: float, y: float, kind: str) -> float:
    """Integral over [0, inf) of e^{-xt}cos(yt) (kind 'cos') or e^{-xt}sin(yt)."""
    if not x > 0:
        raise ValidationError(f"mode decay rate must be positive, got {x}")
    r2 = x * x + y * y
    if kind == "cos":
        return x / r2
    if kind == "sin":
        return y / r2
    raise ValidationError(f"unknown mode kind {kind!r}")


def mode_primitive(x, y, kind, t):
    """Antiderivative of the mode that vanishes at t = +inf."""
    lam = complex(x, -y)
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        val = np.where(np.isinf(t), 0.0, -np.exp(-lam * np.where(np.isinf(t), 0.0, t)) / lam)
    return val.real if kind == "cos" else val.imag


def mode_integral(x, y, kind, t0, t1):
    """Closed-form integral of the mode over [t0, t1] (t1 may be inf)."""
    return mode_primitive(x, y, kind, t1) - mode_primitive(x, y, kind, t0)
