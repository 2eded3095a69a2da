"""Closed-form limits for first-order plants and consistency checks.

For a plant with one real unstable zero ``z1`` and one real unstable pole
``p1 < z1`` tracking a unit step, every criterion has a closed form in
``h = p1 / (z1 - p1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dual import gamma_of
from .errors import ValidationError

__all__ = ["FirstOrderLimits", "first_order_limits", "gamma_of", "check_inequality_chain",
           "ma_closed_form", "fl_closed_form"]


@dataclass(frozen=True)
class FirstOrderLimits:
    h: float
    os: float
    ma: float
    fl: float
    pos: float = 1.0

    def as_dict(self):
        return {"OS": self.os, "MA": self.ma, "FL": self.fl, "POS": self.pos}


def ma_closed_form(h: float) -> float:
    """``1 / (1 - 2^{-1/h})``, accurate for large ``h``."""
    return -1.0 / math.expm1(-math.log(2.0) / h)


def fl_closed_form(h: float) -> float:
    """``(h+1)^{h+1} / (2 h^h)``; log-space for large ``h``."""
    if h > 50:
        # (h+1) * exp(h * log1p(1/h)) / 2
        return 0.5 * (h + 1.0) * math.exp(h * math.log1p(1.0 / h))
    return (h + 1.0) ** (h + 1.0) / (2.0 * h ** h)


def first_order_limits(z1: float, p1: float) -> FirstOrderLimits:
    """Optimal OS, MA, FL and POS for one real zero ``z1`` and pole ``p1``."""
    z1, p1 = float(z1), float(p1)
    if not (math.isfinite(z1) and math.isfinite(p1)) or p1 <= 0:
        raise ValidationError("first-order limits need finite z1 > p1 > 0")
    if z1 <= p1:
        raise ValidationError(f"first-order limits need z1 > p1 (got z1={z1}, p1={p1})")
    h = p1 / (z1 - p1)
    return FirstOrderLimits(h=h, os=h, ma=ma_closed_form(h), fl=fl_closed_form(h), pos=1.0)


def check_inequality_chain(values, tol: float = 0.0):
    """Violations of ``max(POS, OS) <= MA <= 2 FL <= 2 MA``.

    ``values`` maps criterion names (any case) to numbers; missing entries
    skip the comparisons that need them.  Returns a list of messages.
    """
    v = {str(k).upper(): float(x) for k, x in dict(values).items() if x is not None}
    out = []

    def need(*names):
        return all(n in v and math.isfinite(v[n]) for n in names)

    for name in ("POS", "OS"):
        if need(name, "MA") and v[name] > v["MA"] + tol:
            out.append(f"{name.lower()} <= ma violated: {v[name]:.6g} > {v['MA']:.6g}")
    if need("MA", "FL"):
        if v["MA"] > 2 * v["FL"] + tol:
            out.append(f"ma <= 2*fl violated: {v['MA']:.6g} > {2 * v['FL']:.6g}")
        if 2 * v["FL"] > 2 * v["MA"] + tol:
            out.append(f"2*fl <= 2*ma violated: {2 * v['FL']:.6g} > {2 * v['MA']:.6g}")
    return out
