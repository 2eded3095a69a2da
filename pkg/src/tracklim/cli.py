"""Command-line front end.

Reads a JSON job file, runs the requested criteria through the dual (lower
bound) and primal (upper bound) solvers and writes a JSON report::

    {
      "plant":     {"num": [...], "den": [...]},    # ascending powers of s
      "reference": {"num": [1], "den": [0, 1]},     # unit step 1/s
      "criteria":  ["os", "ma", "fl", "pos", "us"],
      "envelope":  {"t_bar": 1, "lower": -0.1, "upper": 2},         # optional
      "options":   {"tol": 1e-5, "max_grid": 40000, "horizon": null},
      "flags":     {"gamma_reduce": false, "no_primal": false}
    }

Exit status: 0 when every criterion produced a verified result, 2 for
invalid input, 3 for a solver failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .analytic import first_order_limits, gamma_of
from .dual import ALL_CRITERIA, Criterion, DualOptions, dual_horizon, reduce_by_gamma, solve_dual
from .errors import NumericalFailure, TracklimError, ValidationError
from .primal import PrimalOptions, solve_primal
from .problem import Envelope, validate_problem
from .ratfun import Poly, RatFun

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

GAP_TOL = 1e-6
CSV_ROWS = 2000


# ---------------------------------------------------------------------------
# job configuration


def _coeffs(values, what):
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a list of numbers") from None
    if not out:
        raise ValidationError(f"{what} is empty")
    return out


def _breaks(spec, what):
    if isinstance(spec, (int, float)):
        return float(spec)
    try:
        return tuple((float(t), float(v)) for t, v in spec)
    except (TypeError, ValueError):
        raise ValidationError(f"envelope {what} must be a number or [[t, value], ...]") from None


@dataclass(frozen=True)
class JobConfig:
    plant_num: tuple
    plant_den: tuple
    ref_num: tuple = (1.0,)
    ref_den: tuple = (0.0, 1.0)
    criteria: tuple = tuple(c.value for c in ALL_CRITERIA)
    envelope: Optional[dict] = None
    tol: float = 1e-5
    max_grid: int = 40000
    horizon: Optional[float] = None
    gamma_reduce: bool = False
    no_primal: bool = False

    def __post_init__(self):
        for name in ("plant_num", "plant_den", "ref_num", "ref_den"):
            object.__setattr__(self, name, _coeffs(getattr(self, name), name.replace("_", " ")))
        crits = tuple(Criterion.parse(c).value for c in self.criteria)
        if not crits:
            raise ValidationError("criteria list is empty")
        object.__setattr__(self, "criteria", tuple(dict.fromkeys(crits)))
        if self.envelope is not None:
            env = dict(self.envelope)
            if "t_bar" not in env:
                raise ValidationError("envelope needs t_bar")
            object.__setattr__(self, "envelope", {
                "t_bar": float(env["t_bar"]),
                "lower": _breaks(env.get("lower", -math.inf), "lower"),
                "upper": _breaks(env.get("upper", math.inf), "upper"),
            })
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ValidationError("tol must be positive")
        if int(self.max_grid) < 16:
            raise ValidationError("max_grid must be at least 16")
        object.__setattr__(self, "max_grid", int(self.max_grid))
        if self.horizon is not None:
            if not float(self.horizon) > 0:
                raise ValidationError("horizon must be positive")
            object.__setattr__(self, "horizon", float(self.horizon))

    def to_dict(self):
        env = None
        if self.envelope is not None:
            env = {k: (v if isinstance(v, float) else [list(p) for p in v])
                   for k, v in self.envelope.items()}
        return {
            "plant": {"num": list(self.plant_num), "den": list(self.plant_den)},
            "reference": {"num": list(self.ref_num), "den": list(self.ref_den)},
            "criteria": list(self.criteria),
            "envelope": env,
            "options": {"tol": self.tol, "max_grid": self.max_grid, "horizon": self.horizon},
            "flags": {"gamma_reduce": self.gamma_reduce, "no_primal": self.no_primal},
        }

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "plant" not in d:
            raise ValidationError("job config needs a 'plant' entry")
        try:
            plant = d["plant"]
            ref = d.get("reference") or {"num": [1.0], "den": [0.0, 1.0]}
            opts = d.get("options") or {}
            flags = d.get("flags") or {}
            return cls(
                plant_num=plant["num"], plant_den=plant["den"],
                ref_num=ref["num"], ref_den=ref["den"],
                criteria=d.get("criteria") or [c.value for c in ALL_CRITERIA],
                envelope=d.get("envelope"),
                tol=float(opts.get("tol", 1e-5)),
                max_grid=opts.get("max_grid", 40000),
                horizon=opts.get("horizon"),
                gamma_reduce=bool(flags.get("gamma_reduce", False)),
                no_primal=bool(flags.get("no_primal", False)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed job config: {exc}") from None

    @classmethod
    def from_json(cls, text: str):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"job file is not valid JSON: {exc}") from None

    def seed(self) -> int:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return int.from_bytes(hashlib.sha256(blob).digest()[:4], "little")


# ---------------------------------------------------------------------------
# report


def _num(x):
    """JSON-safe float (non-finite values become strings)."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _points(pts):
    return [[_num(p.real), _num(p.imag)] for p in pts]


@dataclass
class CriterionReport:
    criterion: str
    dual_value: Optional[float] = None
    primal_value: Optional[float] = None
    gap: Optional[float] = None
    analytic_value: Optional[float] = None
    corrected: bool = False
    certificate: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    error: Optional[str] = None
    error_kind: Optional[str] = None
    dual: object = None
    primal: object = None

    @property
    def verified(self) -> bool:
        if self.error is not None or self.dual_value is None:
            return False
        return self.gap is None or self.gap >= -GAP_TOL * max(1.0, abs(self.dual_value))

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "dual_value": _num(self.dual_value),
            "primal_value": _num(self.primal_value),
            "gap": _num(self.gap),
            "analytic_value": _num(self.analytic_value),
            "corrected": self.corrected,
            "verified": self.verified,
            "certificate": self.certificate,
            "diagnostics": self.diagnostics,
            "error": self.error,
        }


@dataclass
class Report:
    config: JobConfig
    problem: dict
    results: dict

    @property
    def exit_code(self) -> int:
        kinds = {r.error_kind for r in self.results.values() if not r.verified}
        if not kinds:
            return EXIT_OK
        return EXIT_VALIDATION if "validation" in kinds else EXIT_SOLVER

    def values(self, which="dual"):
        return {k: getattr(r, f"{which}_value") for k, r in self.results.items()}

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "problem": self.problem,
            "results": {k: r.to_dict() for k, r in self.results.items()},
            "exit_code": self.exit_code,
        }


def build_problem(config: JobConfig):
    seed = config.seed()
    plant = RatFun(Poly(config.plant_num), Poly(config.plant_den), seed=seed)
    ref = RatFun(Poly(config.ref_num), Poly(config.ref_den), seed=seed)
    env = None
    if config.envelope is not None:
        env = Envelope(config.envelope["t_bar"], config.envelope["lower"], config.envelope["upper"])
    return validate_problem(plant, ref, env)


def _is_unit_step(ref: RatFun) -> bool:
    num, den = ref.num.coeffs, ref.den.coeffs
    return (num.size == 1 and den.size == 2 and den[0] == 0.0 and den[1] != 0.0
            and num[0] / den[1] == 1.0)


def first_order_family(pd):
    """``(z1, p1)`` when the problem has the closed-form first-order shape."""
    z, p = pd.plant_zeros, pd.plant_poles
    if (len(z) == 1 and len(p) == 1 and not pd.ref_zeros and z[0].imag == 0
            and p[0].imag == 0 and z[0].real > p[0].real and _is_unit_step(pd.reference)):
        return z[0].real, p[0].real
    return None


def problem_echo(pd) -> dict:
    return {
        "z": _points(pd.plant_zeros),
        "p": _points(pd.plant_poles),
        "v": _points(pd.ref_zeros),
        "theta_p": pd.theta_p,
        "theta_w": pd.theta_w,
        "closure": pd.closure,
        "alpha": _num(pd.alpha),
        "gamma": _num(gamma_of(pd)),
        "n_modes": pd.n_modes,
    }


def _run_one(pd, crit: Criterion, config: JobConfig, analytic) -> CriterionReport:
    rep = CriterionReport(crit.value)
    diag = rep.diagnostics
    if analytic is not None and crit is not Criterion.US:
        rep.analytic_value = analytic.as_dict()[crit.value]
    try:
        dpd = pd
        if config.gamma_reduce:
            if crit in (Criterion.OS, Criterion.US) and not pd.ref_zeros:
                dpd = reduce_by_gamma(pd, crit)
                diag["gamma_reduced_modes"] = pd.n_modes - dpd.n_modes
            else:
                diag["gamma_reduced_modes"] = 0
                diag["gamma_reduce_skipped"] = "reduction applies to OS/US with a minimum-phase reference"
        opts = DualOptions(tol=config.tol, max_grid=config.max_grid, horizon=config.horizon)
        d = solve_dual(dpd, crit, opts)
        rep.dual = d
        rep.dual_value = d.value
        rep.corrected = d.corrected
        rep.certificate = {
            "coeffs": [_num(c) for c in d.coeffs],
            "modes": [[m.x, m.y, m.kind, m.subspace] for m in d.modes],
            "mass_positive": _num(d.masses.positive),
            "mass_negative": _num(d.masses.negative),
            "max_sign_violation": _num(d.max_sign_violation),
        }
        diag.update({
            "dual_grid_points": d.grid_stats[0],
            "dual_refinements": d.grid_stats[1],
            "dual_horizon": _num(d.horizon),
            "dual_grid_value": _num(d.grid_value),
            "correction": _num(d.correction),
        })
        if pd.envelope is not None:
            diag["dual_note"] = "dual bound ignores the envelope (still a valid lower bound)"
        if not config.no_primal:
            popts = PrimalOptions(horizon=config.horizon)
            pr = solve_primal(pd, crit, opts=popts)
            rep.primal = pr
            rep.primal_value = pr.value
            rep.gap = pr.value - d.value
            diag.update({
                "primal_nodes": int(pr.signal.grid.size),
                "primal_horizon": _num(pr.horizon),
                "primal_moment_residual": _num(pr.moment_residual),
                "primal_converged": pr.converged,
                "primal_history": [_num(v) for v in pr.history],
            })
    except ValidationError as exc:
        rep.error, rep.error_kind = f"{type(exc).__name__}: {exc}", "validation"
    except (NumericalFailure, TracklimError, ArithmeticError) as exc:
        rep.error, rep.error_kind = f"{type(exc).__name__}: {exc}", "solver"
    if rep.error is None and not rep.verified:
        rep.error_kind = "solver"
        rep.error = f"negative gap {rep.gap:.3e}"
    return rep


def run(config: JobConfig) -> Report:
    """Solve every requested criterion; failures are recorded per criterion."""
    pd = build_problem(config)
    fam = first_order_family(pd)
    analytic = first_order_limits(*fam) if fam else None
    crits = [Criterion.parse(c) for c in config.criteria]
    with ThreadPoolExecutor(max_workers=len(crits)) as pool:
        futures = [pool.submit(_run_one, pd, c, config, analytic) for c in crits]
        reports = [f.result() for f in futures]
    return Report(config, problem_echo(pd), {r.criterion: r for r in reports})


# ---------------------------------------------------------------------------
# certificate export


def certificate_times(horizon: float, rows: int = CSV_ROWS) -> np.ndarray:
    """``rows`` sample times on ``[0, horizon]``: zero, then log-spaced."""
    return np.concatenate([[0.0], np.logspace(math.log10(horizon) - 6, math.log10(horizon), rows - 1)])


def export_certificate_csv(result, path, primal=None) -> Path:
    """Write ``t,e_star,e_primal`` samples of a dual certificate (and primal signal)."""
    path = Path(path)
    if result.modes:
        horizon = result.horizon or dual_horizon(result.modes)
    elif primal is not None:
        horizon = primal.horizon
    else:
        horizon = 10.0
    t = certificate_times(horizon)
    e_star = result.certificate(t)
    e_pr = primal.signal(t) if primal is not None else None
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "e_star", "e_primal"])
        for k in range(t.size):
            w.writerow([repr(float(t[k])), repr(float(e_star[k])),
                        repr(float(e_pr[k])) if e_pr is not None else ""])
    return path


def _cert_path(base: Path, crit: str, many: bool) -> Path:
    if not many:
        return base
    return base.with_name(f"{base.stem}_{crit.lower()}{base.suffix or '.csv'}")


# ---------------------------------------------------------------------------
# entry point


def _parser():
    ap = argparse.ArgumentParser(prog="tracklim", description=(
        "Lower (dual) and upper (primal) bounds on the best achievable tracking "
        "error of a SISO plant."))
    ap.add_argument("config", help="JSON job file ('-' for stdin)")
    ap.add_argument("--criteria", help="comma-separated subset of ma,pos,os,us,fl")
    ap.add_argument("--no-primal", action="store_true", help="skip the primal upper bound")
    ap.add_argument("--gamma-reduce", action="store_true",
                    help="drop slowly decaying oscillatory modes before OS/US duals")
    ap.add_argument("--tol", type=float, help="relative refinement tolerance of the dual")
    ap.add_argument("--export-cert", metavar="PATH",
                    help="write certificate samples as CSV (one file per criterion)")
    ap.add_argument("--json-out", metavar="PATH", help="write the report here instead of stdout")
    return ap


def load_config(args) -> JobConfig:
    text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text()
    d = json.loads(text)
    if not isinstance(d, dict):
        raise ValidationError("job file must hold a JSON object")
    if args.criteria:
        d["criteria"] = [c.strip() for c in args.criteria.split(",") if c.strip()]
    flags = dict(d.get("flags") or {})
    if args.no_primal:
        flags["no_primal"] = True
    if args.gamma_reduce:
        flags["gamma_reduce"] = True
    d["flags"] = flags
    if args.tol is not None:
        d["options"] = {**(d.get("options") or {}), "tol": args.tol}
    return JobConfig.from_dict(d)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args)
        report = run(config)
    except (ValidationError, json.JSONDecodeError) as exc:
        print(f"tracklim: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"tracklim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TracklimError as exc:
        print(f"tracklim: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = json.dumps(report.to_dict(), indent=2)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    else:
        print(text)
    if args.export_cert:
        ok = [r for r in report.results.values() if r.dual is not None]
        for r in ok:
            export_certificate_csv(r.dual, _cert_path(Path(args.export_cert), r.criterion,
                                                      len(config.criteria) > 1), r.primal)
    for r in report.results.values():
        if r.error:
            print(f"tracklim: {r.criterion}: {r.error}", file=sys.stderr)
    return report.exit_code
