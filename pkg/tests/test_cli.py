import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from tracklim.cli import (
    EXIT_OK,
    EXIT_SOLVER,
    EXIT_VALIDATION,
    JobConfig,
    export_certificate_csv,
    main,
    run,
)
from tracklim.errors import ValidationError

FIRST_ORDER = {"plant": {"num": [-2, 1], "den": [-1, 1]}, "criteria": ["os", "ma", "fl", "pos"]}


def write(tmp_path, d, name="job.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return p


def test_config_round_trip():
    cfg = JobConfig.from_dict({**FIRST_ORDER, "envelope": {"t_bar": 1, "lower": -0.1, "upper": [[0, 2], [1, 3]]},
                               "options": {"tol": 1e-4, "max_grid": 5000, "horizon": 12},
                               "flags": {"gamma_reduce": True}})
    again = JobConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg and again.to_dict() == cfg.to_dict()
    assert cfg.criteria == ("OS", "MA", "FL", "POS")


def test_config_defaults_and_validation():
    cfg = JobConfig.from_dict({"plant": {"num": [1], "den": [1, 1]}})
    assert cfg.criteria == ("MA", "POS", "OS", "US", "FL")
    assert (cfg.ref_num, cfg.ref_den) == ((1.0,), (0.0, 1.0))
    for bad in ({}, {"plant": {"num": []}}, {"plant": {"num": [1], "den": ["x"]}},
                {"plant": {"num": [1], "den": [1, 1]}, "criteria": ["zz"]},
                {"plant": {"num": [1], "den": [1, 1]}, "options": {"tol": -1}},
                {"plant": {"num": [1], "den": [1, 1]}, "envelope": {"lower": 0}}):
        with pytest.raises(ValidationError):
            JobConfig.from_dict(bad)


def test_seed_depends_on_config():
    a = JobConfig.from_dict(FIRST_ORDER)
    b = JobConfig.from_dict({**FIRST_ORDER, "criteria": ["os"]})
    assert a.seed() == JobConfig.from_dict(FIRST_ORDER).seed() and a.seed() != b.seed()


def test_run_first_order():
    rep = run(JobConfig.from_dict(FIRST_ORDER))
    for crit, target in {"OS": 1, "MA": 2, "FL": 2, "POS": 1}.items():
        r = rep.results[crit]
        assert r.dual_value == pytest.approx(target, rel=1e-4)
        assert r.analytic_value == target
        assert r.gap >= -1e-6 and r.verified
    assert rep.problem["z"] == [[2.0, 0.0]] and rep.problem["gamma"] == 1.0
    assert rep.problem["closure"] == "C0" and rep.exit_code == EXIT_OK


def test_run_is_deterministic():
    cfg = JobConfig.from_dict({**FIRST_ORDER, "criteria": ["os", "ma"]})
    assert json.dumps(run(cfg).to_dict()) == json.dumps(run(cfg).to_dict())


def test_run_trivial_and_envelope():
    rep = run(JobConfig.from_dict({"plant": {"num": [2, 1], "den": [1, 1]}, "flags": {"no_primal": True}}))
    assert all(r.dual_value == 0.0 and r.certificate["coeffs"] == [] for r in rep.results.values())
    assert all(r.analytic_value is None for r in rep.results.values())
    rep = run(JobConfig.from_dict({"plant": {"num": [1], "den": [5, -2, 1]}, "criteria": ["os"],
                                   "envelope": {"t_bar": 1, "lower": -0.1, "upper": 2}}))
    r = rep.results["OS"]
    assert r.dual_value == 0.0 and r.primal_value <= 0.05


def test_gamma_reduce_flag():
    plant = {"num": list(np.polynomial.polynomial.polyfromroots([2, 0.5 + 5j, 0.5 - 5j]).real),
             "den": list(np.polynomial.polynomial.polyfromroots([1, -4, -5]).real)}
    rep = run(JobConfig.from_dict({"plant": plant, "criteria": ["os", "ma"],
                                   "flags": {"gamma_reduce": True, "no_primal": True}}))
    assert rep.results["OS"].diagnostics["gamma_reduced_modes"] == 2
    assert rep.results["OS"].dual_value == pytest.approx(1.0, rel=1e-6)
    assert "gamma_reduce_skipped" in rep.results["MA"].diagnostics


def test_per_criterion_failure_is_recorded():
    cfg = JobConfig.from_dict({"plant": {"num": [-2, 1], "den": [-1, 1]},
                               "reference": {"num": [1, -3], "den": [1, 2, 1]},
                               "criteria": ["os", "us"], "flags": {"no_primal": True}})
    rep = run(cfg)
    assert rep.results["OS"].verified
    assert "ReferenceSignError" in rep.results["US"].error
    assert rep.exit_code == EXIT_VALIDATION


def test_export_csv(tmp_path):
    rep = run(JobConfig.from_dict({**FIRST_ORDER, "criteria": ["os"]}))
    r = rep.results["OS"]
    path = export_certificate_csv(r.dual, tmp_path / "c.csv", r.primal)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "e_star", "e_primal"] and len(rows) == 2001
    t = np.array([float(x[0]) for x in rows[1:]])
    e = np.array([float(x[1]) for x in rows[1:]])
    assert t[0] == 0.0 and t[-1] == pytest.approx(r.dual.horizon) and np.all(np.diff(t) > 0)
    assert np.allclose(e, 2 * (np.exp(-2 * t) - np.exp(-t)), atol=1e-9)
    assert all(x[2] != "" for x in rows[1:])
    # round-trip precision
    assert float(rows[5][1]) == r.dual.certificate(np.array([float(rows[5][0])]))[0]


def test_export_csv_empty_and_no_primal(tmp_path):
    rep = run(JobConfig.from_dict({"plant": {"num": [2, 1], "den": [1, 1]}, "criteria": ["ma"],
                                   "flags": {"no_primal": True}}))
    path = export_certificate_csv(rep.results["MA"].dual, tmp_path / "e.csv")
    rows = list(csv.reader(path.open()))[1:]
    assert all(float(x[1]) == 0.0 and x[2] == "" for x in rows)


def test_export_csv_unwritable(tmp_path):
    rep = run(JobConfig.from_dict({"plant": {"num": [2, 1], "den": [1, 1]}, "criteria": ["ma"],
                                   "flags": {"no_primal": True}}))
    with pytest.raises(OSError):
        export_certificate_csv(rep.results["MA"].dual, tmp_path / "missing" / "x.csv")


def test_main_writes_report_and_certificates(tmp_path):
    job = write(tmp_path, FIRST_ORDER)
    out = tmp_path / "r.json"
    code = main([str(job), "--criteria", "os,pos", "--no-primal", "--json-out", str(out),
                 "--export-cert", str(tmp_path / "cert.csv"), "--tol", "1e-4"])
    assert code == EXIT_OK
    rep = json.loads(out.read_text())
    assert set(rep["results"]) == {"OS", "POS"} and rep["config"]["options"]["tol"] == 1e-4
    assert rep["results"]["OS"]["primal_value"] is None
    assert (tmp_path / "cert_os.csv").exists() and (tmp_path / "cert_pos.csv").exists()


def test_main_exit_codes(tmp_path, capsys):
    assert main([str(write(tmp_path, {"plant": {"num": [1, 0, 1], "den": [1, 2, 1]}}))]) == EXIT_VALIDATION
    assert "imaginary axis" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main([str(bad)]) == EXIT_VALIDATION
    assert main([str(tmp_path / "nope.json")]) == EXIT_VALIDATION
    tiny = write(tmp_path, {**FIRST_ORDER, "criteria": ["ma"], "options": {"max_grid": 600},
                            "flags": {"no_primal": True}}, "tiny.json")
    assert main([str(tiny)]) == EXIT_SOLVER


def test_module_entry_point(tmp_path):
    job = write(tmp_path, {"plant": {"num": [2, 1], "den": [1, 1]}, "criteria": ["os"]})
    proc = subprocess.run([sys.executable, "-m", "tracklim", str(job)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["OS"]["dual_value"] == 0.0
