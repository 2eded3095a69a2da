#!/usr/bin/env python
# coding: utf-8

# # Running jobs from JSON
#
# The `tracklim` command reads a JSON job, solves every requested criterion
# and prints a report. The same machinery is available as `tracklim.cli.run`.

# In[ ]:


import json
import subprocess
import sys
import tempfile
from pathlib import Path

from tracklim.cli import JobConfig, run

job = {
    "plant": {"num": [-1.0, 1.0], "den": [-2.0, 1.0]},   # (s - 1)/(s - 2)
    "reference": {"num": [1.0], "den": [0.0, 1.0]},
    "criteria": ["us", "os", "ma"],
}
report = run(JobConfig.from_dict(job))
print(json.dumps(report.problem, indent=1))
for crit, r in report.results.items():
    print(f"{crit:3s} dual={r.dual_value:.6f} primal={r.primal_value:.6f} gap={r.gap:.2e}")


# ## The same job through the command line

# In[ ]:


work = Path(tempfile.mkdtemp())
(work / "job.json").write_text(json.dumps(job))
proc = subprocess.run([sys.executable, "-m", "tracklim", str(work / "job.json"), "--criteria", "us",
                       "--no-primal", "--export-cert", str(work / "us.csv")],
                      capture_output=True, text=True)
print("exit status", proc.returncode)
print(json.loads(proc.stdout)["results"]["US"]["dual_value"])
print((work / "us.csv").read_text().splitlines()[:3])


# ## Invalid input gives exit status 2

# In[ ]:


(work / "bad.json").write_text(json.dumps({"plant": {"num": [1, 0, 1], "den": [1, 2, 1]}}))
proc = subprocess.run([sys.executable, "-m", "tracklim", str(work / "bad.json")],
                      capture_output=True, text=True)
print(proc.returncode, proc.stderr.strip())
