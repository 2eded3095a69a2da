#!/usr/bin/env python
# coding: utf-8

# # Dual certificates
#
# A dual value is a lower bound because of a certificate: a combination `e*`
# of the modes generated by the unstable poles and zeros. This demo looks at
# the certificates for `P(s) = (s - 2)/(s - 1)`, checks them independently
# and writes one to CSV for plotting.

# In[ ]:


from pathlib import Path
import tempfile

import numpy as np

from tracklim import RatFun, solve_dual, validate_problem, verify_certificate
from tracklim.cli import export_certificate_csv

pd = validate_problem(RatFun([-2.0, 1.0], [-1.0, 1.0]), RatFun([1.0], [0.0, 1.0]))
for m in pd.modes:
    print(m)


# ## Overshoot
#
# The overshoot certificate must be non-positive everywhere. Here it is
# `2 (e^{-2t} - e^{-t})`.

# In[ ]:


os_res = solve_dual(pd, "OS")
print("value", os_res.value, "coefficients", os_res.coeffs)
t = np.linspace(0, 8, 9)
print(np.c_[t, os_res.certificate(t), 2 * (np.exp(-2 * t) - np.exp(-t))])
print("sign violation and masses:", verify_certificate(pd, "OS", os_res.coeffs))


# ## Maximum amplitude
#
# The amplitude certificate changes sign once, at `t0 = ln 2`; its
# absolute integral is normalized to one.

# In[ ]:


ma_res = solve_dual(pd, "MA")
f = lambda s: float(ma_res.certificate(np.array([s]))[0])
print("value", ma_res.value)
print("sign just before/after ln 2:", np.sign(f(np.log(2) - 1e-3)), np.sign(f(np.log(2) + 1e-3)))
print("positive/negative mass:", ma_res.masses.positive, ma_res.masses.negative)


# ## A certificate with the wrong sign is rejected

# In[ ]:


try:
    verify_certificate(pd, "OS", [2.0, -1.9])
except Exception as exc:
    print(type(exc).__name__, "-", exc)


# ## CSV export for external plotting

# In[ ]:


out = Path(tempfile.mkdtemp()) / "os_certificate.csv"
export_certificate_csv(os_res, out)
print(out.read_text().splitlines()[:4])
