#!/usr/bin/env python
# coding: utf-8

# # Limits of performance for a first-order plant
#
# A plant with one unstable zero `z1` and one unstable pole `p1 < z1` has
# closed-form limits for overshoot, maximum amplitude, fluctuation and
# positive error when tracking a unit step. Everything depends on
# `h = p1 / (z1 - p1)`.
#
# This demo compares three numbers per criterion:
# - the closed form,
# - the certified dual lower bound,
# - the primal upper bound from an explicit piecewise-linear error signal.

# In[ ]:


import numpy as np

from tracklim import RatFun, first_order_limits, solve_dual, solve_primal, validate_problem

step = RatFun([1.0], [0.0, 1.0])


# ## One plant in detail
#
# `P(s) = (s - 2)/(s - 1)` gives `h = 1`.

# In[ ]:


pd = validate_problem(RatFun([-2.0, 1.0], [-1.0, 1.0]), step)
exact = first_order_limits(2.0, 1.0).as_dict()
print(f"{'crit':5s} {'closed form':>12s} {'dual':>12s} {'primal':>12s}")
for crit in ("OS", "MA", "FL", "POS"):
    d = solve_dual(pd, crit).value
    p = solve_primal(pd, crit).value
    print(f"{crit:5s} {exact[crit]:12.6f} {d:12.6f} {p:12.6f}")


# ## Sweeping h
#
# Moving the zero towards the pole makes `h` grow and every limit blow up.
# The dual tracks the closed forms across two decades.

# In[ ]:


print(f"{'z1':>6s} {'h':>8s} {'MA exact':>10s} {'MA dual':>10s} {'FL exact':>10s} {'FL dual':>10s}")
for z1 in (11.0, 4.0, 2.0, 1.5, 1.2, 1.1):
    pd = validate_problem(RatFun([-z1, 1.0], [-1.0, 1.0]), step)
    lim = first_order_limits(z1, 1.0)
    ma = solve_dual(pd, "MA").value
    fl = solve_dual(pd, "FL").value
    print(f"{z1:6.2f} {lim.h:8.3f} {lim.ma:10.5f} {ma:10.5f} {lim.fl:10.5f} {fl:10.5f}")


# ## The ordering of the criteria
#
# For every error signal `max(POS, OS) <= MA <= 2 FL <= 2 MA`. The closed
# forms obey the same chain for all `h`.

# In[ ]:


for h in np.logspace(-2, 2, 5):
    lim = first_order_limits(1.0 + 1.0 / h, 1.0)
    print(f"h={h:8.3f}  max(1,h)={max(1, h):9.4f}  MA={lim.ma:9.4f}  2FL={2 * lim.fl:9.4f}  2MA={2 * lim.ma:9.4f}")
