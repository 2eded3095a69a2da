#!/usr/bin/env python
# coding: utf-8

# # Trading overshoot against rise time
#
# `P(s) = 1/(s^2 - 2s + 5)` has an unstable complex pole pair and no unstable
# zeros. Without further requirements, overshoot can be made arbitrarily
# small: the dual bound is 0.
#
# Suppose the error must stay in `[-0.1, 2]` up to `t = 1`. The primal
# problem with that envelope still finds signals without overshoot: an
# envelope that admits the initial error costs nothing when the plant has
# no unstable zeros.

# In[ ]:


import numpy as np

from tracklim import Envelope, RatFun, solve_dual, solve_primal, validate_problem

pd = validate_problem(RatFun([1.0], [5.0, -2.0, 1.0]), RatFun([1.0], [0.0, 1.0]))
print("closure:", pd.closure, "initial error:", pd.alpha)
print("unconstrained OS dual:", solve_dual(pd, "OS").value)


# In[ ]:


env = Envelope(1.0, -0.1, 2.0)
res = solve_primal(pd, "OS", env)
print("constrained OS primal:", res.value, "on", res.signal.grid.size, "nodes")
t = np.linspace(0, 3, 7)
print(np.c_[t, res.signal(t) + 0.0])


# ## Tighter envelopes
#
# Requiring the error to fall below 0.2 ever earlier does not change this:
# the unstable poles only constrain moments of the error, and a fast,
# monotone decay can meet them.

# In[ ]:


for t_bar in (1.0, 0.5, 0.25):
    env = Envelope(t_bar, [(0.0, -0.1), (t_bar, -0.1)], [(0.0, 2.0), (t_bar, 0.2)])
    print(f"error <= 0.2 by t={t_bar}: OS primal = {solve_primal(pd, 'OS', env).value:.4f}")
