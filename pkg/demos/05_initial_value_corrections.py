#!/usr/bin/env python
# coding: utf-8

# # When the error starts at a fixed value
#
# With a strictly proper plant and a step reference, the output starts at 0,
# so the error starts at `e(0) = 1`. Every achievable error then has
# `MA >= 1`, `POS >= 1` and `FL >= 1/2` before any unstable dynamics are
# taken into account. The dual bounds include these terms.
#
# Below, two ways to evaluate the initial-value correction are compared with
# the constrained primal:
# - "derived": maximize the one-dimensional dual explicitly;
# - "shortcut": assume it vanishes except for fluctuation.

# In[ ]:


from tracklim import DualOptions, RatFun, solve_dual, solve_primal, validate_problem

plant = RatFun([1.0], [5.0, -2.0, 1.0])
for amp in (1.0, -1.0):
    pd = validate_problem(plant, RatFun([amp], [0.0, 1.0]))
    print(f"reference {amp:+g}/s, e(0) = {pd.alpha:+g}")
    for crit in ("MA", "POS", "OS", "FL"):
        derived = solve_dual(pd, crit).value
        short = solve_dual(pd, crit, DualOptions(sharp="shortcut")).value
        primal = solve_primal(pd, crit).value
        print(f"  {crit:4s} derived {derived:7.4f}   shortcut {short:7.4f}   primal {primal:7.4f}")


# The derived corrections match the primal values; the shortcut misses the
# initial jump for MA and POS, and has the wrong sign for FL when `e(0) < 0`.

# ## A plant without the jump
#
# A biproper stable minimum-phase plant such as `(s + 2)/(s + 1)` lets the
# error start anywhere, and every limit is zero.

# In[ ]:


pd = validate_problem(RatFun([2.0, 1.0], [1.0, 1.0]), RatFun([1.0], [0.0, 1.0]))
print({c: solve_dual(pd, c).value for c in ("MA", "POS", "OS", "US", "FL")})
pd = validate_problem(RatFun([1.0], [1.0, 1.0]), RatFun([1.0], [0.0, 1.0]))
print("1/(s+1):", {c: solve_dual(pd, c).value for c in ("MA", "POS", "OS", "US", "FL")})
