#!/usr/bin/env python
# coding: utf-8

# # Oscillatory modes that cannot matter for overshoot
#
# Let gamma be the smallest unstable pole or zero on the positive real axis.
# Complex poles and zeros that decay slower than gamma give modes that never
# appear in an optimal overshoot certificate. Dropping them leaves the
# optimal overshoot unchanged.
#
# The plant below adds a lightly damped zero pair `0.5 +- 5i` (and two
# stable poles) to the `(s - 2)/(s - 1)` example. Its overshoot limit stays 1.

# In[ ]:


import numpy as np

from tracklim import RatFun, gamma_of, reduce_by_gamma, solve_dual, validate_problem

num = np.polynomial.polynomial.polyfromroots([2, 0.5 + 5j, 0.5 - 5j]).real
den = np.polynomial.polynomial.polyfromroots([1, -4, -5]).real
pd = validate_problem(RatFun(num, den), RatFun([1.0], [0.0, 1.0]))
print("gamma =", gamma_of(pd))
print("modes:", [(m.x, m.y, m.kind, m.subspace) for m in pd.modes])


# In[ ]:


reduced = reduce_by_gamma(pd)
print("kept:", [(m.x, m.y, m.kind, m.subspace) for m in reduced.modes])
full = solve_dual(pd, "OS")
red = solve_dual(reduced, "OS")
print("OS full   ", full.value, full.coeffs)
print("OS reduced", red.value, red.coeffs)


# ## The reduction is specific to overshoot and undershoot
#
# The oscillatory zero does change the amplitude limit, so reducing before
# an MA solve is refused.

# In[ ]:


print("MA with the oscillatory zero:", solve_dual(pd, "MA").value)
print("MA of (s-2)/(s-1):          ", solve_dual(validate_problem(RatFun([-2.0, 1.0], [-1.0, 1.0]),
                                                                  RatFun([1.0], [0.0, 1.0])), "MA").value)
try:
    reduce_by_gamma(pd, "MA")
except Exception as exc:
    print(type(exc).__name__, "-", exc)
