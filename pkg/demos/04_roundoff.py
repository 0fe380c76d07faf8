# # When dense solvers stop agreeing
#
# At N = 101 the Fig. 2 system has condition number ~2e15. Its exact solution
# is available from the spectrum; a dense factorisation returns something else.

# +
import numpy as np

from mas_lab import experiments as exp
from mas_lab import exterior as ex

rep = exp.roundoff_demo(101)
for k, v in rep.to_dict().items():
    print(f"{k:20s} {v}")
# -

# Plain LU and Cholesky lose accuracy differently; the dense dispatch picks
# Cholesky for this symmetric matrix.

p = ex.ExteriorCircularProblem(8.0, 10.0, 5.5, 101)
for method in ("lu", "cholesky"):
    print(method, ex.currents(p, "dense_solve", dense_method=method).currents[0])

# Tiny changes to the boundary data move the currents a lot and the potential hardly at all.

r = ex.perturbation_experiment(p.with_(N=81), 1e-12, seed=0)
print("current change  ", r.current_change)
print("potential change", r.potential_change)
