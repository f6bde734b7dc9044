# Two-dimensional systems with a rotating magnetic field.
#
# sigma(t) drives the rotation; k(t) and m(t) set the quadratic potential.
# The multiplier is known in closed form, so the Lax flow can be compared
# against it directly, and the eigenvector transformation splits the system.

import numpy as np

from emmetric import check_decoupling, solve_lax, verify_all
from emmetric.paperlib import N2Family, n2_build

fam = N2Family(sigma="0.6 + 0.2*sin(t)", k="1 + 0.3*t", m="2 - cos(t)", A=1.0, B=1.2, C=3.0)
window = fam.safe_window(0.0, 1.0)
print("safe window:", window)

sys, g, T = n2_build(fam, window=window)
print("g(t0) =\n", np.asarray(fam.multiplier(window[0]), float))
print("eigenvalues:", fam.eigenvalues())

# the Lax flow started from g(t0) reproduces the closed form
t0, t1 = window
path = solve_lax(lambda t: np.asarray(sys.connection(t, [0.0, 0.0]), float),
                 np.asarray(fam.multiplier(t0), float), (t0, t1), 1e-3)
closed = np.array([np.asarray(fam.multiplier(t), float) for t in path.times])
print("max |lax - closed form|:", np.max(np.abs(path.values - closed)))

report = verify_all(sys, g)
print(report.to_json())

dec = check_decoupling(sys, T, fam.transform_blocks(), orthogonal=False)
print("cross-block residual:", dec.residual)

# nudge the coupling and watch the potential condition fail
bad_sys, bad_g, _ = n2_build(N2Family(sigma=fam.sigma, k=fam.k, m=fam.m, A=fam.A, B=fam.B,
                                      C=fam.C, l_perturbation=1e-2), window=window)
print("perturbed:", verify_all(bad_sys, bad_g).passed)
