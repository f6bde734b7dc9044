# A three-dimensional family with a doubly degenerate multiplier.
#
# The multiplier has eigenvalues (c2, c2, c2 - c1 - 1) and the magnetic field
# is built from an arbitrary f(x1, x2).  The structural identities hold for
# any a(t); a potential split as U(t, u, v) + Z(t, z) only passes the full
# check when a is constant.

import numpy as np

from emmetric import verify_all
from emmetric.paperlib import N3Family, curl_residuals, n3_build, n3_dotg_residuals
from emmetric.model import sample_cloud

for a in ("0.4", "0.5*sin(t)"):
    fam = N3Family(a=a, c1=1.0, c2=3.0, f="x1*x2")
    print(f"a(t) = {a}")
    print("  gdot residuals:", np.max(n3_dotg_residuals(fam, np.linspace(0, 1, 11))))
    print("  curl residuals:", np.max(curl_residuals(fam, sample_cloud(3, 10, seed=0))))
    sys, g, _ = n3_build(fam, "x1^2*x2 + x2^2", "x1^3")
    report = verify_all(sys, g, samples=10)
    print("  verify:", report.passed, {r.condition: f"{r.residual:.2e}" for r in report.results})
