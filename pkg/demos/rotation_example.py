# A cubic potential seen from a rotating frame.
#
# W = (y1 - y2)^3 in the y-coordinates, x = U(t) y with U a rotation about the
# first axis.  The x-system picks up a vector potential, and g = U S U^T is a
# singular multiplier with eigenvalues 0, 1, 2.

import numpy as np

from emmetric import diagonalize_path, check_decoupling, integrate, verify_all
from emmetric.paperlib import sec5_build, sec5_rotation, sec5_y_system
from emmetric.paths import MatrixPath

sys, g = sec5_build("1", "t")
x = [0.3, -0.2, 0.5]
print("V(0.4, x) =", float(sys.V(0.4, x)))
print("A(0.4, x) =", [float(a(0.4, x)) for a in sys.A])
print("g(0.5) =\n", g(0.5))

report = verify_all(sys, g)
print("passed:", report.passed, "warnings:", report.warnings)

# recover the rotation numerically and check that the y-equations decouple
P, eigs, blocks = diagonalize_path(MatrixPath.from_function(g, 0.0, 1.0, 1e-2))
print("blocks:", blocks.to_dict()["blocks"])
print("cross-block residual:", check_decoupling(sys, P, blocks).residual)

# trajectories agree with the frame change
U = sec5_rotation("t")
x0, v0 = np.array([0.2, -0.1, 0.3]), np.array([0.1, 0.2, -0.1])
_, xs, _ = integrate(sys, x0, v0, 0.0, 1.0, 1e-3)
y0, ydot0 = U(0.0).T @ x0, U.derivative()(0.0).T @ x0 + U(0.0).T @ v0
_, ys, _ = integrate(sec5_y_system("1"), y0, ydot0, 0.0, 1.0, 1e-3)
print("|U(1)^T x(1) - y(1)|:", np.max(np.abs(U(1.0).T @ xs[-1] - ys[-1])))
