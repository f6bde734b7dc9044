# Building coupled systems from simple pieces.
#
# Two independent one-dimensional oscillators are mixed by a time-dependent
# rotation; the result is a genuinely coupled system whose multiplier is known.
# A second route starts from a velocity-free potential W and a rotation U.

import numpy as np

from emmetric import (compose_coupled, construct_system, diagonalize_path, check_decoupling,
                      verify_all)
from emmetric.model import EMSystem
from emmetric.paths import MatrixFunction, MatrixPath

P = MatrixFunction.from_expressions([["cos(t)", "-sin(t)"], ["sin(t)", "cos(t)"]])
subs = [EMSystem(1, "0.5*x1^2", ["0"]), EMSystem(1, "x1^4", ["0"])]
sys, g = compose_coupled(subs, [1.0, 3.0], P)
print("V and A at t=0.3, x=(0.2, -0.1):", float(sys.V(0.3, [0.2, -0.1])),
      [float(a(0.3, [0.2, -0.1])) for a in sys.A])
print("verify:", verify_all(sys, g).passed)

Q, eigs, blocks = diagonalize_path(MatrixPath.from_function(g, 0.0, 1.0, 1e-2))
print("recovered blocks:", blocks.to_dict()["blocks"],
      "residual:", check_decoupling(sys, Q, blocks).residual)

U = MatrixFunction.from_expressions([["cos(t^2)", "-sin(t^2)"], ["sin(t^2)", "cos(t^2)"]])
sys2, g2 = construct_system("x1^2 + 2*x2^2", np.diag([1.0, 2.0]), U)
print("constructed V at t=0.3, x=(0.2, -0.1):", float(sys2.V(0.3, [0.2, -0.1])))
print("verify:", verify_all(sys2, g2).passed)
