# scratch: resonance solver on the bare external potential
import numpy as np
from rtd1d.core import PhysicalParams, DeviceGeometry, Grids, external_potential
from rtd1d.resonance import solve_resonance, dirichlet_ground_state, assemble_fem, branch_sqrt

params = PhysicalParams()
geom = DeviceGeometry()
grids = Grids(L=geom.L, J=300)
x = grids.x_nodes()
print("kM default:", params.default_kM())
print("stability ratio:", grids.check_stability(params))

for B in (0.0, 0.1):
    U = external_potential(geom, B, x)
    E0, u0 = dirichlet_ground_state(U, x, geom.a2, geom.b2, params)
    res = solve_resonance(U, x, params, geom.a2, geom.b2, q_right=float(U[-1]))
    print(f"B={B}: E0={E0*1e3:.2f} meV  E={res.E*1e3:.2f} meV  "
          f"Gamma/E={res.gamma/res.E:.3e}  n_cv={res.n_cv} residual={res.residual:.2e}")
    print("   residual history:", [f"{r:.1e}" for r in res.residual_history])

# banded vs dense agreement
U = external_potential(geom, 0.1, x)
r1 = solve_resonance(U, x, params, geom.a2, geom.b2, q_right=float(U[-1]), method="dense")
r2 = solve_resonance(U, x, params, geom.a2, geom.b2, q_right=float(U[-1]), method="banded")
print("dense vs banded dz:", abs(r1.z - r2.z), "n_cv:", r1.n_cv, r2.n_cv)

# wrong-convention check: what would s(z + q_right) (value convention) give?
from rtd1d.resonance import newton_resonance
fem_wrong = assemble_fem(U, grids.dx, params, q_right=-float(U[-1]))
E0, u0 = dirichlet_ground_state(U, x, geom.a2, geom.b2, params)
try:
    rw = newton_resonance(fem_wrong, E0, u0)
    print("value-convention-in-M3 result:", rw.E*1e3, rw.gamma/rw.E, rw.n_cv)
except Exception as e:
    print("value-convention-in-M3 failed:", e)
