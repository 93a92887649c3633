# scratch: full stationary Gummel with OMA / reference engines -> paper table values
import time
import numpy as np
from rtd1d.core import (PhysicalParams, DeviceGeometry, Grids, doping_profile,
                        external_potential)
from rtd1d.poisson import gummel_loop
from rtd1d.oma_stationary import OmaStationaryEngine, DirectStationaryEngine
from rtd1d.resonance import solve_resonance, dirichlet_ground_state

params = PhysicalParams()
geom = DeviceGeometry()
V_ref = params.kT

def run(engine_cls, B, P, V0, label, **kw):
    grids = Grids(L=geom.L, J=300, P=P, P_coarse=P)
    eng = engine_cls(params, geom, grids, B, **kw)
    x = grids.x_nodes()
    nD = doping_profile(geom, x)
    t0 = time.perf_counter()
    state = gummel_loop(eng.density, V0, nD, grids.dx, params, V_ref)
    t1 = time.perf_counter()
    print(f"{label}: N_cv={state.iterations}  wall={t1-t0:.2f}s  "
          f"e_last={state.e_trace[-1]:.2e} max|V|={np.max(np.abs(state.V)):.4f}")
    return state, eng, grids

# OMA engine at P=50, B=0
s0, eng0, grids = run(OmaStationaryEngine, 0.0, 50, np.zeros(301), "OMA B=0 P=50")
x = grids.x_nodes()

U = external_potential(geom, 0.0, x)
E0, _ = dirichlet_ground_state(U + s0.V, x, geom.a2, geom.b2, params)
res = solve_resonance(U + s0.V, x, params, geom.a2, geom.b2, q_right=float(U[-1]))
print(f"  B=0 table: E0={E0*1e3:.2f}  E_I={res.E*1e3:.2f}  G/E={res.gamma/res.E:.3e}  N_cv={res.n_cv}")

# OMA B=0.1 warm-started from B=0 solution
s1, eng1, _ = run(OmaStationaryEngine, 0.1, 50, s0.V.copy(), "OMA B=0.1 P=50")
U1 = external_potential(geom, 0.1, x)
E0b, _ = dirichlet_ground_state(U1 + s1.V, x, geom.a2, geom.b2, params)
res1 = solve_resonance(U1 + s1.V, x, params, geom.a2, geom.b2, q_right=float(U1[-1]))
print(f"  B=0.1 table: E0={E0b*1e3:.2f}  E_I={res1.E*1e3:.2f}  G/E={res1.gamma/res1.E:.3e}  N_cv={res1.n_cv}")

print("e-trace tail B=0:", [f"{e:.1e}" for e in s0.e_trace[-6:]])
