# scratch: which model variant reproduces the paper's two-bias resonance table?
import numpy as np
from rtd1d.core import (PhysicalParams, DeviceGeometry, Grids, doping_profile,
                        external_potential, injection_profile)
from rtd1d.poisson import gummel_loop
from rtd1d.oma_stationary import DirectStationaryEngine
from rtd1d.resonance import solve_resonance, dirichlet_ground_state
from rtd1d import constants as cst

geom = DeviceGeometry()

def table(params, label, gscale=1.0):
    grids = Grids(L=geom.L, J=300, P=2000, P_coarse=2000)
    x = grids.x_nodes()
    nD = doping_profile(geom, x)
    V = np.zeros(301)
    out = []
    for B in (0.0, 0.1):
        eng = DirectStationaryEngine(params, geom, grids, B, adaptive=False)
        base_density = eng.density
        density = (lambda v: gscale * base_density(v)) if gscale != 1.0 else base_density
        from rtd1d.poisson import GummelError
        try:
            st = gummel_loop(density, V, nD, grids.dx, params, params.kT)
        except GummelError as e:
            print(label, B, "no convergence", e)
            return
        V = st.V.copy()
        U = external_potential(geom, B, x)
        E0, _ = dirichlet_ground_state(U + st.V, x, geom.a2, geom.b2, params)
        res = solve_resonance(U + st.V, x, params, geom.a2, geom.b2, q_right=float(U[-1]))
        out.append((B, st.iterations, E0 * 1e3, res.E * 1e3, res.gamma / res.E))
    for B, ncv, E0, EI, ge in out:
        print(f"{label}  B={B}: N_cv={ncv}  E0={E0:7.2f}  E_I={EI:7.2f}  G/E={ge:.3e}")

table(PhysicalParams(), "baseline        ")
table(PhysicalParams(), "g/2 spinless    ", gscale=0.5)
p129 = PhysicalParams(q2_over_eps=cst.Q2_OVER_EPS0 / 12.9)
table(p129, "eps_r=12.9      ")
