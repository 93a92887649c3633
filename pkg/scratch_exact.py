# scratch: commensurate grid (all geometry points on nodes) -> continuum-geometry table?
import numpy as np
from rtd1d.core import (PhysicalParams, DeviceGeometry, Grids, bias_ramp)
from rtd1d.poisson import gummel_loop
from rtd1d.resonance import solve_resonance, dirichlet_ground_state
from rtd1d.scattering import solve_scattering_ensemble, density_trapezoid
from rtd1d.oma_stationary import well_overlap, resonant_cell_integral
from rtd1d.core import injection_profile, dispersion

params = PhysicalParams()
geom = DeviceGeometry()

def run(J, halfedges=True):
    grids = Grids(L=geom.L, J=J, P=50, P_coarse=50)
    x = grids.x_nodes()
    dx = grids.dx

    def indic(a, b):
        ind = ((x > a) & (x < b)).astype(float)
        if halfedges:
            ind[np.isclose(x, a)] = 0.5
            ind[np.isclose(x, b)] = 0.5
        else:
            ind[np.isclose(x, a)] = 1.0
            ind[np.isclose(x, b)] = 1.0
        return ind

    def U_of(B):
        return geom.v0 * indic(geom.a2, geom.b2) - geom.v0 * indic(geom.a3, geom.b3) \
               - B * bias_ramp(geom, x)

    nD = geom.nD1 + (geom.nD2 - geom.nD1) * indic(geom.a1, geom.b1)
    km = grids.k_nodes()
    g = injection_profile(params, km)

    V = np.zeros_like(x)
    for B in (0.0, 0.1):
        U = U_of(B)
        fill = U + geom.v0 * indic(geom.a3, geom.b3)
        state = {"res": None}
        def density(Vv):
            phi = solve_scattering_ensemble(km, fill + Vv, B, params, dx)
            n = density_trapezoid(g, np.abs(phi) ** 2, km)
            res = solve_resonance(U + Vv, x, params, geom.a2, geom.b2,
                                  q_right=float(U[-1]), warm_start=state["res"],
                                  tol=3e-15 if J > 400 else 1e-15)
            state["res"] = res
            u_l2 = res.l2_mode(dx)
            w = well_overlap(phi, u_l2, x, geom.a3, geom.b3, dx)
            R = g * geom.v0 ** 2 * np.abs(w) ** 2
            jsum = sum(resonant_cell_integral(km[p], km[p+1], R[p], R[p+1],
                                              res.E, res.gamma, B, params)
                       for p in range(km.size - 1))
            return n + jsum * np.abs(u_l2) ** 2
        st = gummel_loop(density, V, nD, dx, params, params.kT)
        V = st.V.copy()
        E0, _ = dirichlet_ground_state(U + V, x, geom.a2, geom.b2, params)
        res = solve_resonance(U + V, x, params, geom.a2, geom.b2, q_right=float(U[-1]),
                              tol=3e-15 if J > 400 else 1e-15)
        print(f"J={J} halfedges={halfedges} B={B}: Ncv={st.iterations:3d} "
              f"E0={E0*1e3:8.3f}  E={res.E*1e3:8.3f}  G/E={res.gamma/res.E:.3e}")

run(540, True)
run(1080, True)
