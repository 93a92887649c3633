# scratch: which sampled-geometry convention reproduces the paper table?
# Sextuple target: B=0:  E0=126.83, E_I=127.55, G/E=2.58e-3
#                  B=.1: E0=80.29,  E_I=81.00,  G/E=4.40e-3
import numpy as np
from rtd1d.core import (PhysicalParams, DeviceGeometry, Grids, doping_profile,
                        injection_profile, dispersion, bias_ramp)
from rtd1d.poisson import gummel_loop, GummelError
from rtd1d.resonance import solve_resonance, dirichlet_ground_state
from rtd1d.scattering import solve_scattering_ensemble, density_trapezoid
from rtd1d.oma_stationary import well_overlap, resonant_cell_integral

params = PhysicalParams()
geom = DeviceGeometry()
grids = Grids(L=geom.L, J=300, P=50, P_coarse=50)
x = grids.x_nodes()
dx = grids.dx
nD = doping_profile(geom, x)

def U_from_indices(jb_lo, jw_lo, jw_hi, jb_hi, B):
    u = np.zeros_like(x)
    u[jb_lo:jw_lo] = geom.v0
    u[jw_hi + 1 : jb_hi + 1] = geom.v0
    return u - B * bias_ramp(geom, x), u  # (external U, barrier indicator*v0)

def engine_density(UB, Ufill, B):
    km = grids.k_nodes()
    g = injection_profile(params, km)
    E_ks = dispersion(params, km, B)
    state = {"res": None}
    def density(V):
        phi = solve_scattering_ensemble(km, Ufill + V, B, params, dx)
        n = density_trapezoid(g, np.abs(phi) ** 2, km)
        res = solve_resonance(UB + V, x, params, geom.a2, geom.b2,
                              q_right=float(UB[-1]), warm_start=state["res"])
        state["res"] = res
        u_l2 = res.l2_mode(dx)
        w = well_overlap(phi, u_l2, x, geom.a3, geom.b3, dx)
        R = g * geom.v0 ** 2 * np.abs(w) ** 2
        j = sum(resonant_cell_integral(km[p], km[p+1], R[p], R[p+1],
                                       res.E, res.gamma, B, params)
                for p in range(km.size - 1))
        return n + j * np.abs(u_l2) ** 2
    return density

def sextuple(jb_lo, jw_lo, jw_hi, jb_hi, label):
    V = np.zeros_like(x)
    row = [label]
    for B in (0.0, 0.1):
        U, barr = U_from_indices(jb_lo, jw_lo, jw_hi, jb_hi, B)
        fill = U.copy()
        fill[jw_lo : jw_hi + 1] += geom.v0   # filled: well raised
        try:
            st = gummel_loop(engine_density(U, fill, B), V, nD, dx, params, params.kT)
        except GummelError:
            row.append("DIVERGED")
            break
        V = st.V.copy()
        E0, _ = dirichlet_ground_state(U + V, x, geom.a2, geom.b2, params)
        res = solve_resonance(U + V, x, params, geom.a2, geom.b2, q_right=float(U[-1]))
        row.append(f"B={B}: Ncv={st.iterations:3d} E0={E0*1e3:7.2f} "
                   f"E={res.E*1e3:7.2f} G/E={res.gamma/res.E:.3e}")
    print(" | ".join(row))

print("target                | B=0: E0= 126.83 E= 127.55 G/E=2.58e-03 | B=0.1: E0=  80.29 E=  81.00 G/E=4.40e-03")
sextuple(134, 145, 155, 166, "value-base (mine) ")
sextuple(133, 145, 155, 167, "barriers+1 outward")
sextuple(134, 144, 156, 166, "well+1 both inward")
sextuple(133, 144, 156, 167, "regions all +1 span")
sextuple(134, 146, 154, 166, "well-1 both       ")
sextuple(133, 146, 154, 167, "thickbar2 wellnarw")
sextuple(132, 145, 155, 168, "barriers+2 outward")
