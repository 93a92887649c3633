# scratch: profile inspection + independent closed-system equilibrium estimate
import numpy as np
from rtd1d.core import (PhysicalParams, DeviceGeometry, Grids, doping_profile,
                        external_potential, injection_profile)
from rtd1d.poisson import gummel_loop
from rtd1d.oma_stationary import OmaStationaryEngine
from rtd1d.resonance import solve_resonance, dirichlet_ground_state
import scipy.linalg as la

params = PhysicalParams()
geom = DeviceGeometry()
grids = Grids(L=geom.L, J=300, P=50, P_coarse=50)
x = grids.x_nodes()
nD = doping_profile(geom, x)

eng = OmaStationaryEngine(params, geom, grids, 0.0)
st = gummel_loop(eng.density, np.zeros(301), nD, grids.dx, params, params.kT)
V = st.V
n = st.n
for xx in (10, 45, 52, 55, 58, 62.5, 67.5, 72.5, 80, 100):
    j = int(round(xx / grids.dx))
    print(f"x={x[j]:6.2f}  V={V[j]*1e3:7.2f} meV   n={n[j]:.3e}  nD={nD[j]:.1e}")
print("well-average V:", V[(x>=65)&(x<=70)].mean()*1e3, "meV")
print("barrier-average V:", V[(x>=60)&(x<=65)].mean()*1e3, "meV")

# independent closed-box equilibrium: H on [0,L] Dirichlet walls,
# 1D k-measure: n(x) = sum_n w(E_n)|phi_n|^2 with w from the same g:
# continuum normalization: each box state ~ two travelling waves k_n, weight
# g(k_n) * dk_n with dk_n = pi/L spacing, |phi_n|^2 normalized to ... check
# against leads: for U=0: n(x) approx nD1 away from walls.
def closed_density(Vtot):
    kin = params.hbar**2 / (2 * params.m * grids.dx**2)
    m = x.size - 2
    diag = 2 * kin + Vtot[1:-1]
    off = np.full(m - 1, -kin)
    vals, vecs = la.eigh_tridiagonal(diag, off)
    nsum = np.zeros_like(x)
    for i in range(m):
        E = vals[i]
        if E > 0.6:
            break
        k = np.sqrt(params.gamma * abs(E))
        g = injection_profile(params, k)
        # box state phi normalized sum phi^2 dx = 1; plane-wave pair weight:
        # n = int g(k)|Phi_k|^2 dk ; box mode k_n spacing pi/L carries both +-k
        phi2 = np.zeros_like(x)
        phi2[1:-1] = vecs[:, i] ** 2 / grids.dx   # L2-normalized density
        nsum += 2.0 * g * (np.pi / geom.L) * phi2 * geom.L / 2.0
    return nsum

ncl = closed_density(np.zeros_like(x))
print("closed-box flat-potential density mid:", ncl[150], " lead target:", geom.nD1)

V2 = np.zeros_like(x)
nD2 = nD.copy()
for it in range(200):
    n2 = closed_density(V2)
    from rtd1d.poisson import gummel_poisson_step
    V2n = gummel_poisson_step(V2, n2, nD2, params.kT, grids.dx, params)
    e = np.linalg.norm(V2n - V2) / max(np.linalg.norm(V2n), 1e-30)
    V2 = V2n
    if e < 1e-10:
        break
print("closed-box converged after", it, "e:", e)
U = external_potential(geom, 0.0, x)
E0c, _ = dirichlet_ground_state(U + V2, x, geom.a2, geom.b2, params)
resc = solve_resonance(U + V2, x, params, geom.a2, geom.b2, q_right=0.0)
print("closed-box equilibrium: E0 =", E0c*1e3, " E_I =", resc.E*1e3, " G/E =", resc.gamma/resc.E)
print("closed well-average V:", V2[(x>=65)&(x<=70)].mean()*1e3, "meV")
