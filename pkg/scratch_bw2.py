# scratch: Breit-Wigner transmission fit at J=300 vs FEM resonance (same nodal potential)
import numpy as np
from rtd1d.core import PhysicalParams, DeviceGeometry, Grids, external_potential
from rtd1d.resonance import solve_resonance
from rtd1d.scattering import solve_scattering_ensemble, exit_wavenumbers

params = PhysicalParams()
geom = DeviceGeometry()
grids = Grids(L=geom.L, J=300)
x = grids.x_nodes()

def bw_fit(U, B, E_lo, E_hi, n=2001):
    E = np.linspace(E_lo, E_hi, n)
    k = np.sqrt(params.gamma * E)  # left-incoming branch
    fields = solve_scattering_ensemble(k, U, B, params, grids.dx)
    _, kr = exit_wavenumbers(params, k, B)
    t = fields[:, -1] * np.exp(-1j * kr * geom.L)
    T = (kr / k) * np.abs(t) ** 2
    i = np.argmax(T)
    half = T[i] / 2
    l = np.interp(half, T[:i], E[:i])
    r = np.interp(half, T[i:][::-1], E[i:][::-1])
    return E[i], r - l, T[i]

for B in (0.0, 0.1):
    U = external_potential(geom, B, x)
    res = solve_resonance(U, x, params, geom.a2, geom.b2, q_right=float(U[-1]))
    Epk, fwhm, Tpk = bw_fit(U, B, res.E - 6 * res.gamma, res.E + 6 * res.gamma)
    print(f"B={B}: FEM E={res.E*1e3:.4f} Gamma={res.gamma*1e3:.5f} | "
          f"T-fit E={Epk*1e3:.4f} FWHM={fwhm*1e3:.5f} Tpeak={Tpk:.4f} "
          f"| ratio Gamma: {res.gamma/fwhm:.4f}")
