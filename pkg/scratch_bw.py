# scratch: independent Breit-Wigner check of the resonance solver (bare potential, B=0)
import numpy as np
from rtd1d.core import PhysicalParams, DeviceGeometry, Grids, external_potential
from rtd1d.resonance import solve_resonance
from rtd1d.scattering import solve_scattering_ensemble, reflection_transmission, WaveField

params = PhysicalParams()
geom = DeviceGeometry()

for J in (300, 600, 1200, 2400):
    grids = Grids(L=geom.L, J=J)
    x = grids.x_nodes()
    U = external_potential(geom, 0.0, x)
    res = solve_resonance(U, x, params, geom.a2, geom.b2, q_right=float(U[-1]))
    print(f"J={J}: E={res.E*1e3:.4f} meV  Gamma={res.gamma*1e3:.5f} meV  G/E={res.gamma/res.E:.4e}")

# transmission scan on a fine grid (J=2400 so RK4 error is negligible)
grids = Grids(L=geom.L, J=2400)
x = grids.x_nodes()
U = external_potential(geom, 0.0, x)
E_scan = np.linspace(0.0895, 0.0935, 400)
k_scan = np.sqrt(params.gamma * E_scan)
fields = solve_scattering_ensemble(k_scan, U, 0.0, params, grids.dx)
T = []
for i, k in enumerate(k_scan):
    wf = WaveField(k=k, values=fields[i], energy=E_scan[i])
    r, t = reflection_transmission(wf, 0.0, params, geom.L)
    T.append(abs(t)**2)   # B=0: k_out = k_in
T = np.asarray(T)
imax = np.argmax(T)
Epk = E_scan[imax]
half = T[imax] / 2
left = np.interp(half, T[:imax], E_scan[:imax])
right = np.interp(half, T[imax:][::-1], E_scan[imax:][::-1])
print("T peak:", T[imax], " E_peak =", Epk*1e3, "meV  FWHM =", (right-left)*1e3, "meV")
print("=> transmission-fit Gamma/E =", (right-left)/Epk)
