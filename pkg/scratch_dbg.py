# scratch: debug density magnitude driving V too high
import numpy as np
from rtd1d.core import (PhysicalParams, DeviceGeometry, Grids, doping_profile,
                        external_potential, filled_potential, injection_profile,
                        dispersion)
from rtd1d.scattering import solve_scattering_ensemble, density_trapezoid
from rtd1d.oma_stationary import OmaStationaryEngine, resonant_cell_integral, well_overlap
from rtd1d.resonance import solve_resonance

params = PhysicalParams()
geom = DeviceGeometry()
grids = Grids(L=geom.L, J=300, P=50, P_coarse=50)
x = grids.x_nodes()
nD = doping_profile(geom, x)

kM = params.default_kM()
kfine = np.linspace(-kM, kM, 4001)
g = injection_profile(params, kfine)
print("int g dk =", np.trapz(g, kfine), " nD1 =", geom.nD1)

# at V = 0: direct fine density profile
U = external_potential(geom, 0.0, x)
fields = solve_scattering_ensemble(kfine, U, 0.0, params, grids.dx)
n_direct = density_trapezoid(injection_profile(params, kfine), np.abs(fields)**2, kfine)
print("n_direct at x=0, L/2(well), L:", n_direct[0], n_direct[150], n_direct[-1])
print("lead average left:", n_direct[:40].mean(), " right:", n_direct[-40:].mean())

# OMA density at the same V=0: compare components
eng = OmaStationaryEngine(params, geom, grids, 0.0)
n_oma = eng.density(np.zeros(301))
dec = eng.last
print("rel L2 diff OMA vs direct-fine:", np.linalg.norm(n_oma-n_direct)/np.linalg.norm(n_direct))
well = (x >= geom.a3) & (x <= geom.b3)
print("well-average n: direct", n_direct[well].mean(), " oma", n_oma[well].mean())
print("oma parts in well: nr", dec.n_nonresonant[well].mean(), " res", dec.n_resonant[well].mean())

# brute force resonant part: g|theta|^2 integrated on a very fine submesh with explicit theta
res = dec.resonance
u_l2 = res.l2_mode(grids.dx)
phin_fine_k = np.linspace(-kM, kM, 20001)
phif = solve_scattering_ensemble(phin_fine_k, filled_potential(geom, 0.0, x), 0.0, params, grids.dx)
w_f = well_overlap(phif, u_l2, x, geom.a3, geom.b3, grids.dx)
E_f = dispersion(params, phin_fine_k, 0.0)
theta_f = geom.v0 / (res.z - E_f) * w_f
gint = np.trapz(injection_profile(params, phin_fine_k) * np.abs(theta_f)**2, phin_fine_k)
jsum = dec.n_resonant.max() / np.abs(u_l2).max()**2
print("brute-force int g|theta|^2 =", gint, " J-sum =", jsum, " ratio:", jsum/gint)

# direct density from |Phi|^2 with full potential vs reconstruction in the well
kres = np.sqrt(params.gamma * res.E)
print("resonant k+ =", kres, " E_I =", res.E)
