# scratch: plane-wave DTBC residual + Gaussian packet exit + B.2 steady state
import numpy as np
from rtd1d.core import PhysicalParams
from rtd1d.cn_dtbc import (
    build_kernel, BoundarySpec, CnEvolution, discrete_norm,
    HOMOGENEOUS, NONHOMOGENEOUS, GAUGED, DIRICHLET,
)

params = PhysicalParams()
J = 300
L = 135.0
dx = L / J
dt = 1.0
x = np.linspace(0, L, J + 1)

# ---- 1. plane-wave compatibility: outgoing discrete wave satisfies the left DTBC row
q0 = 0.0
lmax = 300
ker = build_kernel(q0, dx, dt, params, lmax)
R, w = ker.R, -2.0 * params.m * dx**2 / params.hbar**2
kappa = 0.4  # nm^-1, outgoing to the LEFT at j=0 means psi ~ e^{-i kappa x}
# CN dispersion: -iR(lam-1) = (lam+1)(-4 sin^2(kappa dx/2) + w q0)
Dk = -4.0 * np.sin(kappa * dx / 2.0) ** 2 + w * q0
lam = (Dk - 1j * R) / (-Dk - 1j * R)
print("lam| =", abs(lam))
# left-outgoing wave on nodes j: psi^l_j = e^{-i kappa x_j} lam^l
ls = np.arange(lmax + 1)
psi0 = np.exp(-1j * kappa * x[0]) * lam ** ls
psi1 = np.exp(-1j * kappa * x[1]) * lam ** ls
res = []
for l in range(2, lmax):
    lhs = psi1[l] - ker.s[0] * psi0[l]
    rhs = np.dot(ker.s[1:l][::-1], psi0[1:l]) - psi1[l - 1]
    res.append(abs(lhs - rhs))
print("plane-wave DTBC max residual:", max(res))

# ---- 2. Gaussian packet exit through homogeneous DTBC
k0, width = 0.65, 5.0
psi = np.exp(-((x - L / 2) ** 2) / (4 * width**2) + 1j * k0 * x)
psi /= discrete_norm(psi, dx)
kl = build_kernel(0.0, dx, dt, params, 2100)
spec_l = BoundarySpec(HOMOGENEOUS, kernel=kl)
spec_r = BoundarySpec(HOMOGENEOUS, kernel=kl)
evo = CnEvolution(psi, dx, dt, params, spec_l, spec_r, l_max=2100)
Q = np.zeros(J + 1)
norms = [discrete_norm(evo.psi, dx)[0]]
for l in range(2000):
    evo.step(Q)
    norms.append(discrete_norm(evo.psi, dx)[0])
norms = np.array(norms)
mono = np.all(np.diff(norms) <= 1e-12)
print("Gaussian: final/initial norm =", norms[-1] / norms[0], "monotone:", mono)

# ---- 3. discrete scattering state invariance under B.2 (frozen potential)
# double barrier potential, discrete whole-line eigenstate at energy E
from rtd1d.core import DeviceGeometry, external_potential
geom = DeviceGeometry()
B = 0.1
U = external_potential(geom, B, x)
E = 0.12   # eV
# discrete wavenumbers: (hbar^2/2m dx^2) 4 sin^2(kappa dx/2) = E - q
def disc_kappa(E, q):
    s2 = (E - q) * params.gamma * dx**2 / 4.0
    return 2.0 / dx * np.arcsin(np.sqrt(complex(s2)))
kl_ = disc_kappa(E, 0.0)
kr_ = disc_kappa(E, U[-1])
print("discrete kappas:", kl_, kr_)
# unknowns: r, phi_1..phi_{J-1}, t ; phi_0 = 1 + r, phi_J = t
# FD rows j=0..J: phi_{j-1} + phi_{j+1} + (w U_j - 2) phi_j = w E phi_j
A = np.zeros((J + 1, J + 1), dtype=complex)
b = np.zeros(J + 1, dtype=complex)
wq = w * U
diagc = -2.0 + wq - w * E
# row j=0: phi_{-1} + diag*phi_0 + phi_1 = 0 with phi_{-1} = e^{-i kl dx} + r e^{+i kl dx}
# unknown vector: v = [r, phi_1, ..., phi_{J-1}, t]
A[0, 0] = np.exp(1j * kl_ * dx) + diagc[0]   # r coupling: phi_{-1} and phi_0 = 1+r
A[0, 1] = 1.0
b[0] = -(np.exp(-1j * kl_ * dx) + diagc[0] * 1.0)
for j in range(1, J):
    # phi_{j-1} + diag phi_j + phi_{j+1} = 0
    if j - 1 == 0:
        A[j, 0] += 1.0   # phi_0 = 1 + r
        b[j] += -1.0
    else:
        A[j, j - 1] += 1.0
    A[j, j] += diagc[j]
    A[j, j + 1] += 1.0
A[J, J - 1] = 1.0
A[J, J] = diagc[J] + np.exp(1j * kr_ * dx)   # phi_{J+1} = t e^{i kr dx}
sol = np.linalg.solve(A, b)
r_, t_ = sol[0], sol[-1]
phi = np.empty(J + 1, dtype=complex)
phi[0] = 1.0 + r_
phi[1:J] = sol[1:J]
phi[J] = t_
# residual check of the discrete eigenproblem
resjs = []
for j in range(1, J):
    resjs.append(abs(phi[j-1] + phi[j+1] + diagc[j]*phi[j]))
print("discrete state interior residual:", max(resjs), "|r|,|t| =", abs(r_), abs(t_))

# evolve with B.2 at both ends, frozen potential; compare to phi e^{-iEt/hbar}
dt2 = 0.1
l_steps = 500
kerl = build_kernel(0.0, dx, dt2, params, l_steps + 10)
kerr = build_kernel(float(U[-1]), dx, dt2, params, l_steps + 10)
specl = BoundarySpec(NONHOMOGENEOUS, kernel=kerl,
                     phi_b=np.array([phi[0]]), phi_in=np.array([phi[1]]),
                     E_phase=np.array([E]))
specr = BoundarySpec(NONHOMOGENEOUS, kernel=kerr,
                     phi_b=np.array([phi[J]]), phi_in=np.array([phi[J-1]]),
                     E_phase=np.array([E]))   # frozen: E_L = E
evo2 = CnEvolution(phi, dx, dt2, params, specl, specr, l_max=l_steps + 10)
errs = []
for l in range(1, l_steps + 1):
    evo2.step(U)
    ref = phi * np.exp(-1j * E * l * dt2 / params.hbar)
    errs.append(np.linalg.norm(evo2.psi[0] - ref) / np.linalg.norm(phi))
print("B.2 steady-state max relative error over 500 steps:", max(errs))
