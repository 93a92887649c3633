# scratch: plane-wave residual with initial-data corrections at the discrete phase
import numpy as np
from rtd1d.core import PhysicalParams
from rtd1d.cn_dtbc import build_kernel

params = PhysicalParams()
dx, dt = 0.45, 1.0
q0 = -0.05
lmax = 400
ker = build_kernel(q0, dx, dt, params, lmax)
R = ker.R
w = -2.0 * params.m * dx**2 / params.hbar**2

kappa = 0.4
Dk = -4.0 * np.sin(kappa * dx / 2.0) ** 2 + w * q0
lam = (Dk - 1j * R) / (-Dk - 1j * R)

ls = np.arange(lmax + 1)
phi0 = np.exp(-1j * kappa * 0.0)
phi1 = np.exp(-1j * kappa * dx)
psi0 = phi0 * lam**ls
psi1 = phi1 * lam**ls

res = []
for l in range(1, lmax):
    lhs = psi1[l] - ker.s[0] * psi0[l]
    conv = np.dot(ker.s[1:l][::-1], psi0[1:l]) if l > 1 else 0.0
    corr = -phi0 * np.dot(ker.s[: l][::-1], lam ** np.arange(1, l + 1)) \
           + phi1 * lam ** (l - 1) * (1.0 + lam)
    rhs = conv - psi1[l - 1] + corr
    res.append(abs(lhs - rhs))
print("plane-wave residual with discrete-phase corrections:", max(res))

# kernel decay exponent fit over l in [50, 2000]
ker2 = build_kernel(q0, dx, dt, params, 2000)
lfit = np.arange(50, 2001)
mag = np.abs(ker2.s[50:])
slope = np.polyfit(np.log(lfit), np.log(mag), 1)[0]
print("kernel decay exponent:", slope)
