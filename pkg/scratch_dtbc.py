# scratch: validate DTBC kernel against Z-transform inversion + plane-wave residual
import numpy as np
from rtd1d.core import PhysicalParams
from rtd1d.cn_dtbc import build_kernel

params = PhysicalParams()
dx = 0.45
dt = 1.0
q = -0.1   # exterior potential value (eV)
l_max = 4000

ker = build_kernel(q, dx, dt, params, l_max)
R = ker.R
sigma = ker.sigma
w = -2.0 * params.m * dx**2 / params.hbar**2
print("R =", R, "sigma =", sigma, "w*q =", w * q, "mu =", ker.mu)

# --- oracle: s-hat(zeta) = (1 + 1/zeta) * nu(zeta), nu the |nu|>1 root of
#     nu^2 - (2 + D) nu + 1 = 0 with D = -iR(zeta-1)/(zeta+1) - w q
N = 1 << 16
rho = 1.0 + 2e-4
z = rho * np.exp(2j * np.pi * np.arange(N) / N)
D = -1j * R * (z - 1.0) / (z + 1.0) - w * q
b = (2.0 + D) / 2.0
root = np.sqrt(b * b - 1.0)
nu1 = b + root
nu2 = b - root
nu_big = np.where(np.abs(nu1) >= np.abs(nu2), nu1, nu2)
shat = (1.0 + 1.0 / z) * nu_big
coeff = np.fft.ifft(shat)             # a_l = s^l rho^{-l}
s_oracle = coeff[: l_max + 1] * rho ** np.arange(l_max + 1)

for l in [0, 1, 2, 3, 5, 10, 50, 500, 2000]:
    print(l, ker.s[l], s_oracle[l], abs(ker.s[l] - s_oracle[l]))
