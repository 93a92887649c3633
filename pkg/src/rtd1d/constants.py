"""Physical constants in the internal (eV, nm, fs) unit system.

All solver arithmetic runs in electron-volts, nanometres and femtoseconds
so every quantity stays O(1) in double precision.  SI inputs (Joule Fermi
levels, m^-3 doping, second time steps) are converted once at config
ingestion and never reappear internally.
"""

import numpy as np

# CODATA 2018
HBAR = 0.6582119569          # eV fs
M_ELECTRON = 5.685630103     # eV fs^2 / nm^2 (electron rest mass)
KB = 8.617333262e-5          # eV / K
COULOMB = 1.439964548        # eV nm, e^2 / (4 pi eps0)
Q2_OVER_EPS0 = 4.0 * np.pi * COULOMB   # eV nm, e^2 / eps0

# SI conversion factors
EV_PER_JOULE = 1.0 / 1.602176634e-19
FS_PER_SECOND = 1.0e15
NM3_PER_M3 = 1.0e-27         # density m^-3 -> nm^-3
PER_NM_PER_M = 1.0e-9        # wavenumber m^-1 -> nm^-1
