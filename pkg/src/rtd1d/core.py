"""Device description: material constants, geometry, bias schedule, grids,
and the analytic profiles (external potential, doping, injection statistics)
shared by every solver.

All values are stored in the internal (eV, nm, fs) unit system; see
:mod:`rtd1d.constants` for the conversion factors.
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import (
    HBAR,
    KB,
    M_ELECTRON,
    Q2_OVER_EPS0,
    EV_PER_JOULE,
)


@dataclass(frozen=True)
class PhysicalParams:
    """Material and statistics constants.

    ``m`` is the effective mass (eV fs^2/nm^2), ``q2_over_eps`` the Coulomb
    coupling e^2/eps in eV nm (charge and permittivity only ever enter
    through this ratio), ``EF`` the Fermi level in eV.
    """

    hbar: float = HBAR
    m: float = 0.067 * M_ELECTRON
    q2_over_eps: float = Q2_OVER_EPS0 / 11.44
    kB: float = KB
    T: float = 300.0
    EF: float = 6.7097e-21 * EV_PER_JOULE

    def __post_init__(self):
        for name in ("hbar", "m", "q2_over_eps", "kB", "T", "EF"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"PhysicalParams.{name} must be strictly positive")

    @classmethod
    def from_material(cls, rel_mass, rel_permittivity, T, EF_joule):
        """Build from the material numbers as usually quoted (SI Fermi level)."""
        return cls(
            m=rel_mass * M_ELECTRON,
            q2_over_eps=Q2_OVER_EPS0 / rel_permittivity,
            T=T,
            EF=EF_joule * EV_PER_JOULE,
        )

    @property
    def kT(self):
        return self.kB * self.T

    @property
    def gamma(self):
        """2m/hbar^2 in 1/(eV nm^2); converts energies to squared wavenumbers."""
        return 2.0 * self.m / self.hbar**2

    def default_kM(self):
        """Frequency cutoff sqrt(2m(EF + 7 kB T))/hbar beyond which the
        injection statistics are negligible."""
        return np.sqrt(self.gamma * (self.EF + 7.0 * self.kT))


@dataclass(frozen=True)
class DeviceGeometry:
    """Device layout in nm: diode extremities [a1, b1], barrier region
    [a2, b2], well [a3, b3], barrier height v0 (eV) and donor densities
    nD1 (outside the diode) / nD2 (inside), in nm^-3."""

    L: float = 135.0
    a1: float = 50.0
    a2: float = 60.0
    a3: float = 65.0
    b3: float = 70.0
    b2: float = 75.0
    b1: float = 85.0
    v0: float = 0.3
    nD1: float = 1.0e-3
    nD2: float = 5.0e-6

    def __post_init__(self):
        pts = (0.0, self.a1, self.a2, self.a3, self.b3, self.b2, self.b1, self.L)
        if not all(x < y for x, y in zip(pts, pts[1:])):
            raise ValueError(
                "geometry must satisfy 0 < a1 < a2 < a3 < b3 < b2 < b1 < L, got "
                f"a1={self.a1}, a2={self.a2}, a3={self.a3}, b3={self.b3}, "
                f"b2={self.b2}, b1={self.b1}, L={self.L}"
            )
        if self.v0 < 0.0:
            raise ValueError("barrier height v0 must be >= 0")
        if not (self.nD1 > self.nD2 >= 0.0):
            raise ValueError("donor densities must satisfy nD1 > nD2 >= 0")


@dataclass(frozen=True)
class BiasSchedule:
    """Applied bias B(t) >= 0 in eV.

    Modes: ``constant`` (B_I for all t), ``step`` (B_I at t=0, B_inf for
    t>0) and ``cubic`` (C^1 Hermite ramp from B_I to B_inf over [0, t0],
    zero slope at both ends).
    """

    mode: str = "step"
    B_I: float = 0.0
    B_inf: float = 0.1
    t0: float = 1.0e3   # fs

    def __post_init__(self):
        if self.mode not in ("constant", "step", "cubic"):
            raise ValueError(f"unknown bias mode {self.mode!r}")
        if self.B_I < 0.0 or self.B_inf < 0.0:
            raise ValueError("bias values must be >= 0")
        if self.mode == "cubic" and self.t0 <= 0.0:
            raise ValueError("cubic ramp duration t0 must be positive")

    def bias_at(self, t):
        if self.mode == "constant":
            return self.B_I
        if self.mode == "step":
            return self.B_I if t <= 0.0 else self.B_inf
        if t <= 0.0:
            return self.B_I
        if t >= self.t0:
            return self.B_inf
        s = t / self.t0
        return self.B_I + (self.B_inf - self.B_I) * s * s * (3.0 - 2.0 * s)

    @property
    def is_time_dependent_after_zero(self):
        """True when the exterior potential keeps moving for t > 0 (the cubic
        ramp); the step bias is frozen at B_inf for every positive time."""
        return self.mode == "cubic" and self.B_inf != self.B_I


@dataclass(frozen=True)
class Grids:
    """Discretisation sizes: J space intervals on [0, L], P fine frequency
    intervals on [-kM, kM] (uniform), P_coarse = P/nu coarse intervals for
    the reduced ensembles, time step dt (fs)."""

    L: float
    J: int = 300
    P: int = 50
    P_coarse: int = 50
    dt: float = 1.0
    kM: float = 0.626
    t_final: float = 2.0e3

    def __post_init__(self):
        if self.J < 2 or self.P < 1 or self.P_coarse < 1:
            raise ValueError("grid sizes must be positive")
        if self.P % self.P_coarse != 0:
            raise ValueError(
                f"P={self.P} must be an integer multiple of P_coarse={self.P_coarse}"
            )
        if self.dt <= 0.0 or self.kM <= 0.0 or self.L <= 0.0:
            raise ValueError("dt, kM and L must be positive")

    @property
    def dx(self):
        return self.L / self.J

    @property
    def nu(self):
        return self.P // self.P_coarse

    def x_nodes(self):
        return np.linspace(0.0, self.L, self.J + 1)

    def k_nodes(self):
        """Fine uniform frequency mesh, kM-symmetric; contains k=0 when P is
        even (the zero-flux wave there is identically zero, see scattering)."""
        return np.linspace(-self.kM, self.kM, self.P + 1)

    def k_nodes_coarse(self):
        return np.linspace(-self.kM, self.kM, self.P_coarse + 1)

    def check_stability(self, params: PhysicalParams):
        """hbar^2/(2 m dx^2) > 1 keeps the kinetic scale dominant on the
        space grid (empirical stability condition of the scheme)."""
        ratio = params.hbar**2 / (2.0 * params.m * self.dx**2)
        if ratio <= 1.0:
            raise ValueError(
                f"space grid too coarse: hbar^2/(2 m dx^2) = {ratio:.3f} <= 1"
            )
        return ratio


def bias_ramp(geom: DeviceGeometry, x):
    """Normalised bias profile: 0 left of a1, linear on [a1, b1], 1 beyond."""
    return np.clip((np.asarray(x, dtype=float) - geom.a1) / (geom.b1 - geom.a1), 0.0, 1.0)


def external_potential(geom: DeviceGeometry, B, x):
    """External potential in eV at positions x: double barrier on [a2,b2]
    with the well [a3,b3] cut out, tilted by the applied bias B.

    Nodes landing exactly on a region edge take the region's value (closed
    intervals); the default grid has no node on an edge so the convention
    is only visible in artificial setups.
    """
    x = np.asarray(x, dtype=float)
    u = np.where((x >= geom.a2) & (x <= geom.b2), geom.v0, 0.0)
    u = u - np.where((x >= geom.a3) & (x <= geom.b3), geom.v0, 0.0)
    return u - B * bias_ramp(geom, x)


def filled_potential(geom: DeviceGeometry, B, x):
    """External potential with the well raised to barrier height, which
    removes the resonance from the non-resonant solves."""
    x = np.asarray(x, dtype=float)
    fill = np.where((x >= geom.a3) & (x <= geom.b3), geom.v0, 0.0)
    return external_potential(geom, B, x) + fill


def doping_profile(geom: DeviceGeometry, x):
    """Donor density in nm^-3: nD1 outside [a1, b1], nD2 inside."""
    x = np.asarray(x, dtype=float)
    inside = (x >= geom.a1) & (x <= geom.b1)
    return np.where(inside, geom.nD2, geom.nD1)


def injection_profile(params: PhysicalParams, k):
    """Statistical weight g(k) of the incoming state at wavenumber k
    (1D Fermi-Dirac integral), in nm^-2.

    Even in k, strictly decreasing in |k|, exponentially small beyond the
    cutoff kM.
    """
    k = np.asarray(k, dtype=float)
    arg = (params.EF - params.hbar**2 * k**2 / (2.0 * params.m)) / params.kT
    # log(1 + exp(arg)) without overflow for large |arg|
    lg = np.logaddexp(0.0, arg)
    return params.m * params.kT / (2.0 * np.pi**2 * params.hbar**2) * lg


def dispersion(params: PhysicalParams, k, B):
    """Total energy E_k of the scattering state at wavenumber k under bias B:
    hbar^2 k^2/2m for left-incoming k >= 0, shifted down by B for
    right-incoming k < 0 (injection happens at the biased contact)."""
    k = np.asarray(k, dtype=float)
    e_kin = params.hbar**2 * k**2 / (2.0 * params.m)
    return np.where(k >= 0.0, e_kin, e_kin - B)
