"""Crank-Nicolson time stepping on [0, L] with discrete transparent
boundary conditions (DTBC).

Interior scheme (nodal, uniform dx, dt):

    -iR (Psi^{l+1}_j - Psi^l_j) = Dxx(Psi^{l+1}_j + Psi^l_j)
                                  + w Q^{l+1/2}_j (Psi^{l+1}_j + Psi^l_j)

with R = 4 m dx^2/(hbar dt) and w = -2 m dx^2/hbar^2.  The boundary rows
close the system with a time convolution against kernel coefficients s^l
built from Legendre polynomials; they exactly transmit outgoing discrete
waves of the exterior scheme.  Three closures are supported per side:

* homogeneous       -- initial data (numerically) supported inside (0, L);
* nonhomogeneous    -- initial data is a stationary scattering state of the
                       initial potential, exterior potential constant in
                       time (correction terms built from the initial state
                       and its exterior phase energy);
* gauged (right)    -- time-dependent exterior value Q_L(t): the potential
                       is removed by a unimodular gauge accumulated with a
                       trapezoid rule and the sigma = 0 kernel is applied
                       to the gauged boundary signal.

The evolution stores its fields nodes-first, shape (J+1, nfields), so the
banded solve and the boundary convolutions run without transposes.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la

from .core import PhysicalParams

HOMOGENEOUS = "homogeneous"
NONHOMOGENEOUS = "nonhomogeneous"
GAUGED = "gauged"
DIRICHLET = "dirichlet"


def legendre_table(mu, l_max):
    """P_0..P_lmax at mu by the three-term recurrence (stable for |mu|<=1)."""
    p = np.empty(l_max + 1)
    p[0] = 1.0
    if l_max >= 1:
        p[1] = mu
    for l in range(2, l_max + 1):
        p[l] = ((2 * l - 1) * mu * p[l - 1] - (l - 1) * p[l - 2]) / l
    return p


@dataclass
class DtbcKernel:
    """Convolution coefficients s^0..s^{l_max} for one boundary, together
    with the scalars that generate them."""

    s: np.ndarray
    sigma: float
    R: float
    alpha: complex
    phi: float
    mu: float


def build_kernel(q_boundary, dx, dt, params: PhysicalParams, l_max):
    """DTBC kernel for a boundary whose exterior potential value is
    ``q_boundary``.  sigma = 2 m dx^2 q / hbar^2 (dimensionless, equal to
    -w q); |mu| <= 1 for any real sigma, R."""
    R = 4.0 * params.m * dx**2 / (params.hbar * dt)
    sigma = 2.0 * params.m * dx**2 * q_boundary / params.hbar**2

    num = 2.0 * R * (sigma + 2.0)
    den = R * R - 4.0 * sigma - sigma * sigma
    phi = float(np.arctan2(num, den))
    mod2 = (R * R + sigma * sigma) * (R * R + (sigma + 4.0) ** 2)
    mu = (R * R + 4.0 * sigma + sigma * sigma) / np.sqrt(mod2)
    if abs(mu) > 1.0 + 1e-12:
        raise ValueError(f"|mu| = {abs(mu)} > 1; unphysical kernel parameters")
    mu = float(np.clip(mu, -1.0, 1.0))
    alpha = 0.5j * mod2**0.25 * np.exp(0.5j * phi)

    p = legendre_table(mu, l_max)
    ls = np.arange(l_max + 1)
    diff = np.empty(l_max + 1)
    diff[0] = p[0]           # P_{-2} = 0
    if l_max >= 1:
        diff[1] = p[1]       # P_{-1} = 0
    diff[2:] = p[2:] - p[:-2]
    s = alpha * np.exp(-1j * ls * phi) * diff / (2.0 * ls - 1.0)
    s[0] += 1.0 - 0.5j * R + 0.5 * sigma
    if l_max >= 1:
        s[1] += 1.0 + 0.5j * R + 0.5 * sigma
    return DtbcKernel(s=s, sigma=float(sigma), R=float(R), alpha=complex(alpha),
                      phi=phi, mu=mu)


@dataclass
class BoundarySpec:
    """Closure selection for one boundary.

    ``phi_b``/``phi_in`` are the initial-state values at the boundary node
    and its interior neighbour (per ensemble field) and ``E_phase`` the
    exterior phase energy of the correction terms, all used by the
    nonhomogeneous and gauged variants.
    """

    mode: str
    kernel: Optional[DtbcKernel] = None
    phi_b: Optional[np.ndarray] = None
    phi_in: Optional[np.ndarray] = None
    E_phase: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in (HOMOGENEOUS, NONHOMOGENEOUS, GAUGED, DIRICHLET):
            raise ValueError(f"unknown boundary mode {self.mode!r}")
        if self.mode != DIRICHLET and self.kernel is None:
            raise ValueError(f"{self.mode} closure needs a kernel")
        if self.mode in (NONHOMOGENEOUS, GAUGED) and (
            self.phi_b is None or self.phi_in is None or self.E_phase is None
        ):
            raise ValueError(f"{self.mode} closure needs phi_b, phi_in and E_phase")


class _SideState:
    """Per-boundary running state: value history for the convolution, the
    geometric correction accumulator, and (gauged variant) the unimodular
    gauge factor."""

    def __init__(self, spec: BoundarySpec, nf, l_max, dt, hbar):
        self.spec = spec
        self.dt = dt
        self.hbar = hbar
        self.hist = np.zeros((l_max + 1, nf), dtype=complex)
        self.eps = 1.0 + 0.0j
        if spec.mode != DIRICHLET:
            self.s = spec.kernel.s
            self.s_rev = np.ascontiguousarray(self.s[::-1])
            self.l_max = l_max
        if spec.mode in (NONHOMOGENEOUS, GAUGED):
            self.q = np.exp(-1j * spec.E_phase * dt / hbar)
            self.qpow = np.ones(nf, dtype=complex)   # q^l
            self.corr = np.zeros(nf, dtype=complex)  # sum_{k=1}^{l} s^{l-k} q^k
        else:
            self.q = None

    def record(self, l, boundary_values):
        if self.spec.mode == GAUGED:
            self.hist[l] = self.eps * boundary_values
        else:
            self.hist[l] = boundary_values

    def gauge_factor_next(self, qL_old, qL_new):
        return self.eps * np.exp(0.5j * (qL_old + qL_new) * self.dt / self.hbar)

    def rhs(self, l, psi_inner_old, eps_next=None):
        """Right-hand side of this boundary row at level l+1, given the
        current level-l inner-neighbour values (the whole row has been
        divided by eps^{l+1} in the gauged variant)."""
        spec = self.spec
        if spec.mode == DIRICHLET:
            return np.zeros_like(psi_inner_old)
        if l > 0:
            # sum_{k=1}^{l} s^{l+1-k} hist^k via a contiguous reversed slice
            conv = self.s_rev[self.l_max - l : self.l_max] @ self.hist[1 : l + 1]
        else:
            conv = np.zeros_like(psi_inner_old)
        if spec.mode == HOMOGENEOUS:
            return conv - psi_inner_old
        # correction accumulator to level l+1: C = q (C + s^l)
        self.corr = self.q * (self.corr + self.s[l])
        corr_terms = -spec.phi_b * self.corr + spec.phi_in * self.qpow * (1.0 + self.q)
        self.qpow = self.qpow * self.q
        if spec.mode == NONHOMOGENEOUS:
            return conv - psi_inner_old + corr_terms
        # gauged: history already holds eps^k Psi^k_b; inner term carries eps^l
        return (conv - self.eps * psi_inner_old + corr_terms) / eps_next


class CnEvolution:
    """Crank-Nicolson evolution of an ensemble of fields sharing one
    potential path.

    ``psi0`` has shape (nfields, J+1) (or (J+1,) for a single field); the
    internal storage is nodes-first.  Each call to :meth:`step` advances
    every field by dt using the supplied midpoint potential; the boundary
    histories are owned by the evolution and updated in place.
    """

    def __init__(
        self,
        psi0,
        dx,
        dt,
        params: PhysicalParams,
        left: BoundarySpec,
        right: BoundarySpec,
        l_max,
    ):
        psi0 = np.array(psi0, dtype=complex)
        if psi0.ndim == 1:
            psi0 = psi0[None, :]
        self.psi = np.ascontiguousarray(psi0.T)     # (J+1, nf)
        self.nj, self.nf = self.psi.shape
        self.dx = dx
        self.dt = dt
        self.params = params
        self.left = left
        self.right = right
        self.l_max = l_max
        self.l = 0
        self.R = 4.0 * params.m * dx**2 / (params.hbar * dt)
        self.w = -2.0 * params.m * dx**2 / params.hbar**2
        self._sides = (
            _SideState(left, self.nf, l_max, dt, params.hbar),
            _SideState(right, self.nf, l_max, dt, params.hbar),
        )
        self._sides[0].record(0, self.psi[0])
        self._sides[1].record(0, self.psi[-1])
        self._ab = np.zeros((3, self.nj), dtype=complex)
        self._rhs = np.empty((self.nj, self.nf), dtype=complex)
        self.steps_counted = 0

    @property
    def fields(self):
        """Current fields, shape (nfields, J+1)."""
        return self.psi.T

    def step(self, Q_mid, qL_pair=None):
        """Advance one time level with the nodal midpoint potential Q_mid.

        ``qL_pair`` = (Q_L(t^l), Q_L(t^{l+1})) feeds the gauge accumulator
        and is required when the right closure is the gauged variant.
        """
        if self.l + 1 > self.l_max:
            raise RuntimeError("evolution exceeded its preallocated history")
        Q_mid = np.asarray(Q_mid, dtype=float)
        psi = self.psi
        w, R = self.w, self.R

        right_state = self._sides[1]
        eps_next = None
        if self.right.mode == GAUGED:
            if qL_pair is None:
                raise ValueError("gauged closure needs the (old, new) exterior values")
            eps_next = right_state.gauge_factor_next(*qL_pair)

        diag_old = -2.0 + w * Q_mid[1:-1] - 1j * R
        rhs = self._rhs
        np.multiply(psi[1:-1], diag_old[:, None], out=rhs[1:-1])
        rhs[1:-1] += psi[2:]
        rhs[1:-1] += psi[:-2]
        np.negative(rhs[1:-1], out=rhs[1:-1])
        rhs[0] = self._sides[0].rhs(self.l, psi[1])
        rhs[-1] = right_state.rhs(self.l, psi[-2], eps_next=eps_next)

        ab = self._ab
        ab[1, 1:-1] = -2.0 + w * Q_mid[1:-1] + 1j * R
        ab[0, 2:] = 1.0
        ab[2, : self.nj - 2] = 1.0
        self._fill_boundary_rows(ab)

        self.psi = la.solve_banded((1, 1), ab, rhs, check_finite=False,
                                   overwrite_b=False)
        self.l += 1
        if self.right.mode == GAUGED:
            right_state.eps = eps_next
        self._sides[0].record(self.l, self.psi[0])
        self._sides[1].record(self.l, self.psi[-1])
        self.steps_counted += self.nf
        return self.psi

    def _fill_boundary_rows(self, ab):
        left, right = self.left, self.right
        if left.mode == DIRICHLET:
            ab[1, 0] = 1.0
            ab[0, 1] = 0.0
        else:
            ab[1, 0] = -left.kernel.s[0]
            ab[0, 1] = 1.0
        if right.mode == DIRICHLET:
            ab[1, -1] = 1.0
            ab[2, -2] = 0.0
        else:
            ab[1, -1] = -right.kernel.s[0]
            ab[2, -2] = 1.0


def discrete_norm(psi, dx):
    """sqrt(dx * sum |psi_j|^2) along the last axis."""
    return np.sqrt(dx * np.sum(np.abs(psi) ** 2, axis=-1))
