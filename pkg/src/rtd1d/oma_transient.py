"""Transient One Mode Approximation machinery.

Each wave is decomposed as Psi_k = Psi^nr_k + theta_k v + lambda_k u, with
Psi^nr the non-resonant ensemble (filled potential, coarse frequency mesh),
v the propagated initial resonant mode, u the instantaneous resonant mode
(phase-aligned between half-steps so its time derivative drops out of the
lambda equation), and lambda_k driven by well-overlap sources interpolated
from the coarse ensemble with the asymptotic phase of the target frequency.
"""

from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams


class PhaseAlignmentError(RuntimeError):
    pass


def trapz_weights(x):
    """Trapezoid quadrature weights for (possibly non-uniform) nodes."""
    x = np.asarray(x, dtype=float)
    w = np.empty(x.size)
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    return w


def align_phase(u_new, u_prev, dx):
    """Rotate the freshly solved mode so its overlap with the previous
    half-step mode is real nonnegative; returns (u_aligned, overlap).

    A collapsed overlap means the Newton iteration jumped to a different
    resonance branch; that is a hard error, never silently patched.
    """
    w = np.full(u_new.size, dx)
    w[0] = w[-1] = 0.5 * dx
    omega = np.sum(w * u_new * np.conj(u_prev))
    if abs(omega) < 1e-8:
        raise PhaseAlignmentError(
            f"mode overlap collapsed (|omega| = {abs(omega):.3e}); the "
            "resonance tracking lost its branch"
        )
    u = u_new * (np.conj(omega) / abs(omega))
    return u, omega


def residual_phase_mismatch(u_new, u_prev, dx):
    """Im of the aligned-mode overlap (drives the dropped mode-derivative
    term in the lambda equation)."""
    w = np.full(u_new.size, dx)
    w[0] = w[-1] = 0.5 * dx
    return float(np.imag(np.sum(w * u_new * np.conj(u_prev))))


def lambda_step(lam, z, S_l, S_lp1, dt, hbar):
    """Cayley update of the resonant coefficients:

        lam^{l+1} = [(1 - i dt z / 2 hbar) lam^l + dt/2 (S^l + S^{l+1})]
                    / (1 + i dt z / 2 hbar)

    with the mode-derivative term fixed to zero by the phase alignment.
    """
    a = 1j * dt * z / (2.0 * hbar)
    return ((1.0 - a) * lam + 0.5 * dt * (S_l + S_lp1)) / (1.0 + a)


def asymptotic_energies(params: PhysicalParams, k, B_inf):
    """Large-time oscillation energy of each frequency: kinetic term, shifted
    by the final bias for right-incoming states."""
    k = np.asarray(k, dtype=float)
    e = params.hbar**2 * k**2 / (2.0 * params.m)
    return np.where(k >= 0.0, e, e - B_inf)


@dataclass
class SourceInterpolator:
    """Well-overlap sources on the fine mesh from the coarse ensemble.

    The coarse field is detrended by its own asymptotic phase and retrended
    with the target frequency's, so the interpolated source oscillates at
    the target's asymptotic energy (a polynomial interpolation in k would
    miss the resonance condition entirely).  On coarse nodes the phases
    cancel and the source is the directly computed one.
    """

    params: PhysicalParams
    v0: float
    nu: int
    eps_inf_fine: np.ndarray
    well_mask: np.ndarray
    well_w: np.ndarray
    owner: np.ndarray
    phase_rate: np.ndarray   # (eps_inf at owner node - eps_inf)/hbar

    @classmethod
    def build(cls, params, v0, k_fine, nu, B_inf, x, a3, b3, dx):
        mask = (x >= a3) & (x <= b3)
        eps_inf = asymptotic_energies(params, k_fine, B_inf)
        owner = np.arange(k_fine.size) // nu
        owner[-1] = (k_fine.size - 1) // nu  # last node is its own coarse node
        rate = (eps_inf[owner * nu] - eps_inf) / params.hbar
        return cls(
            params=params,
            v0=v0,
            nu=nu,
            eps_inf_fine=eps_inf,
            well_mask=mask,
            well_w=trapz_weights(x[mask]),
            owner=owner,
            phase_rate=rate,
        )

    def overlaps(self, psi_nr_fields, u_l2):
        """(i/hbar) v0 int_{a3}^{b3} Psi^nr_p' conj(u) dx per coarse field."""
        uw = self.well_w * np.conj(u_l2[self.well_mask])
        return (1j / self.params.hbar * self.v0) * (
            psi_nr_fields[:, self.well_mask] @ uw
        )

    def sources(self, overlaps_coarse, t_m):
        return overlaps_coarse[self.owner] * np.exp(1j * self.phase_rate * t_m)


def transient_density(gw_fine, gw_coarse, psi_nr_abs2, theta, lam, v_abs2, u_abs2):
    """Step-S2 density assembly: coarse trapezoid of the non-resonant
    weights plus fine trapezoids of g |theta|^2 and g |lambda|^2 scaling the
    two resonant profiles.  ``gw_*`` are injection-weighted trapezoid
    vectors.  Returns (n, n_nonresonant)."""
    n_nr = gw_coarse @ psi_nr_abs2
    c_theta = gw_fine @ np.abs(theta) ** 2
    c_lam = gw_fine @ np.abs(lam) ** 2
    return n_nr + c_theta * v_abs2 + c_lam * u_abs2, n_nr


def dropped_cross_term(gw_fine, theta, lam, v, u):
    """Magnitude profile of the neglected interference between the two
    resonant components (logged as a diagnostic, never added)."""
    t = gw_fine @ (theta * np.conj(lam))
    return 2.0 * np.real(t * v * np.conj(u))


def window_integral(field_abs2, x, a, b):
    """int_a^b |field|^2 dx over the grid nodes inside [a, b]."""
    mask = (x >= a) & (x <= b)
    return float(np.trapezoid(field_abs2[mask], x[mask]))


def resonant_wavenumbers(params: PhysicalParams, E, B):
    """Frequencies whose dispersion energy matches E: k_R+ (left branch) and
    k_R- (right branch at E + B); NaN where the branch is closed."""
    g = params.gamma
    kp = np.sqrt(g * E) if E > 0 else np.nan
    km = -np.sqrt(g * (E + B)) if E + B > 0 else np.nan
    return km, kp


@dataclass
class KScanRecord:
    """Well-charge spectroscopy at one instant: C = log int_{a2}^{b2}
    |Psi_k|^2 dx on the fine mesh, with the component analogues."""

    t: float
    k: np.ndarray
    C: np.ndarray
    C_theta: np.ndarray
    C_lambda: np.ndarray
    k_R_minus: float
    k_R_plus: float


def k_scan(
    t,
    params,
    k_fine,
    nu,
    psi_nr_fields,
    theta,
    lam,
    v,
    u_l2,
    x,
    a2,
    b2,
    E_res,
    B,
    eps_inf_fine,
):
    """Reconstruct |Psi_k|^2 in the well on the fine mesh (coarse fields
    carried over by the detrended piecewise-constant rule) and log-integrate.
    Zero integrals map to -inf, kept as-is for plotting."""
    mask = (x >= a2) & (x <= b2)
    xw = x[mask]
    owner = np.arange(k_fine.size) // nu
    owner[-1] = psi_nr_fields.shape[0] - 1
    phase = np.exp(
        1j * (eps_inf_fine[owner * nu] - eps_inf_fine) * t / params.hbar
    )
    psi = (
        psi_nr_fields[owner][:, mask] * phase[:, None]
        + theta[:, None] * v[None, mask]
        + lam[:, None] * u_l2[None, mask]
    )
    with np.errstate(divide="ignore"):
        C = np.log(np.trapezoid(np.abs(psi) ** 2, xw, axis=1))
        C_theta = np.log(
            np.abs(theta) ** 2 * np.trapezoid(np.abs(v[mask]) ** 2, xw)
        )
        C_lambda = np.log(
            np.abs(lam) ** 2 * np.trapezoid(np.abs(u_l2[mask]) ** 2, xw)
        )
    km, kp = resonant_wavenumbers(params, E_res, B)
    return KScanRecord(
        t=t, k=k_fine.copy(), C=C, C_theta=C_theta, C_lambda=C_lambda,
        k_R_minus=km, k_R_plus=kp,
    )
