"""Stationary scattering states with exact transparent boundary conditions.

Each generalised eigenfunction Phi_k solves -hbar^2/2m Phi'' + Q Phi = E_k Phi
on [0, L] with a unit wave injected from the left (k >= 0) or the right
(k < 0) and a purely outgoing wave on the far side.  The two Robin
conditions are satisfied simultaneously by integrating the ODE from the
outgoing side with RK4 (unit outgoing data) and rescaling to the incoming
jump condition.
"""

from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams, dispersion
from .resonance import branch_sqrt


@dataclass
class WaveField:
    """Scattering state at wavenumber k: nodal complex values and energy."""

    k: float
    values: np.ndarray
    energy: float


def exit_wavenumbers(params: PhysicalParams, k, B):
    """(kappa_left, kappa_right) of the outgoing channels for the state at
    wavenumber k under bias B.  A closed channel (negative radicand, only
    possible on the left for right-incoming states with small |k|) returns
    the decaying branch i*sqrt(|.|), consistent with the resonance branch
    cut."""
    gamma = params.gamma
    k = np.asarray(k, dtype=float)
    kap_r = np.sqrt(k**2 + gamma * B)          # always open for B >= 0
    kap_l = branch_sqrt(k**2 - gamma * B * (k < 0.0))
    return kap_l, kap_r


N_SUBSTEPS = 3   # RK4 sub-steps per grid cell (keeps flux defects < 1e-6
                 # up to the frequency cutoff)


def _rk4_march(psi, dpsi, coeff, h):
    """One RK4 step of (psi, psi')' = (psi', coeff([x, x+h/2, x+h]) psi).

    ``coeff`` holds gamma*(Q - E) at the step start, midpoint and end
    (the potential is interpolated linearly between nodes); vectorised over
    an ensemble axis.
    """
    c0, cm, c1 = coeff
    k1p = dpsi
    k1d = c0 * psi
    k2p = dpsi + 0.5 * h * k1d
    k2d = cm * (psi + 0.5 * h * k1p)
    k3p = dpsi + 0.5 * h * k2d
    k3d = cm * (psi + 0.5 * h * k2p)
    k4p = dpsi + h * k3d
    k4d = c1 * (psi + h * k3p)
    psi_new = psi + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    dpsi_new = dpsi + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
    return psi_new, dpsi_new


def _march_cell(psi, dpsi, q_from, q_to, e, gamma, h_signed):
    """Advance one grid cell in N_SUBSTEPS RK4 steps, interpolating the
    potential linearly across the cell."""
    n = N_SUBSTEPS
    h = h_signed / n
    for m in range(n):
        f0 = m / n
        fm = (m + 0.5) / n
        f1 = (m + 1) / n
        coeff = (
            gamma * ((1 - f0) * q_from + f0 * q_to - e),
            gamma * ((1 - fm) * q_from + fm * q_to - e),
            gamma * ((1 - f1) * q_from + f1 * q_to - e),
        )
        psi, dpsi = _rk4_march(psi, dpsi, coeff, h)
    return psi, dpsi


def solve_scattering_ensemble(ks, Q, B, params: PhysicalParams, dx,
                              return_derivatives=False):
    """Scattering states for every wavenumber in ``ks`` on the nodal
    potential Q; returns a (len(ks), J+1) complex array (optionally with
    the boundary derivatives (fields, dPhi(0), dPhi(L))).

    k = 0 carries zero incident flux and its state is identically zero (the
    k -> 0 limit of the family); it is returned as a zero row without a
    solve.
    """
    ks = np.asarray(ks, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if not np.all(np.isfinite(Q)):
        raise ValueError("potential contains non-finite values")
    nj = Q.size
    out = np.zeros((ks.size, nj), dtype=complex)
    d_left = np.zeros(ks.size, dtype=complex)
    d_right = np.zeros(ks.size, dtype=complex)
    energies = dispersion(params, ks, B)
    kap_l, kap_r = exit_wavenumbers(params, ks, B)

    pos = np.where(ks > 0.0)[0]
    neg = np.where(ks < 0.0)[0]

    if pos.size:
        e = energies[pos]
        psi = np.ones(pos.size, dtype=complex)
        dpsi = 1j * kap_r[pos].astype(complex)
        vals = np.empty((nj, pos.size), dtype=complex)
        vals[-1] = psi
        gamma = params.gamma
        for j in range(nj - 1, 0, -1):
            psi, dpsi = _march_cell(psi, dpsi, Q[j], Q[j - 1], e, gamma, -dx)
            vals[j - 1] = psi
        kk = ks[pos]
        amp = (dpsi + 1j * kk * psi) / (2j * kk)
        out[pos] = (vals / amp).T
        d_left[pos] = dpsi / amp
        d_right[pos] = 1j * kap_r[pos] / amp

    if neg.size:
        e = energies[neg]
        psi = np.ones(neg.size, dtype=complex)
        dpsi = -1j * kap_l[neg].astype(complex)
        vals = np.empty((nj, neg.size), dtype=complex)
        vals[0] = psi
        gamma = params.gamma
        for j in range(nj - 1):
            psi, dpsi = _march_cell(psi, dpsi, Q[j], Q[j + 1], e, gamma, dx)
            vals[j + 1] = psi
        kk = ks[neg]
        L = (nj - 1) * dx
        amp = (dpsi + 1j * kk * psi) / (2j * kk * np.exp(1j * kk * L))
        out[neg] = (vals / amp).T
        d_left[neg] = -1j * kap_l[neg] / amp
        d_right[neg] = dpsi / amp

    if return_derivatives:
        return out, d_left, d_right
    return out


def solve_scattering(k, Q, B, params: PhysicalParams, dx):
    """Single-wavenumber convenience wrapper returning a WaveField."""
    vals = solve_scattering_ensemble(np.array([float(k)]), Q, B, params, dx)[0]
    return WaveField(k=float(k), values=vals, energy=float(dispersion(params, k, B)))


def reflection_transmission(field: WaveField, B, params: PhysicalParams, L):
    """Extract (r, t) from the boundary values of a scattering state."""
    k = field.k
    vals = field.values
    kap_l, kap_r = exit_wavenumbers(params, k, B)
    if k >= 0.0:
        r = vals[0] - 1.0
        t = vals[-1] * np.exp(-1j * kap_r * L)
    else:
        r = (vals[-1] - np.exp(1j * k * L)) * np.exp(1j * k * L)
        t = vals[0]
    return complex(r), complex(t)


def density_trapezoid(weights, abs2_fields, k_mesh):
    """Trapezoidal frequency integration of the weighted densities:
    n_j = int g(k) |Phi_k(x_j)|^2 dk over the (possibly non-uniform) mesh.

    ``abs2_fields`` has shape (n_k, J+1); returns (J+1,).
    """
    weights = np.asarray(weights, dtype=float)
    abs2_fields = np.asarray(abs2_fields, dtype=float)
    k_mesh = np.asarray(k_mesh, dtype=float)
    if weights.size != k_mesh.size or abs2_fields.shape[0] != k_mesh.size:
        raise ValueError("weights, fields and mesh lengths disagree")
    return np.trapezoid(weights[:, None] * abs2_fields, k_mesh, axis=0)


def refine_near_resonance(
    k_mesh,
    E,
    gamma,
    B,
    params: PhysicalParams,
    n_peak=20,
    grade=1.25,
):
    """Insert mesh points around the resonant frequencies so the Lorentzian
    peak of half-width Gamma is resolved.

    For each resonant frequency k* (the k >= 0 branch at energy E and the
    k < 0 branch at E + B), points are placed with spacing w/n_peak inside
    |k - k*| <= w, where w = gamma_disp * Gamma / (4 |k*|) is the frequency
    half-width of the peak, then graded geometrically out to the base
    spacing.  A peak already resolved by the base mesh leaves it unchanged.
    """
    if gamma <= 0.0:
        raise ValueError("resonance width must be positive")
    k_mesh = np.asarray(k_mesh, dtype=float)
    kM = k_mesh[-1]
    h_base = np.min(np.diff(k_mesh))
    gdisp = params.gamma

    peaks = []
    if E > 0.0:
        peaks.append(np.sqrt(gdisp * E))
    if E + B > 0.0:
        peaks.append(-np.sqrt(gdisp * (E + B)))

    extra = []
    for kr in peaks:
        if abs(kr) >= kM or kr == 0.0:
            continue
        w = gdisp * gamma / (4.0 * abs(kr))
        h_min = w / n_peak
        if h_min >= h_base:
            continue
        core = np.arange(kr - w, kr + w + 0.5 * h_min, h_min)
        extra.append(core)
        h, d = h_min, w
        ladder = []
        while h < h_base:
            d += h
            ladder.append(d)
            h *= grade
        ladder = np.asarray(ladder)
        extra.append(kr + ladder)
        extra.append(kr - ladder)

    if not extra:
        return k_mesh
    merged = np.concatenate([k_mesh] + extra)
    merged = merged[(merged >= -kM) & (merged <= kM)]
    merged = np.unique(merged)
    # collapse near-duplicates that would produce degenerate trapezoid cells
    keep = np.concatenate([[True], np.diff(merged) > 1e-12])
    return merged[keep]
