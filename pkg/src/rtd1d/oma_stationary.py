"""Stationary One Mode Approximation.

Each scattering state is split into a non-resonant part (solved with the
well filled to barrier height, smooth in k, cheap on a coarse frequency
mesh) plus a resonant part theta_k * u proportional to the resonant mode.
The sharply peaked |theta_k|^2 weight is integrated in closed form against
the Lorentzian kernel, so the frequency mesh never needs to resolve the
peak.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    DeviceGeometry,
    PhysicalParams,
    dispersion,
    external_potential,
    filled_potential,
    injection_profile,
)
from .poisson import GummelState  # noqa: F401  (re-exported for engine users)
from .resonance import Resonance, solve_resonance
from .scattering import density_trapezoid, solve_scattering_ensemble


def chi(n, a, b, c, d):
    """Closed form of int_a^b x^n / ((x^2 - c)^2 + d^2) dx for n in {0, 1},
    with c > 0, d > 0 and a <= b.

    n = 0 uses the partial-fraction form with z0 = sqrt(c - i d) on the
    principal branch (both sqrt and log cut along the negative reals);
    n = 1 is an arctan difference.  Exact for any placement of the
    Lorentzian peak relative to [a, b].
    """
    if not (c > 0.0 and d > 0.0):
        raise ValueError("chi requires c > 0 and d > 0")
    if a > b:
        raise ValueError("chi requires a <= b")
    if n == 0:
        z0 = np.sqrt(complex(c, -d))
        term = np.log(b + z0) - np.log(a + z0) - np.log(b - z0) + np.log(a - z0)
        return float(np.imag(term / z0) / (2.0 * d))
    if n == 1:
        return float(
            (np.arctan((b * b - c) / d) - np.arctan((a * a - c) / d)) / (2.0 * d)
        )
    raise ValueError("n must be 0 or 1")


def resonant_cell_integral(kp, kp1, R_p, R_p1, E, gamma_res, B, params: PhysicalParams):
    """Exact cell integral J_p = int_{kp}^{kp+1} R_k / |E_k - z|^2 dk with
    R_k linearly interpolated between its endpoint values and
    z = E - i gamma_res/2.

    The dispersion branch (and with it the Lorentzian centre) changes at
    k = 0, so a cell straddling zero is split there; the linear interpolant
    is kept fixed across the split.
    """
    if kp > kp1:
        raise ValueError("cell endpoints out of order")
    if kp1 == kp:
        return 0.0
    alpha = (R_p1 - R_p) / (kp1 - kp)
    beta = (R_p * kp1 - R_p1 * kp) / (kp1 - kp)
    return _cell_integral_fixed_interp(kp, kp1, alpha, beta, E, gamma_res, B, params)


def _cell_integral_fixed_interp(a, b, alpha, beta, E, gamma_res, B, params):
    if a < 0.0 < b:
        return _cell_integral_fixed_interp(
            a, 0.0, alpha, beta, E, gamma_res, B, params
        ) + _cell_integral_fixed_interp(0.0, b, alpha, beta, E, gamma_res, B, params)
    g = params.gamma
    negative_side = (a + b) < 0.0
    c = g * (E + (B if negative_side else 0.0))
    d = g * gamma_res / 2.0
    return g * g * (alpha * chi(1, a, b, c, d) + beta * chi(0, a, b, c, d))


def well_overlap(fields, u_l2, x, a3, b3, dx):
    """Trapezoid integrals int_{a3}^{b3} Phi_k(x) conj(u)(x) dx over the
    grid nodes inside the well, vectorised over the field axis."""
    mask = (x >= a3) & (x <= b3)
    xw = x[mask]
    fw = np.asarray(fields)[..., mask]
    return np.trapezoid(fw * np.conj(u_l2[mask]), xw, axis=-1)


def theta_coefficients(phi_nr, res: Resonance, E_ks, v0, x, a3, b3, dx):
    """Proportionality coefficients theta_k = v0/(z - E_k) *
    int_{a3}^{b3} Phi^nr_k conj(u) dx, with u the L2-normalised mode."""
    if v0 == 0.0:
        return np.zeros(np.asarray(E_ks).size, dtype=complex)
    u_l2 = res.l2_mode(dx)
    w = well_overlap(phi_nr, u_l2, x, a3, b3, dx)
    return v0 / (res.z - np.asarray(E_ks)) * w


@dataclass
class OmaStationaryDecomposition:
    """Diagnostics bundle from one density evaluation."""

    k_mesh: np.ndarray
    phi_nr: np.ndarray
    theta: np.ndarray
    resonance: Resonance
    n_nonresonant: np.ndarray
    n_resonant: np.ndarray
    cross_term_ratio: float


class OmaStationaryEngine:
    """Density engine for the Gummel loop: resonance-aware integration on a
    coarse uniform frequency mesh.

    Per call: one resonance solve (warm-started across calls), one RK4
    ensemble with the filled potential, the smooth trapezoid part, and the
    closed-form resonant cell integrals reusing the same ensemble for the
    interpolated overlap weight.
    """

    def __init__(self, params, geom, grids, B, counters=None, newton_method="dense"):
        self.params = params
        self.geom = geom
        self.grids = grids
        self.B = B
        self.x = grids.x_nodes()
        self.k_mesh = grids.k_nodes()
        self.g = injection_profile(params, self.k_mesh)
        self.E_ks = dispersion(params, self.k_mesh, B)
        self.U = external_potential(geom, B, self.x)
        self.U_fill = filled_potential(geom, B, self.x)
        self.q_right = float(self.U[-1])
        self.resonance = None
        self.last = None
        self.counters = counters if counters is not None else {}
        self.newton_method = newton_method

    def _count(self, key, inc):
        self.counters[key] = self.counters.get(key, 0) + inc

    def density(self, V):
        params, geom, grids = self.params, self.geom, self.grids
        dx = grids.dx
        phi_nr = solve_scattering_ensemble(
            self.k_mesh, self.U_fill + V, self.B, params, dx
        )
        self._count("rk4_solves", int(np.count_nonzero(self.k_mesh != 0.0)))

        n_nr = density_trapezoid(self.g, np.abs(phi_nr) ** 2, self.k_mesh)

        if geom.v0 == 0.0:
            self.last = OmaStationaryDecomposition(
                self.k_mesh, phi_nr, np.zeros(self.k_mesh.size, complex),
                None, n_nr, np.zeros_like(n_nr), 0.0,
            )
            return n_nr

        res = solve_resonance(
            self.U + V, self.x, params, geom.a2, geom.b2,
            q_right=self.q_right, warm_start=self.resonance,
            method=self.newton_method,
        )
        self.resonance = res
        self._count("resonance_newton_iterations", res.n_cv)

        u_l2 = res.l2_mode(dx)
        w = well_overlap(phi_nr, u_l2, self.x, geom.a3, geom.b3, dx)
        R = self.g * geom.v0**2 * np.abs(w) ** 2
        j_total = 0.0
        for p in range(self.k_mesh.size - 1):
            j_total += resonant_cell_integral(
                self.k_mesh[p], self.k_mesh[p + 1], R[p], R[p + 1],
                res.E, res.gamma, self.B, params,
            )
        n_res = j_total * np.abs(u_l2) ** 2

        theta = geom.v0 / (res.z - self.E_ks) * w
        cross = 2.0 * np.real(
            np.trapezoid((self.g * np.conj(theta))[:, None] * phi_nr, self.k_mesh, axis=0)
            * u_l2
        )
        n = n_nr + n_res
        ratio = float(np.max(np.abs(cross)) / max(np.max(n), 1e-300))
        self.last = OmaStationaryDecomposition(
            self.k_mesh, phi_nr, theta, res, n_nr, n_res, ratio
        )
        return n


class DirectStationaryEngine:
    """Direct-resolution density engine: full-potential scattering solves
    on a frequency mesh refined around the current resonance (or kept
    uniform in reference mode)."""

    def __init__(
        self,
        params,
        geom,
        grids,
        B,
        adaptive=True,
        n_peak=20,
        counters=None,
        newton_method="dense",
    ):
        self.params = params
        self.geom = geom
        self.grids = grids
        self.B = B
        self.adaptive = adaptive and geom.v0 > 0.0
        self.n_peak = n_peak
        self.x = grids.x_nodes()
        self.base_mesh = grids.k_nodes()
        self.U = external_potential(geom, B, self.x)
        self.q_right = float(self.U[-1])
        self.resonance = None
        self.last_mesh = self.base_mesh
        self.counters = counters if counters is not None else {}
        self.newton_method = newton_method

    def _count(self, key, inc):
        self.counters[key] = self.counters.get(key, 0) + inc

    def density(self, V):
        from .scattering import refine_near_resonance

        mesh = self.base_mesh
        if self.adaptive:
            res = solve_resonance(
                self.U + V, self.x, self.params, self.geom.a2, self.geom.b2,
                q_right=self.q_right, warm_start=self.resonance,
                method=self.newton_method,
            )
            self.resonance = res
            self._count("resonance_newton_iterations", res.n_cv)
            mesh = refine_near_resonance(
                mesh, res.E, res.gamma, self.B, self.params, n_peak=self.n_peak
            )
        self.last_mesh = mesh
        fields = solve_scattering_ensemble(
            mesh, self.U + V, self.B, self.params, self.grids.dx
        )
        self._count("rk4_solves", int(np.count_nonzero(mesh != 0.0)))
        g = injection_profile(self.params, mesh)
        return density_trapezoid(g, np.abs(fields) ** 2, mesh)
