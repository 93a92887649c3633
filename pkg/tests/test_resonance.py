import numpy as np
import pytest
from numpy.testing import assert_allclose

from rtd1d.core import DeviceGeometry, Grids, PhysicalParams, external_potential
from rtd1d.resonance import (
    ResonanceError,
    assemble_fem,
    branch_sqrt,
    branch_sqrt_derivative,
    dirichlet_ground_state,
    newton_resonance,
    solve_resonance,
)
from rtd1d.scattering import (
    WaveField,
    exit_wavenumbers,
    reflection_transmission,
    solve_scattering_ensemble,
)

PARAMS = PhysicalParams()
GEOM = DeviceGeometry()
GRIDS = Grids(L=GEOM.L, J=300)
X = GRIDS.x_nodes()
DX = GRIDS.dx


class TestBranchSqrt:
    def test_fixed_points(self):
        assert branch_sqrt(1.0) == 1.0
        assert_allclose(branch_sqrt(-1.0), 1j, atol=1e-15)
        # on the cut: theta -> 3pi/2 limit
        assert_allclose(branch_sqrt(-1j), np.exp(3j * np.pi / 4), atol=1e-15)

    def test_square_recovers_argument(self):
        rng = np.random.default_rng(11)
        z = rng.normal(size=400) + 1j * rng.normal(size=400)
        s = branch_sqrt(z)
        assert np.max(np.abs(s * s - z) / np.abs(z)) < 1e-14

    def test_upper_half_plane_sign(self):
        rng = np.random.default_rng(12)
        z = rng.normal(size=200) + 1j * np.abs(rng.normal(size=200))
        assert np.all(np.imag(branch_sqrt(z)) >= 0.0)

    def test_continuous_across_negative_reals(self):
        above = branch_sqrt(-4.0 + 1e-12j)
        below = branch_sqrt(-4.0 - 1e-12j)
        assert abs(above - below) < 1e-10
        assert abs(above - 2j) < 1e-6

    def test_scalar_matches_array(self):
        zs = [0.3 + 0.1j, -2.0 + 0.5j, 1.0 - 0.2j, -0.5 - 0.01j]
        arr = branch_sqrt(np.array(zs))
        for z, a in zip(zs, arr):
            assert abs(branch_sqrt(z) - a) < 1e-15

    def test_derivative(self):
        z = 0.13 - 0.002j
        h = 1e-7
        fd = (branch_sqrt(z + h) - branch_sqrt(z - h)) / (2 * h)
        assert abs(fd - branch_sqrt_derivative(z)) < 1e-8


class TestFemAssembly:
    def test_zero_potential_mass(self):
        fem = assemble_fem(np.zeros(11), 0.5, PARAMS)
        c = PARAMS.hbar**2 / (2 * PARAMS.m * 0.5)
        assert_allclose(fem.m1_off, -c)               # zeta = 0
        assert_allclose(fem.m1_diag[1:-1], 2 * c)     # xi = 0

    def test_mass_matrix_integrates_one(self):
        n, dx = 31, 0.37
        fem = assemble_fem(np.zeros(n), dx, PARAMS)
        e = np.ones(n)
        m4e = fem.m4_diag * e
        m4e[:-1] += fem.m4_off * e[1:]
        m4e[1:] += fem.m4_off * e[:-1]
        assert_allclose(e @ m4e, (n - 1) * dx, rtol=1e-14)   # = L

    def test_stiffness_kernel_contains_constants(self):
        n = 17
        fem = assemble_fem(np.zeros(n), 0.45, PARAMS)
        e = np.ones(n, dtype=complex)
        # with Q = 0 the whole of M1 is the stiffness part
        out = fem.m1_diag * e
        out[:-1] += fem.m1_off * e[1:]
        out[1:] += fem.m1_off * e[:-1]
        assert np.max(np.abs(out)) < 1e-14

    def test_analytic_derivative_matches_finite_difference(self):
        Q = external_potential(GEOM, 0.1, X)
        fem = assemble_fem(Q, DX, PARAMS, q_right=float(Q[-1]))
        rng = np.random.default_rng(3)
        u = rng.normal(size=X.size) + 1j * rng.normal(size=X.size)
        u /= np.linalg.norm(u)
        z = 0.09 - 0.0002j
        h = 1e-6
        fd = (fem.apply(z + h, u) - fem.apply(z - h, u)) / (2 * h)
        an = fem.apply_prime(z, u)
        assert np.max(np.abs(fd - an)) / np.max(np.abs(an)) < 1e-6


class TestDirichletGroundState:
    def test_particle_in_a_box(self):
        """Zero potential between the Dirichlet walls: textbook level."""
        w = GEOM.b2 - GEOM.a2
        exact = PARAMS.hbar**2 * np.pi**2 / (2 * PARAMS.m * w**2)
        E0, u0 = dirichlet_ground_state(np.zeros(X.size), X, GEOM.a2, GEOM.b2,
                                        PARAMS)
        assert abs(E0 - exact) / exact < 0.01
        assert_allclose(np.linalg.norm(u0), 1.0, rtol=1e-12)
        outside = (X < GEOM.a2) | (X > GEOM.b2)
        assert np.max(np.abs(u0[outside])) < 1e-12

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            dirichlet_ground_state(np.zeros(X.size), X, 60.0, 59.0, PARAMS)


class TestNewtonResonance:
    def setup_method(self):
        self.U = external_potential(GEOM, 0.0, X)
        self.res = solve_resonance(self.U, X, PARAMS, GEOM.a2, GEOM.b2,
                                   q_right=float(self.U[-1]))

    def test_converges_fast_from_dirichlet(self):
        assert self.res.n_cv <= 5
        assert self.res.residual < 1e-15
        assert self.res.z.imag < 0.0

    def test_quadratic_residual_decay(self):
        h = [r for r in self.res.residual_history if r > 1e-14]
        # log-residual roughly doubles per step over the last two iterations
        rates = [np.log(h[i + 1]) / np.log(h[i]) for i in range(len(h) - 1)
                 if h[i] < 1.0]
        assert max(rates) > 1.5

    def test_initialisation_close_to_dirichlet_level(self):
        E0, _ = dirichlet_ground_state(self.U, X, GEOM.a2, GEOM.b2, PARAMS)
        assert abs(self.res.E - E0) / E0 < 0.05

    def test_mode_normalised_and_phase_fixed(self):
        u = self.res.u
        assert_allclose(np.linalg.norm(u), 1.0, rtol=1e-12)
        j = int(np.argmax(np.abs(u)))
        assert abs(u[j].imag) < 1e-12 * abs(u[j])
        assert u[j].real > 0

    def test_banded_equals_dense(self):
        res_b = solve_resonance(self.U, X, PARAMS, GEOM.a2, GEOM.b2,
                                q_right=float(self.U[-1]), method="banded")
        assert abs(res_b.z - self.res.z) < 1e-13

    def test_warm_start_converges_immediately(self):
        res2 = solve_resonance(self.U, X, PARAMS, GEOM.a2, GEOM.b2,
                               q_right=float(self.U[-1]), warm_start=self.res)
        assert res2.n_cv <= 1
        assert abs(res2.z - self.res.z) < 1e-12

    def test_divergence_reported(self):
        fem = assemble_fem(self.U, DX, PARAMS, q_right=float(self.U[-1]))
        bad_u = np.ones(X.size, dtype=complex)
        with pytest.raises(ResonanceError):
            newton_resonance(fem, 5.0 + 0.0j, bad_u, max_iter=4)


def test_width_matches_transmission_fwhm():
    """Independent oracle: the resonance width equals the Breit-Wigner FWHM
    of the transmission on the same nodal potential, and the symmetric
    double barrier transmits fully on resonance."""
    U = external_potential(GEOM, 0.0, X)
    res = solve_resonance(U, X, PARAMS, GEOM.a2, GEOM.b2, q_right=float(U[-1]))
    E = np.linspace(res.E - 6 * res.gamma, res.E + 6 * res.gamma, 1201)
    ks = np.sqrt(PARAMS.gamma * E)
    fields = solve_scattering_ensemble(ks, U, 0.0, PARAMS, DX)
    _, kr = exit_wavenumbers(PARAMS, ks, 0.0)
    T = (kr / ks) * np.abs(fields[:, -1] * np.exp(-1j * kr * GEOM.L)) ** 2
    i = int(np.argmax(T))
    half = T[i] / 2
    lo = np.interp(half, T[:i], E[:i])
    hi = np.interp(half, T[i:][::-1], E[i:][::-1])
    fwhm = hi - lo
    assert abs(T[i] - 1.0) < 5e-3           # unit peak transmission
    assert abs(E[i] - res.E) < 5e-4          # peak position within 0.5 meV
    assert abs(res.gamma / fwhm - 1.0) < 0.03
