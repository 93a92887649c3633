"""Lowest complex resonance of the open 1D Hamiltonian on [0, L].

The resonance z = E - i Gamma/2 and its mode u solve a nonlinear
eigenproblem M(z) u = 0 assembled from P1 finite elements with outgoing
(transparent) boundary conditions, where the frequency dependence enters
through a square root branch s(z) holomorphic off the negative imaginary
axis.  The eigenpair is computed by a bordered Newton iteration constrained
to u^H u = 1, initialised from the ground state of the Dirichlet
Hamiltonian restricted to the barrier region.
"""

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

_HALF_PI = 0.5 * np.pi


def branch_sqrt(z):
    """Square root holomorphic on C minus the negative imaginary axis:
    for z = rho e^{i theta} with theta in (-pi/2, 3pi/2], returns
    sqrt(rho) e^{i theta/2}.  Points on the cut itself take the
    theta -> 3pi/2 limit (so s(-i) = e^{3i pi/4})."""
    if np.ndim(z) == 0:
        zc = complex(z)
        theta = cmath.phase(zc)
        if theta <= -_HALF_PI:
            theta += 2.0 * np.pi
        return cmath.rect(abs(zc) ** 0.5, 0.5 * theta)
    z = np.asarray(z, dtype=complex)
    theta = np.angle(z)  # (-pi, pi]
    theta = np.where(theta <= -_HALF_PI, theta + 2.0 * np.pi, theta)
    return np.sqrt(np.abs(z)) * np.exp(0.5j * theta)


def branch_sqrt_derivative(z):
    return 1.0 / (2.0 * branch_sqrt(z))


class ResonanceError(RuntimeError):
    pass


@dataclass
class FemSystem:
    """Tridiagonal pieces of M(z) = M1 + s(z) M2 + s(z - qR) M3 - z M4.

    M1 carries stiffness plus the potential mass, M4 the P1 mass matrix;
    M2/M3 are the single corner entries -i hbar/sqrt(2m) implementing the
    outgoing conditions.  qR is the exterior potential value right of L
    (the left exterior is fixed at zero); the right outgoing channel
    carries the wavenumber sqrt(2m (z - qR))/hbar.
    """

    dx: float
    m1_diag: np.ndarray
    m1_off: np.ndarray
    m4_diag: np.ndarray
    m4_off: np.ndarray
    corner: complex
    q_right: float
    hbar: float
    mass: float

    @property
    def n(self):
        return self.m1_diag.size

    def tridiag(self, z):
        """(diag, off) arrays of M(z)."""
        sl = branch_sqrt(z)
        sr = branch_sqrt(z - self.q_right)
        d = self.m1_diag - z * self.m4_diag
        d[0] += sl * self.corner
        d[-1] += sr * self.corner
        e = self.m1_off - z * self.m4_off
        return d, e

    @staticmethod
    def tridiag_apply(d, e, u):
        out = d * u
        out[:-1] += e * u[1:]
        out[1:] += e * u[:-1]
        return out

    def apply(self, z, u):
        """M(z) @ u."""
        d, e = self.tridiag(z)
        return self.tridiag_apply(d, e, u)

    def apply_prime(self, z, u):
        """M'(z) @ u with s'(w) = 1/(2 s(w))."""
        sl = branch_sqrt(z)
        sr = branch_sqrt(z - self.q_right)
        out = -(self.m4_diag * u)
        out[:-1] -= self.m4_off * u[1:]
        out[1:] -= self.m4_off * u[:-1]
        out[0] += self.corner / (2.0 * sl) * u[0]
        out[-1] += self.corner / (2.0 * sr) * u[-1]
        return out

    def dense(self, z):
        d, e = self.tridiag(z)
        mat = np.diag(d)
        mat += np.diag(e, 1)
        mat += np.diag(e, -1)
        return mat


def assemble_fem(Q, dx, params, q_right=0.0):
    """P1 finite-element matrices for the potential profile Q (nodal, J+1
    values).  The potential mass uses the exact P1 cell integrals of the
    interpolated Q; the corner entries implement the outgoing conditions."""
    Q = np.asarray(Q, dtype=float)
    n = Q.size
    if n < 3:
        raise ValueError("need at least 3 nodes")
    if not np.all(np.isfinite(Q)):
        raise ValueError("potential contains non-finite values")
    c = params.hbar**2 / (2.0 * params.m * dx)

    stiff_diag = np.full(n, 2.0 * c)
    stiff_diag[0] = stiff_diag[-1] = c
    zeta = (Q[:-1] + Q[1:]) / 12.0
    xi = np.empty(n)
    xi[0] = Q[0] / 4.0 + Q[1] / 12.0
    xi[-1] = Q[-1] / 4.0 + Q[-2] / 12.0
    xi[1:-1] = (Q[:-2] + Q[2:]) / 12.0 + Q[1:-1] / 2.0

    m1_diag = stiff_diag + dx * xi
    m1_off = -c + dx * zeta

    m4_diag = np.full(n, 2.0 / 3.0 * dx)
    m4_diag[0] = m4_diag[-1] = dx / 3.0
    m4_off = np.full(n - 1, dx / 6.0)

    corner = -1j * params.hbar / np.sqrt(2.0 * params.m)
    return FemSystem(
        dx=dx,
        m1_diag=m1_diag.astype(complex),
        m1_off=m1_off.astype(complex),
        m4_diag=m4_diag,
        m4_off=m4_off,
        corner=corner,
        q_right=float(q_right),
        hbar=params.hbar,
        mass=params.m,
    )


def dirichlet_ground_state(Q, x, a2, b2, params, n_sub=None):
    """Ground state of -hbar^2/2m d_xx + Q on (a2, b2) with homogeneous
    Dirichlet ends, used to initialise the Newton iteration.

    The eigenproblem is discretised on a dedicated subgrid whose endpoints
    sit exactly at a2 and b2 (the global nodes generally do not), with Q
    linearly interpolated; the mode is then interpolated back to the global
    grid, extended by zero, and normalised to unit Euclidean norm.
    Returns (E0, u0).
    """
    x = np.asarray(x, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if not (x[0] <= a2 < b2 <= x[-1]):
        raise ValueError("Dirichlet interval must lie inside the grid")
    dx = x[1] - x[0]
    if n_sub is None:
        n_sub = max(8, int(round((b2 - a2) / dx)))
    xs = np.linspace(a2, b2, n_sub + 1)
    h = xs[1] - xs[0]
    qs = np.interp(xs, x, Q)
    kin = params.hbar**2 / (2.0 * params.m * h**2)
    diag = 2.0 * kin + qs[1:-1]
    off = np.full(n_sub - 2, -kin)
    try:
        vals, vecs = la.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    except la.LinAlgError as exc:  # pragma: no cover
        raise ResonanceError(f"Dirichlet eigensolve failed: {exc}") from exc
    e0 = float(vals[0])
    mode = np.zeros(n_sub + 1)
    mode[1:-1] = vecs[:, 0]
    u0 = np.interp(x, xs, mode, left=0.0, right=0.0)
    u0 = u0 / np.linalg.norm(u0)
    return e0, u0.astype(complex)


@dataclass
class Resonance:
    """Converged resonance: z = E - i Gamma/2 (eV), Euclidean-normalised
    nodal mode u, iteration count n_cv (first iterate meeting the residual
    tolerance) and the residual history."""

    z: complex
    u: np.ndarray
    n_cv: int
    residual: float
    residual_history: list = field(default_factory=list)

    @property
    def E(self):
        return self.z.real

    @property
    def gamma(self):
        return -2.0 * self.z.imag

    def l2_mode(self, dx):
        """Mode rescaled to unit L2(0, L) norm under the trapezoid rule."""
        w = np.full(self.u.size, dx)
        w[0] = w[-1] = dx / 2.0
        return self.u / np.sqrt(np.sum(w * np.abs(self.u) ** 2))


def _bordered_solve_dense(fem, z, u, r):
    n = fem.n
    b = fem.apply_prime(z, u)
    A = np.zeros((n + 1, n + 1), dtype=complex)
    A[:n, :n] = fem.dense(z)
    A[:n, n] = b
    A[n, :n] = np.conj(u)
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[:n] = -r
    sol = la.solve(A, rhs)
    return sol[:n], sol[n]


def _bordered_solve_banded(fem, z, u, r):
    # Schur elimination of the tridiagonal block; equivalent to the dense
    # bordered solve whenever M(z) is numerically invertible.
    d, e = fem.tridiag(z)
    b = fem.apply_prime(z, u)
    rhs = np.column_stack([r, b])
    du_, d_, dl_, x, info = lapack.zgtsv(e, d, e, rhs)
    if info != 0:
        raise la.LinAlgError(f"zgtsv failed (info={info})")
    x1, x2 = x[:, 0], x[:, 1]
    denom = np.vdot(u, x2)
    if denom == 0.0:
        raise la.LinAlgError("singular bordered system")
    dz = -np.vdot(u, x1) / denom
    du = -x1 - dz * x2
    return du, dz


def newton_resonance(
    fem: FemSystem,
    z0,
    u0,
    tol=1e-15,
    max_iter=50,
    method="dense",
    canonical_phase=True,
    polish=True,
):
    """Bordered Newton iteration for the nonlinear eigenpair.

    Each step solves [[M(z), M'(z)u], [u^H, 0]] [du, dz] = [-M(z)u, 0],
    renormalises u and repeats until ||M(z)u||_2 < tol.  n_cv records the
    first iterate below tolerance; with ``polish`` the iteration continues
    until dz stagnates at machine level, making the returned z a numerically
    stationary function of the potential (the Gummel loop needs that to
    reach its own 1e-15 fixed point; the time loop does not and skips it).

    method: 'dense' factorises the full bordered matrix, 'banded' uses two
    tridiagonal solves (fast path for the time loop) and falls back to
    dense if it stalls.
    """
    u = np.asarray(u0, dtype=complex).copy()
    nrm = np.linalg.norm(u)
    if nrm == 0.0:
        raise ValueError("initial mode must be nonzero")
    u /= nrm
    z = complex(z0)

    solver = _bordered_solve_banded if method == "banded" else _bordered_solve_dense
    r = fem.apply(z, u)
    res = float(np.linalg.norm(r))
    history = [res]
    n_cv = 0 if res < tol else None
    zscale = max(abs(z), 1e-6)

    for n in range(1, max_iter + 1):
        if n_cv is not None and not polish:
            break
        try:
            du, dz = solver(fem, z, u, r)
        except la.LinAlgError:
            if method == "banded":
                du, dz = _bordered_solve_dense(fem, z, u, r)
            else:
                raise ResonanceError("bordered system singular") from None
        u_new = u + du
        nrm = np.linalg.norm(u_new)
        if nrm == 0.0:
            raise ResonanceError("Newton update annihilated the mode")
        u_new /= nrm
        z_new = z + dz
        r_new = fem.apply(z_new, u_new)
        res_new = float(np.linalg.norm(r_new))
        if n_cv is not None and res_new > res:
            break  # polishing no longer helps; keep the previous iterate
        u, z, r, res = u_new, z_new, r_new, res_new
        history.append(res)
        if n_cv is None and res < tol:
            n_cv = n
        if n_cv is not None and abs(dz) < 1e-16 * zscale:
            break

    if n_cv is None:
        if method == "banded":
            return newton_resonance(
                fem, z, u, tol=tol, max_iter=max_iter, method="dense",
                canonical_phase=canonical_phase, polish=polish,
            )
        raise ResonanceError(
            f"no convergence after {max_iter} iterations, residual {res:.3e}"
        )
    if canonical_phase:
        j = int(np.argmax(np.abs(u)))
        phase = u[j] / abs(u[j])
        u = u / phase
    return Resonance(z=z, u=u, n_cv=n_cv, residual=res, residual_history=history)


def solve_resonance(
    Q,
    x,
    params,
    a2,
    b2,
    q_right=0.0,
    warm_start=None,
    tol=1e-15,
    method="dense",
    polish=True,
):
    """One-stop resonance solve for the potential profile Q: assemble the
    FEM system, initialise from ``warm_start`` (a previous Resonance) or the
    Dirichlet ground state, and run the Newton iteration."""
    dx = x[1] - x[0]
    fem = assemble_fem(Q, dx, params, q_right=q_right)
    if warm_start is not None:
        z0, u0 = warm_start.z, warm_start.u
        canonical = False
    else:
        z0, u0 = dirichlet_ground_state(Q, x, a2, b2, params)
        canonical = True
    return newton_resonance(
        fem, z0, u0, tol=tol, method=method, canonical_phase=canonical,
        polish=polish,
    )
