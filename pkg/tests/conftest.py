"""Shared fixtures and independent numerical oracles.

Expensive converged states are computed once per session and memoised on
disk under .cache/ (delete the directory to force recomputation; a cold
run rebuilds everything from scratch)."""

from pathlib import Path

import numpy as np
import pytest

from rtd1d.config import build_config
from rtd1d.driver import cached_stationary, run_stationary, run_transient

CACHE = Path(__file__).resolve().parent.parent / ".cache" / "rtd1d"


@pytest.fixture(scope="session")
def cache_dir():
    CACHE.mkdir(parents=True, exist_ok=True)
    return CACHE


@pytest.fixture(scope="session")
def cfg50():
    return build_config({"mesh": {"J": 300, "P": 50}})


@pytest.fixture(scope="session")
def stationary_bundle(cfg50, cache_dir):
    """Converged states reused across the suite: one-mode engine at P=50
    and the P=4000 uniform reference, at both biases (0 and 0.1 eV, the
    latter warm-started)."""
    oma0 = cached_stationary(cfg50, "oma", B=0.0, cache_dir=cache_dir)
    oma1 = cached_stationary(cfg50, "oma", B=0.1, cache_dir=cache_dir, V0=oma0.V)
    ref0 = cached_stationary(cfg50, "reference", B=0.0, cache_dir=cache_dir)
    ref1 = cached_stationary(cfg50, "reference", B=0.1, cache_dir=cache_dir,
                             V0=ref0.V)
    return {"oma0": oma0, "oma1": oma1, "ref0": ref0, "ref1": ref1}


@pytest.fixture(scope="session")
def desk_cfg():
    """Reduced transient setup: step bias 0 -> 0.1 eV, P'=150/P=300,
    dt = 1 fs, 3 ps horizon (long enough for the spectral peak handover)."""
    return build_config({
        "mesh": {"J": 300, "P": 300, "P_coarse": 150, "dt_s": 1e-15,
                 "t_final_s": 3e-12},
        "bias": {"mode": "step", "B_I_eV": 0.0, "B_inf_eV": 0.1},
        "transient": {"snapshots": 30},
    })


@pytest.fixture(scope="session")
def desk_run(desk_cfg, cache_dir):
    init = cached_stationary(desk_cfg, "oma", B=0.0, cache_dir=cache_dir)
    ref = cached_stationary(desk_cfg, "oma", B=0.1, cache_dir=cache_dir,
                            V0=init.V)
    art = run_transient(desk_cfg, init, engine="oma", reference_density=ref.n)
    return {"cfg": desk_cfg, "init": init, "ref": ref, "art": art}


# ---------------------------------------------------------------------------
# oracles


def transfer_matrix_fields(ks, Q, B, params, dx):
    """Transfer-matrix solution of the scattering problem treating the
    nodal potential as piecewise constant on cells (exact for that
    profile); independent of the RK4 integrator.  Returns fields at nodes.
    """
    from rtd1d.core import dispersion
    from rtd1d.scattering import exit_wavenumbers

    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    Q = np.asarray(Q, dtype=float)
    nj = Q.size
    qc = 0.5 * (Q[:-1] + Q[1:])   # cell-constant values
    out = np.zeros((ks.size, nj), dtype=complex)
    gamma = params.gamma
    for i, k in enumerate(ks):
        if k == 0.0:
            continue
        E = float(dispersion(params, k, B))
        kap_l, kap_r = exit_wavenumbers(params, k, B)
        kcell = np.sqrt((gamma * (E - qc)).astype(complex))
        kcell[kcell == 0.0] = 1e-30
        if k > 0:
            # march from the right with unit outgoing state
            psi, dpsi = 1.0 + 0.0j, 1j * complex(kap_r)
            vals = np.empty(nj, dtype=complex)
            vals[-1] = psi
            for j in range(nj - 2, -1, -1):
                kc = kcell[j]
                c, s = np.cos(kc * dx), np.sin(kc * dx)
                psi, dpsi = psi * c - dpsi * s / kc, dpsi * c + psi * kc * s
                vals[j] = psi
            amp = (dpsi + 1j * k * psi) / (2j * k)
        else:
            psi, dpsi = 1.0 + 0.0j, -1j * complex(kap_l)
            vals = np.empty(nj, dtype=complex)
            vals[0] = psi
            for j in range(1, nj):
                kc = kcell[j - 1]
                c, s = np.cos(kc * dx), np.sin(kc * dx)
                psi, dpsi = psi * c + dpsi * s / kc, dpsi * c - psi * kc * s
                vals[j] = psi
            L = (nj - 1) * dx
            amp = (dpsi + 1j * k * psi) / (2j * k * np.exp(1j * k * L))
        out[i] = vals / amp
    return out


def discrete_scattering_state(E, Q, params, dx):
    """Exact scattering eigenvector of the three-point finite-difference
    Hamiltonian on the whole line (plane waves with the discrete dispersion
    in both exterior leads), restricted to the grid.  Returns (phi, kl, kr).

    This is the steady state the Crank-Nicolson interior scheme propagates
    exactly (up to its own time discretisation), making it the right
    reference for boundary-closure invariance tests.
    """
    Q = np.asarray(Q, dtype=float)
    nj = Q.size
    w = -2.0 * params.m * dx**2 / params.hbar**2

    def disc_kappa(q):
        s2 = (E - q) * params.gamma * dx**2 / 4.0
        return 2.0 / dx * np.arcsin(np.sqrt(complex(s2)))

    kl = disc_kappa(Q[0])
    kr = disc_kappa(Q[-1])
    diagc = -2.0 + w * Q - w * E
    A = np.zeros((nj, nj), dtype=complex)
    b = np.zeros(nj, dtype=complex)
    # unknowns: [r, phi_1 .. phi_{J-1}, t]; phi_0 = 1 + r, phi_J = t
    A[0, 0] = np.exp(1j * kl * dx) + diagc[0]
    A[0, 1] = 1.0
    b[0] = -(np.exp(-1j * kl * dx) + diagc[0])
    for j in range(1, nj - 1):
        if j == 1:
            A[j, 0] += 1.0
            b[j] += -1.0
        else:
            A[j, j - 1] += 1.0
        A[j, j] += diagc[j]
        A[j, j + 1] += 1.0
    A[-1, -2] = 1.0
    A[-1, -1] = diagc[-1] + np.exp(1j * kr * dx)
    sol = np.linalg.solve(A, b)
    phi = np.empty(nj, dtype=complex)
    phi[0] = 1.0 + sol[0]
    phi[1:-1] = sol[1:-1]
    phi[-1] = sol[-1]
    return phi, kl, kr
