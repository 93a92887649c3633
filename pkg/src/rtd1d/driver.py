"""Run orchestration: the stationary coupling loop (Algorithm-1 style) and
the transient loop (Algorithm-2 style) with the direct and one-mode density
engines, plus artifact persistence and a content-addressed cache for
expensive reference runs.
"""

import hashlib
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cn_dtbc import (
    GAUGED,
    HOMOGENEOUS,
    NONHOMOGENEOUS,
    BoundarySpec,
    CnEvolution,
    build_kernel,
)
from .config import RunConfig
from .core import (
    dispersion,
    doping_profile,
    external_potential,
    filled_potential,
    injection_profile,
)
from .oma_stationary import (
    DirectStationaryEngine,
    OmaStationaryEngine,
    theta_coefficients,
)
from .oma_transient import (
    KScanRecord,
    SourceInterpolator,
    align_phase,
    dropped_cross_term,
    k_scan,
    lambda_step,
    residual_phase_mismatch,
    transient_density,
    trapz_weights,
    window_integral,
)
from .poisson import gummel_loop, gummel_poisson_step, linear_poisson
from .resonance import solve_resonance
from .scattering import solve_scattering_ensemble

ENGINES_STATIONARY = ("direct", "oma", "reference")
REFERENCE_P = 4000


@dataclass
class StationaryArtifacts:
    engine: str
    B: float
    x: np.ndarray
    U: np.ndarray
    V: np.ndarray
    n: np.ndarray
    nD: np.ndarray
    e_trace: list
    iterations: int
    k_points: int
    counters: dict
    wall_time: float
    resonance_row: dict | None = None


def _resonance_table_row(cfg: RunConfig, B, U, V, x):
    """Dirichlet-initialised resonance solve on the converged potential,
    reported alongside the Dirichlet ground state energy."""
    from .resonance import dirichlet_ground_state

    geom, params = cfg.geom, cfg.params
    if geom.v0 == 0.0:
        return None
    E0, _ = dirichlet_ground_state(U + V, x, geom.a2, geom.b2, params)
    res = solve_resonance(U + V, x, params, geom.a2, geom.b2, q_right=float(U[-1]))
    return {
        "B_eV": B,
        "E0_meV": float(E0 * 1e3),
        "E_meV": float(res.E * 1e3),
        "gamma_over_E": float(res.gamma / res.E),
        "newton_iterations": int(res.n_cv),
        "residual": float(res.residual),
    }


def run_stationary(cfg: RunConfig, engine="oma", B=None, V0=None, callback=None):
    """Converge the coupled system at a fixed bias.

    engine: 'oma' (coarse mesh, resonance-aware), 'direct' (adaptive mesh),
    'reference' (uniform mesh forced to P=4000).  ``V0`` warm-starts the
    loop (required in practice for B > 0).
    """
    if engine not in ENGINES_STATIONARY:
        raise ValueError(f"unknown stationary engine {engine!r}")
    params, geom = cfg.params, cfg.geom
    B = cfg.bias.B_I if B is None else B
    grids = cfg.grids
    if engine == "reference":
        grids = replace(grids, P=REFERENCE_P, P_coarse=REFERENCE_P)
    x = grids.x_nodes()
    nD = doping_profile(geom, x)
    counters = {}
    if engine == "oma":
        eng = OmaStationaryEngine(params, geom, grids, B, counters=counters)
    else:
        eng = DirectStationaryEngine(
            params, geom, grids, B, adaptive=(engine == "direct"),
            counters=counters,
        )
    V0 = np.zeros(x.size) if V0 is None else np.asarray(V0, dtype=float)

    t0 = time.perf_counter()
    state = gummel_loop(
        eng.density, V0, nD, grids.dx, params, cfg.V_ref,
        tol=cfg.tol, max_iter=cfg.max_iterations, callback=callback,
    )
    wall = time.perf_counter() - t0
    counters["gummel_iterations"] = state.iterations

    U = external_potential(geom, B, x)
    k_points = eng.last_mesh.size - 1 if hasattr(eng, "last_mesh") else grids.P
    return StationaryArtifacts(
        engine=engine,
        B=B,
        x=x,
        U=U,
        V=state.V,
        n=state.n,
        nD=nD,
        e_trace=state.e_trace,
        iterations=state.iterations,
        k_points=k_points,
        counters=counters,
        wall_time=wall,
        resonance_row=_resonance_table_row(cfg, B, U, state.V, x),
    )


@dataclass
class TransientArtifacts:
    engine: str
    times: np.ndarray
    charge: np.ndarray
    d_l: np.ndarray
    N_t: np.ndarray
    E_t: np.ndarray
    gamma_t: np.ndarray
    cross_max: np.ndarray
    mu_imag: np.ndarray
    kscans: list
    x: np.ndarray
    V: np.ndarray
    n: np.ndarray
    counters: dict
    wall_time: float
    step_wall: float


def _phase_energies(params, ks, B_I, B_inf):
    """Correction energies per field for the constant-exterior and gauged
    right closures: the initial-state energy on the left (exterior stays at
    zero), its shift by the exterior change on the right."""
    E_k = dispersion(params, ks, B_I)
    E_left = E_k
    E_right_step = E_k + (B_I - B_inf)     # constant exterior -B_inf
    E_right_gauged = E_k + B_I             # E - Q_{I,L}, potential gauged away
    return E_left, E_right_step, E_right_gauged


def _make_evolution(cfg, psi0, ks, B_I, l_max, ramped):
    """CN evolution for an ensemble of initial scattering states with the
    boundary closures matching the bias schedule: constant-exterior
    corrections for step/constant biases, gauged right boundary when the
    exterior keeps moving."""
    params, grids = cfg.params, cfg.grids
    dx, dt = grids.dx, grids.dt
    B_inf = cfg.bias.B_inf if cfg.bias.mode != "constant" else cfg.bias.B_I
    E_left, E_right_step, E_right_gauged = _phase_energies(params, ks, B_I, B_inf)

    kernel_left = build_kernel(0.0, dx, dt, params, l_max)
    left = BoundarySpec(
        NONHOMOGENEOUS, kernel=kernel_left,
        phi_b=psi0[:, 0].copy(), phi_in=psi0[:, 1].copy(), E_phase=E_left,
    )
    if ramped:
        right = BoundarySpec(
            GAUGED, kernel=build_kernel(0.0, dx, dt, params, l_max),
            phi_b=psi0[:, -1].copy(), phi_in=psi0[:, -2].copy(),
            E_phase=E_right_gauged,
        )
    else:
        right = BoundarySpec(
            NONHOMOGENEOUS, kernel=build_kernel(-B_inf, dx, dt, params, l_max),
            phi_b=psi0[:, -1].copy(), phi_in=psi0[:, -2].copy(),
            E_phase=E_right_step,
        )
    return CnEvolution(psi0, dx, dt, params, left, right, l_max)


def _make_mode_evolution(cfg, v0_field, l_max, ramped, B_inf):
    """Homogeneous-closure evolution for the propagated resonant mode (its
    initial data is numerically supported inside the domain)."""
    params, grids = cfg.params, cfg.grids
    dx, dt = grids.dx, grids.dt
    left = BoundarySpec(HOMOGENEOUS, kernel=build_kernel(0.0, dx, dt, params, l_max))
    one = np.ones(1)
    if ramped:
        right = BoundarySpec(
            GAUGED, kernel=build_kernel(0.0, dx, dt, params, l_max),
            phi_b=0.0 * one, phi_in=0.0 * one, E_phase=0.0 * one,
        )
    else:
        right = BoundarySpec(
            HOMOGENEOUS, kernel=build_kernel(-B_inf, dx, dt, params, l_max)
        )
    return CnEvolution(v0_field[None, :], dx, dt, params, left, right, l_max)


def run_transient(
    cfg: RunConfig,
    initial: StationaryArtifacts,
    engine="oma",
    reference_density=None,
    n_steps=None,
    collect_scans=True,
):
    """Time-march the coupled system from a converged stationary state.

    Per step: damped-Poisson extrapolation of the midpoint potential, CN
    evolution of the wave content (full ensemble for 'direct'; coarse
    non-resonant ensemble plus the two resonant components for 'oma'),
    density assembly, linear Poisson update.  ``reference_density`` feeds
    the d^l distance diagnostic (stationary density at the final bias).
    """
    if engine not in ("oma", "direct"):
        raise ValueError(f"unknown transient engine {engine!r}")
    params, geom, grids, sched = cfg.params, cfg.geom, cfg.grids, cfg.bias
    x, dx, dt = grids.x_nodes(), grids.dx, grids.dt
    nD = doping_profile(geom, x)
    B_I = sched.B_I
    B_inf = sched.B_inf if sched.mode != "constant" else sched.B_I
    ramped = sched.is_time_dependent_after_zero
    if initial.B != B_I:
        raise ValueError("initial artifacts were converged at a different bias")
    n_steps = int(round(grids.t_final / dt)) if n_steps is None else int(n_steps)
    l_max = n_steps + 1

    V = initial.V.copy()
    U_I = external_potential(geom, B_I, x)
    counters = {"cn_ensemble_solves": 0, "cn_mode_solves": 0,
                "resonance_newton_iterations": 0}

    k_fine = grids.k_nodes()
    g_fine = injection_profile(params, k_fine)
    gw_fine = trapz_weights(k_fine) * g_fine
    oma = engine == "oma"

    wmask = (x >= geom.a2) & (x <= geom.b2)
    well_w = trapz_weights(x[wmask])

    if oma:
        k_coarse = grids.k_nodes_coarse()
        gw_coarse = trapz_weights(k_coarse) * injection_profile(params, k_coarse)
        act = k_coarse != 0.0
        res = solve_resonance(
            U_I + V, x, params, geom.a2, geom.b2, q_right=float(U_I[-1])
        )
        u_I_l2 = res.l2_mode(dx)
        fill_I = filled_potential(geom, B_I, x) + V
        psi_nr = solve_scattering_ensemble(k_coarse, fill_I, B_I, params, dx)
        phi_nr_fine = solve_scattering_ensemble(k_fine, fill_I, B_I, params, dx)
        E_fine = dispersion(params, k_fine, B_I)
        theta = theta_coefficients(
            phi_nr_fine, res, E_fine, geom.v0, x, geom.a3, geom.b3, dx
        )
        lam = np.zeros(k_fine.size, dtype=complex)
        v_field = u_I_l2.copy()
        evo_nr = _make_evolution(cfg, psi_nr[act], k_coarse[act], B_I, l_max, ramped)
        evo_v = _make_mode_evolution(cfg, v_field, l_max, ramped, B_inf)
        interp = SourceInterpolator.build(
            params, geom.v0, k_fine, grids.nu, B_inf, x, geom.a3, geom.b3, dx
        )
        u_half_l2 = u_I_l2
        n, _ = transient_density(
            gw_fine, gw_coarse, np.abs(psi_nr) ** 2,
            theta, lam, np.abs(v_field) ** 2, np.abs(u_I_l2) ** 2,
        )
        per_step_solves = int(np.count_nonzero(act))
    else:
        act = k_fine != 0.0
        psi = solve_scattering_ensemble(k_fine, U_I + V, B_I, params, dx)
        evo = _make_evolution(cfg, psi[act], k_fine[act], B_I, l_max, ramped)
        n = gw_fine @ (psi.real**2 + psi.imag**2)
        res = None
        per_step_solves = int(np.count_nonzero(act))
    counters["cn_ensemble_solves_per_step"] = per_step_solves

    times = np.zeros(n_steps + 1)
    charge = np.zeros(n_steps + 1)
    d_l = np.full(n_steps + 1, np.nan)
    N_t = np.full(n_steps + 1, np.nan)
    E_t = np.full(n_steps + 1, np.nan)
    gamma_t = np.full(n_steps + 1, np.nan)
    cross_max = np.full(n_steps + 1, np.nan)
    mu_imag = np.full(n_steps + 1, np.nan)
    kscans = []

    ref_well = None
    if reference_density is not None:
        ref_well = reference_density[wmask]
        ref_nrm = np.sqrt(well_w @ ref_well**2)

    def record(l, t):
        times[l] = t
        charge[l] = well_w @ n[wmask]
        if ref_well is not None:
            diff = n[wmask] - ref_well
            d_l[l] = 100.0 * np.sqrt(well_w @ diff**2) / ref_nrm
        if oma:
            vw = v_field[wmask]
            N_t[l] = well_w @ (vw.real**2 + vw.imag**2)
            E_t[l] = res.E
            gamma_t[l] = res.gamma

    scan_every = max(1, n_steps // max(cfg.snapshots, 1)) if collect_scans else 0

    def snapshot(l, t):
        if not collect_scans or (l % scan_every != 0 and l != n_steps):
            return
        if oma:
            kscans.append(
                k_scan(
                    t, params, k_fine, grids.nu, psi_nr, theta, lam, v_field,
                    u_half_l2, x, geom.a2, geom.b2, res.E, sched.bias_at(t),
                    interp.eps_inf_fine,
                )
            )
        else:
            with np.errstate(divide="ignore"):
                C = np.log(
                    np.trapezoid(np.abs(psi[:, wmask]) ** 2, x[wmask], axis=1)
                )
            kscans.append(
                KScanRecord(
                    t=t, k=k_fine.copy(), C=C,
                    C_theta=np.full(k_fine.size, np.nan),
                    C_lambda=np.full(k_fine.size, np.nan),
                    k_R_minus=np.nan, k_R_plus=np.nan,
                )
            )

    record(0, 0.0)
    snapshot(0, 0.0)

    wall0 = time.perf_counter()
    for l in range(n_steps):
        t_half = (l + 0.5) * dt
        t_new = (l + 1) * dt
        V_half = gummel_poisson_step(V, n, nD, cfg.V_ref, dx, params)
        B_half = sched.bias_at(t_half)
        U_half = external_potential(geom, B_half, x)
        qpair = (-sched.bias_at(l * dt), -sched.bias_at(t_new)) if ramped else None

        if oma:
            U_half_fill = filled_potential(geom, B_half, x)
            psi_nr_old = psi_nr.copy()
            evo_nr.step(U_half_fill + V_half, qL_pair=qpair)
            psi_nr[act] = evo_nr.fields
            counters["cn_ensemble_solves"] += per_step_solves
            evo_v.step(U_half + V_half, qL_pair=qpair)
            v_field = evo_v.fields[0]
            counters["cn_mode_solves"] += 1

            res = solve_resonance(
                U_half + V_half, x, params, geom.a2, geom.b2,
                q_right=float(U_half[-1]), warm_start=res, method="banded",
                polish=False,
            )
            counters["resonance_newton_iterations"] += res.n_cv
            u_prev = u_half_l2
            u_half_l2, _ = align_phase(res.l2_mode(dx), u_prev, dx)
            mu_imag[l + 1] = residual_phase_mismatch(u_half_l2, u_prev, dx) / dt

            S_l = interp.sources(interp.overlaps(psi_nr_old, u_half_l2), l * dt)
            S_lp1 = interp.sources(interp.overlaps(psi_nr, u_half_l2), t_new)
            lam = lambda_step(lam, res.z, S_l, S_lp1, dt, params.hbar)

            n, _ = transient_density(
                gw_fine, gw_coarse, np.abs(psi_nr) ** 2,
                theta, lam, np.abs(v_field) ** 2, np.abs(u_half_l2) ** 2,
            )
            cross = dropped_cross_term(gw_fine, theta, lam, v_field, u_half_l2)
            cross_max[l + 1] = float(
                np.max(np.abs(cross)) / max(float(np.max(n)), 1e-300)
            )
        else:
            evo.step(U_half + V_half, qL_pair=qpair)
            psi[act] = evo.fields
            counters["cn_ensemble_solves"] += per_step_solves
            n = gw_fine @ (psi.real**2 + psi.imag**2)

        V = linear_poisson(n, nD, dx, params)
        record(l + 1, t_new)
        snapshot(l + 1, t_new)
    step_wall = time.perf_counter() - wall0

    return TransientArtifacts(
        engine=engine,
        times=times,
        charge=charge,
        d_l=d_l,
        N_t=N_t,
        E_t=E_t,
        gamma_t=gamma_t,
        cross_max=cross_max,
        mu_imag=mu_imag,
        kscans=kscans,
        x=x,
        V=V,
        n=n,
        counters=counters,
        wall_time=step_wall,
        step_wall=step_wall / max(n_steps, 1),
    )


# ---------------------------------------------------------------------------
# artifact persistence


def _write_tsv(path, header, columns):
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in zip(*cols):
            fh.write("\t".join(repr(float(v)) for v in row) + "\n")


def emit_stationary(art: StationaryArtifacts, out_dir, cfg: RunConfig | None = None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_tsv(out / "potential.tsv", ["x_nm", "U_eV", "V_eV"],
               [art.x, art.U, art.V])
    _write_tsv(out / "density.tsv", ["x_nm", "n_per_nm3", "nD_per_nm3"],
               [art.x, art.n, art.nD])
    _write_tsv(out / "trace.tsv", ["l", "e_l"],
               [np.arange(1, len(art.e_trace) + 1), art.e_trace])
    manifest = {
        "kind": "stationary",
        "engine": art.engine,
        "bias_eV": art.B,
        "iterations": art.iterations,
        "frequency_points": int(art.k_points),
        "counters": art.counters,
        "resonance": art.resonance_row,
        "wall_time_s": art.wall_time,
    }
    if cfg is not None:
        manifest["config"] = cfg.raw
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def emit_transient(art: TransientArtifacts, out_dir, cfg: RunConfig | None = None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_tsv(
        out / "timeseries.tsv",
        ["t_fs", "well_charge_per_nm2", "d_l_percent", "N_t", "E_eV",
         "gamma_eV", "cross_term_ratio", "mu_imag_per_fs"],
        [art.times, art.charge, art.d_l, art.N_t, art.E_t, art.gamma_t,
         art.cross_max, art.mu_imag],
    )
    _write_tsv(out / "potential.tsv", ["x_nm", "V_eV"], [art.x, art.V])
    _write_tsv(out / "density.tsv", ["x_nm", "n_per_nm3"], [art.x, art.n])
    for scan in art.kscans:
        _write_tsv(
            out / f"kscan_{scan.t:09.1f}fs.tsv",
            ["k_per_nm", "C", "C_theta", "C_lambda"],
            [scan.k, scan.C, scan.C_theta, scan.C_lambda],
        )
    manifest = {
        "kind": "transient",
        "engine": art.engine,
        "counters": art.counters,
        "wall_time_s": art.wall_time,
        "step_wall_s": art.step_wall,
        "k_R": [
            {"t_fs": s.t, "k_R_minus": s.k_R_minus, "k_R_plus": s.k_R_plus}
            for s in art.kscans
        ],
    }
    if cfg is not None:
        manifest["config"] = cfg.raw
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def load_potential(art_dir):
    """Read back the converged potential column for warm starts."""
    data = np.loadtxt(Path(art_dir) / "potential.tsv", skiprows=1)
    return data[:, -1]


# ---------------------------------------------------------------------------
# reference cache


def config_hash(cfg: RunConfig, engine, B):
    payload = json.dumps(
        {"config": cfg.raw, "engine": engine, "B": B}, sort_keys=True
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def cached_stationary(cfg, engine, B=None, cache_dir=None, V0=None):
    """Stationary run memoised on disk by config hash (the uniform
    reference run is the costly one reused across comparisons)."""
    B = cfg.bias.B_I if B is None else B
    if cache_dir is None:
        return run_stationary(cfg, engine=engine, B=B, V0=V0)
    key = config_hash(cfg, engine, B)
    slot = Path(cache_dir) / key
    if (slot / "potential.tsv").exists():
        data = np.loadtxt(slot / "potential.tsv", skiprows=1)
        dens = np.loadtxt(slot / "density.tsv", skiprows=1)
        trace = np.loadtxt(slot / "trace.tsv", skiprows=1, ndmin=2)
        with open(slot / "manifest.json", encoding="utf-8") as fh:
            man = json.load(fh)
        return StationaryArtifacts(
            engine=man["engine"], B=man["bias_eV"], x=data[:, 0], U=data[:, 1],
            V=data[:, 2], n=dens[:, 1], nD=dens[:, 2],
            e_trace=list(trace[:, 1]), iterations=man["iterations"],
            k_points=man["frequency_points"], counters=man["counters"],
            wall_time=man["wall_time_s"], resonance_row=man["resonance"],
        )
    art = run_stationary(cfg, engine=engine, B=B, V0=V0)
    emit_stationary(art, slot, cfg)
    return art
