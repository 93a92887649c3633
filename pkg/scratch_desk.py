# scratch: full desk-scale transient (P'=150/P=300, 2 ps) -> criteria 5/6/7 numbers
import numpy as np
from rtd1d.config import build_config
from rtd1d.driver import run_stationary, run_transient

cfg = build_config({
    "mesh": {"J": 300, "P": 300, "P_coarse": 150, "dt_s": 1e-15, "t_final_s": 2e-12},
    "bias": {"mode": "step", "B_I_eV": 0.0, "B_inf_eV": 0.1},
    "transient": {"snapshots": 20},
})
init = run_stationary(cfg, engine="oma")
print("stationary B=0:", init.iterations, "iters")
ref_inf = run_stationary(cfg, engine="oma", B=0.1, V0=init.V)
print("stationary B=0.1 (oma):", ref_inf.iterations, "iters; res:", ref_inf.resonance_row)

art = run_transient(cfg, init, engine="oma", reference_density=ref_inf.n)
print("OMA step wall:", art.step_wall, " per-step solves:", art.counters["cn_ensemble_solves_per_step"])

dt = cfg.grids.dt
i0, i1 = 1000, 2000
ratio = art.N_t[i1] / art.N_t[i0]
gam = art.gamma_t[i0:i1 + 1]
integral = np.trapezoid(gam, art.times[i0:i1 + 1]) / cfg.params.hbar
print(f"N ratio = {ratio:.4f}   exp(-int Gamma/hbar) = {np.exp(-integral):.4f}  diff = {abs(ratio-np.exp(-integral)):.4f}")
print("charge: t=0:", art.charge[0], " 0.3ps:", art.charge[300], " 1ps:", art.charge[1000], " 2ps:", art.charge[-1])
print("d_l: 0:", art.d_l[0], " 1ps:", art.d_l[1000], " 2ps:", art.d_l[-1])
print("E_t: 0+:", art.E_t[1], " 1ps:", art.E_t[1000], " 2ps:", art.E_t[-1])
print("gamma_t end:", art.gamma_t[-1])

# peak migration: argmax over k>0 of C(t,k) at snapshots
kf = cfg.grids.k_nodes()
nu = cfg.grids.nu
ck = cfg.grids.k_nodes_coarse()
coarse_cell = nu * (kf[1] - kf[0])
gpos = kf > 0
kI = np.sqrt(cfg.params.gamma * init.resonance_row["E_meV"] * 1e-3)
for scan in art.kscans:
    kpk = scan.k[gpos][np.argmax(scan.C[gpos])]
    lam_pk = scan.k[gpos][np.argmax(scan.C_lambda[gpos])]
    print(f"t={scan.t:7.1f}  argmaxC={kpk:.4f}  kR+={scan.k_R_plus:.4f}  "
          f"argmax|lam|k={lam_pk:.4f}  dist_cells={(abs(kpk-scan.k_R_plus))/coarse_cell:.2f} "
          f"lam_dist={(abs(lam_pk-scan.k_R_plus))/coarse_cell:.2f}  kI_dist={abs(kpk-kI)/coarse_cell:.2f}")

# matched direct segment for wall ratio
art_d = run_transient(cfg, init, engine="direct", n_steps=300, collect_scans=False)
art_o = run_transient(cfg, init, engine="oma", n_steps=300, collect_scans=False)
print("wall ratio oma/direct:", art_o.step_wall / art_d.step_wall,
      " solves:", art_o.counters["cn_ensemble_solves_per_step"],
      art_d.counters["cn_ensemble_solves_per_step"])
