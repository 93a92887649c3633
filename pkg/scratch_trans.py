# scratch: smoke-test the transient loop at small scale
import numpy as np
from rtd1d.config import build_config
from rtd1d.driver import run_stationary, run_transient

cfg = build_config({
    "mesh": {"J": 300, "P": 100, "P_coarse": 50, "dt_s": 1e-15, "t_final_s": 5e-14},
    "bias": {"mode": "step", "B_I_eV": 0.0, "B_inf_eV": 0.1},
    "transient": {"snapshots": 5},
})
init = run_stationary(cfg, engine="oma")
print("stationary:", init.iterations, "iters; resonance:", init.resonance_row)

art = run_transient(cfg, init, engine="oma")
print("counters:", art.counters)
print("charge:", art.charge[:3], "...", art.charge[-3:])
print("N_t:", art.N_t[:3], art.N_t[-3:])
print("E_t:", art.E_t[1], art.E_t[-1], "gamma:", art.gamma_t[-1])
print("mu_imag max:", np.nanmax(np.abs(art.mu_imag)))
print("cross max:", np.nanmax(art.cross_max))
print("step wall:", art.step_wall)

art2 = run_transient(cfg, init, engine="direct")
print("direct counters:", art2.counters)
print("direct charge:", art2.charge[-3:])
print("direct step wall:", art2.step_wall)
