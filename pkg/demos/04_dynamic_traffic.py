"""Dynamic processor-sharing traffic against a static full-buffer baseline.

One BS serving a disk is checked against the M/G/1-PS laws, then a
Voronoi network compares flow throughput with static Poisson users.
"""
import numpy as np

from cellload import analytic, dynsim, geomc
from cellload.analytic import LoadModel
from cellload.dynsim import SimConfig

# %% single cell at load 0.5
base = LoadModel()
area = 1.0 / base.lam
per_unit = analytic.disk_load_exact(area, base) / base.traffic.lambda_u
m = base.with_(lambda_u=0.5 / per_unit)
s = dynsim.simulate_disk_cell(area, m, SimConfig(duration_s=2000.0, seed=3))
print(f"rho {s.rho_hat:.3f}  E[N] {s.mean_users:.3f} (PS law {s.rho_hat / (1 - s.rho_hat):.3f})")
print(f"Little gap {s.little_gap:+.4f} +- {s.little_stderr:.4f}")
print(f"flow throughput {s.flow_throughput:.3e} bit/s vs formula {analytic.dyn_throughput(s.rho_hat, m) * m.lam * area:.3e}")

# %% network
half, guard = geomc.default_window(base.lam, 16)
r = geomc.sample_ppp(base.lam, half, 4, guard)
cfg = SimConfig(duration_s=200.0, seed=4)
print("\nlambda_u/km^2  rho    dynamic     static")
for lam_km2 in (50, 200, 400):
    mm = base.with_(lambda_u=lam_km2 * 1e-6)
    dyn = dynsim.simulate_dynamic(r, mm, cfg, 40_000)
    rho = float(np.mean(dyn.rho_hat[~dyn.unstable]))
    st = dynsim.simulate_static_ppp_users(r, mm, analytic.mean_active_users(rho), cfg, 200, 40_000)
    print(f"{lam_km2:13d}  {rho:.3f}  {dyn.flow_throughput_hat:.3e}  {st.throughput_hat:.3e}")
