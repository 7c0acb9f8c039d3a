"""Link budget and Poisson-Voronoi cell areas.

Builds the default 28 GHz network, prints the SNR coefficient xi, then
checks the gamma(3.5) area law against simulated Voronoi cells.
"""
import numpy as np
from scipy import stats

from cellload import analytic, geomc
from cellload.analytic import LoadModel
from cellload.linkbudget import NetworkParams

net = NetworkParams(g0_db=20.0, lambda_bs=1e-5)
print(f"noise power  {net.noise_power_dbm:.1f} dBm")
print(f"path gain K  {net.k_pathloss_db:.2f} dB at 1 m")
print(f"xi           {net.xi_db:.2f} dB = {net.xi:.3e}")

model = LoadModel(net)
print(f"high-SNR disk limit: {model.max_area / 1e6:.3g} km^2 vs mean cell {1 / net.lambda_bs / 1e6:.3g} km^2")

# %% simulated cells
run = geomc.run_monte_carlo(model, 100, 1, keep_cells=True)
s = run.cells.area_m2 * net.lambda_bs
print(f"\n{len(s)} inner cells, mean reduced area {s.mean():.4f}")
ks = stats.kstest(s, lambda x: analytic.area_cdf(x / net.lambda_bs, net.lambda_bs))
print(f"KS distance to gamma(3.5) law: {ks.statistic:.4f}")

st = geomc.typical_vs_zero_stats(run.cells)
print(f"zero-cell / typical-cell mean area: {st.zero_mean_area / st.typical_mean_area:.3f} (theory {4.5 / 3.5:.3f})")

# %% quantiles side by side
for q in (0.1, 0.5, 0.9):
    print(f"  q={q:.1f}  analytic {analytic.area_ppf(q, net.lambda_bs) * net.lambda_bs:.3f}  simulated {np.quantile(s, q):.3f}")
