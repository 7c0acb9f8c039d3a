"""Mean cell load: exact integral, interpolated E1, ramp closed form, mean-cell.

The mean-cell estimate averages over the user's SNR, so it weights large
cells more heavily and sits above the typical-cell mean.
"""
from cellload import analytic, geomc
from cellload.analytic import LoadModel
from cellload.specfun import ApproxMode

base = LoadModel().with_(g0_db=36.0)
print("lambda  exact      barry      ramp-cf    mean-cell  voronoi(50 runs)")
for lam_km2 in (10, 50, 200, 1000):
    m = base.with_(lambda_bs=lam_km2 * 1e-6)
    exact = analytic.ei_mean_load(m)
    barry = analytic.ei_mean_load(m, ApproxMode.PAPER_APPROX)
    cf = analytic.cf_mean_load(m)
    mc = analytic.mean_load_mc_baseline(m)
    vor, _ = geomc.run_monte_carlo(m, 50, lam_km2).typical_mean_load()
    print(f"{lam_km2:6d}  {exact:.3e}  {barry:.3e}  {cf:.3e}  {mc:.3e}  {vor:.3e}")

print("\nThe ramp stand-in for the area CDF misses mass below its start, so the closed form runs low.")
