"""Dimensioning: how many BSs per km^2 keep most cells stable?

Finds the density at which a target share of cells has load below one,
for a few antenna gains and traffic levels.
"""
import math

from scipy import optimize

from cellload import analytic
from cellload.analytic import LoadModel


def density_for(target, model):
    f = lambda log_l: analytic.stable_fraction(model.with_(lambda_bs=math.exp(log_l) * 1e-6)) - target
    return math.exp(optimize.brentq(f, math.log(0.05), math.log(1e4), xtol=1e-6))


print("G0 dB  lambda_u/km^2  BS/km^2 for 50%  for 95%")
for g0 in (10.0, 20.0, 36.0):
    for lam_u in (100.0, 1000.0):
        m = LoadModel().with_(g0_db=g0, lambda_u=lam_u * 1e-6)
        try:
            d50, d95 = density_for(0.5, m), density_for(0.95, m)
            print(f"{g0:5.0f}  {lam_u:13.0f}  {d50:15.2f}  {d95:7.2f}")
        except ValueError:
            print(f"{g0:5.0f}  {lam_u:13.0f}  outside the searched range")
