"""A random polymer walk with a critical point at z = 1.

Each chain multiplies to the identity at z = 1, so transfer matrices stay
bounded there for every random word, and the polymer still spreads.
"""

import numpy as np

from cmvwalk import bounds, coins, dynamics

r = coins.rotation_coin
chains = [[r(0.9), r(-0.9)], [r(0.35), r(0.6), r(-0.6), r(-0.35)]]
model = coins.PolymerCoins(chains, seed=20240601)
seq = coins.CoinVerblunsky(model)

ok, rep = coins.is_critical(model, 1.0)
print("critical at z = 1:", ok)

cert = bounds.verify_power_law(seq, lambda R: [1.0], 0.0, R_grid=(8, 32, 128, 512))
print(f"sup of ||T(n, m; 1)|| over |n|, |m| <= R: C = {cert.C:.3f} (gamma = 0)")
for p in (1.0, 2.0, 4.0):
    e, b = bounds.predicted_lower_exponent(cert, p)
    print(f"p = {p}: lower bound on beta~^- is {b:.3f}")

K = 1000
run = dynamics.simulate(seq, {0: 1.0}, dynamics.horizon_for(K), ps=(2.0,))
Ks = dynamics.log_grid(10, K, 25)
print(f"measured slope at p = 2: {dynamics.estimate_beta(Ks, run.averaged(2.0, Ks), 2.0)['slope']:.3f}")
