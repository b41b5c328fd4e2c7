"""Time-averaged moments of delta_0 for three walks and their growth exponents.

Free walk (identity coins): ballistic, beta = 1.
Periodic rotation coins: ballistic as well.
Fibonacci coins at strong coupling: anomalous, 0 < beta < 1.
"""

import numpy as np

from cmvwalk import coins, dynamics
from cmvwalk.checks import PAIR_32

K_MAX = 2000
P = 2.0

models = {
    "free": coins.zero_verblunsky(),
    "periodic": coins.CoinVerblunsky(
        coins.PeriodicCoins([coins.rotation_coin(t) for t in (0.4, -1.1, 0.8)])),
    "fibonacci": coins.CoinVerblunsky(coins.FibonacciCoins(*PAIR_32)),
}

Ks = dynamics.log_grid(10, K_MAX, 31)
for name, seq in models.items():
    run = dynamics.simulate(seq, {0: 1.0}, dynamics.horizon_for(K_MAX), ps=(P,))
    fit = dynamics.estimate_beta(Ks, run.averaged(P, Ks), P)
    print(f"{name:10s} beta ~ {fit['slope']:.3f}  "
          f"(secants {fit['beta_lower']:.3f} .. {fit['beta_upper']:.3f})")
