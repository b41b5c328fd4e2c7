import math

import numpy as np
import pytest

from cmvwalk import bounds, cocycles, coins
from cmvwalk.errors import EmptySet, NotInDisk


def rand_seq(seed, half=80, radius=0.7):
    rng = np.random.default_rng(seed)
    a = radius * np.sqrt(rng.uniform(size=2 * half)) * np.exp(2j * np.pi * rng.uniform(size=2 * half))
    return coins.ExplicitVerblunsky(a, -half)


def critical_polymer(seed=3):
    r = coins.rotation_coin
    chains = [[r(0.7), r(-0.7)], [r(0.3), r(0.5), r(-0.5), r(-0.3)]]
    return coins.CoinVerblunsky(coins.PolymerCoins(chains, seed=seed))


def test_max_transfer_norm_brute_force():
    seq = rand_seq(0)
    R = 6
    for z in (np.exp(0.4j), 1.05 * np.exp(2.2j)):
        got, (n, m) = bounds.max_transfer_norm(seq, R, z)
        ref = max(cocycles.spectral_norm(cocycles.transfer(seq, i, j, z, "szego"))
                  for i in range(-R, R + 1) for j in range(-R, R + 1))
        assert got == pytest.approx(ref, rel=1e-12)
        T = cocycles.transfer(seq, n, m, z, "szego")
        assert cocycles.spectral_norm(T) == pytest.approx(got, rel=1e-12)


def test_free_walk_certificate_is_trivial():
    cert = bounds.verify_power_law(coins.zero_verblunsky(),
                                   lambda R: np.exp(1j * np.linspace(0, 6, 7)), 0.0)
    assert cert.valid and cert.C == pytest.approx(1.0, abs=1e-14)
    assert cert.samples == 7 * 5


def test_polymer_point_certificate():
    seq = critical_polymer()
    free = bounds.verify_power_law(seq, lambda R: [1.0], 0.0)
    assert free.valid
    # at the critical point every chain transfer is the identity, so norms stay bounded
    cert = bounds.verify_power_law(seq, lambda R: [1.0], 0.0, C=free.C)
    assert cert.valid and cert.worst_ratio <= 1 + 1e-12
    bad = bounds.verify_power_law(seq, lambda R: [1.0], 0.0, C=0.5 * free.C)
    assert not bad.valid and bad.violation["ratio"] > 1


def test_certificate_errors():
    with pytest.raises(EmptySet):
        bounds.verify_power_law(coins.zero_verblunsky(), lambda R: [], 0.0)
    edge = coins.FunctionVerblunsky(lambda n: 0 * n, sup_abs=1.0)
    with pytest.raises(NotInDisk):
        bounds.verify_power_law(edge, lambda R: [1.0], 0.0)
    with pytest.raises(NotInDisk):
        bounds.gz_integrand_sweep(edge, [10], bounds.power_rule(1, 1))


def test_predicted_lower_exponents():
    assert bounds.predicted_lower_exponent(0.0, 3.0) == (2.0, pytest.approx(2 / 3))
    e, b = bounds.predicted_lower_exponent(0.0, 1e9)
    assert b == pytest.approx(1.0, abs=1e-8)
    tau, eta, p = 1.5, 0.4, 20.0
    ref = (p - 3 * tau - eta) / (p * (1 + tau))
    assert bounds.fibonacci_lower_exponent(tau, eta, p) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(ValueError):
        bounds.predicted_lower_exponent(0.0, 2.0, "bands")
    with pytest.raises(ValueError):
        bounds.predicted_lower_exponent(0.0, 2.0, "other")


def test_measure_neighbourhood():
    K = 100
    assert bounds.measure_neighbourhood([(1.0, 1.0)], K) == pytest.approx(2 / K / (2 * np.pi))
    # overlapping neighbourhoods merge
    two = bounds.measure_neighbourhood([(1.0, 1.0), (1.0 + 1 / K, 1.0 + 1 / K)], K)
    assert two == pytest.approx(3 / K / (2 * np.pi))
    assert bounds.measure_neighbourhood([(0, 2 * np.pi)], 1) == 1.0
    assert bounds.measure_neighbourhood([], K) == 0.0


def test_band_set_level_rule():
    sets = bounds.fibonacci_band_sets(0.9, 0.6, per_band=4)
    # smallest k with 2 F_k >= R; F_0 = 1, F_1 = 2, F_2 = 3
    assert [sets.level(R) for R in (1, 2, 3, 4, 5, 6, 7)] == [0, 0, 1, 1, 2, 2, 3]
    pts = sets(5)
    assert len(pts) == 6 * (4 + 2)
    assert np.allclose(np.abs(pts), 1)


def _brute_integrand(seq, K, N, side, m):
    r = math.exp(1 / K)
    vals = []
    for t in 2 * np.pi * np.arange(m) / m:
        z = r * np.exp(1j * t)
        ns = range(1, N + 1) if side == "right" else range(-1, -N - 1, -1)
        best = max(cocycles.spectral_norm(cocycles.transfer(seq, n, 0, z)) for n in ns)
        vals.append(best ** -2)
    return math.log(np.mean(vals))


@pytest.mark.parametrize("side", ["right", "left"])
def test_integrand_against_direct_products(side):
    seq = coins.CoinVerblunsky(coins.FibonacciCoins(0.9, 0.6))
    K, N = 5, 12
    sw = bounds.gz_integrand_sweep(seq, [K], lambda K: N, sides=(side,), min_nodes=256,
                                   extend=False, rtol=1e-6)
    got = sw.log_right[0] if side == "right" else sw.log_left[0]
    assert got == pytest.approx(_brute_integrand(seq, K, N, side, 512), abs=1e-4)


def test_integrand_decreases_with_N():
    seq = rand_seq(1, half=200)
    logs = [bounds.gz_integrand_sweep(seq, [8], bounds.power_rule(c, 1.0), extend=False,
                                      min_nodes=256).log_right[0] for c in (1, 2, 4)]
    assert logs[0] >= logs[1] >= logs[2]


def test_free_walk_integrand_closed_form():
    # alpha = 0: Z(n, 0; z) = Y(n-1)...Y(0) starts with the even swap, so
    # ||Z(n, 0; z)|| = |z|^{floor(n/2)} and I(K) = e^{-2 floor(N/2)/K}
    K, N = 10, 7
    sw = bounds.gz_integrand_sweep(coins.zero_verblunsky(), [K], lambda K: N, extend=False,
                                   min_nodes=64)
    assert sw.log_right[0] == pytest.approx(-2 * (N // 2) / K, abs=1e-12)
    assert sw.Ns[0] == N and not sw.floor_hit
    assert bounds.power_rule(2, 0.5)(100) == 20
