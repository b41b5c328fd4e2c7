import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmvwalk import coins
from cmvwalk.errors import DegenerateCoin, NotInDisk, OutOfWindow


def haar_coin(seed):
    rng = np.random.default_rng(seed)
    while True:
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        if min(abs(q[0, 0]), abs(q[1, 1])) > 0.05:
            return q


def test_rotation_coin_values():
    assert np.array_equal(coins.rotation_coin(0.0), np.eye(2))
    h = math.sqrt(2) / 2
    assert np.allclose(coins.rotation_coin(math.pi / 4), [[h, -h], [h, h]], atol=1e-15)
    with pytest.raises(DegenerateCoin):
        coins.rotation_coin(math.pi / 2)


def test_make_coin_rejects_non_unitary_and_zero_diagonal():
    with pytest.raises(DegenerateCoin):
        coins.make_coin(1, 1, 0, 1)
    with pytest.raises(DegenerateCoin):
        coins.make_coin(0, 1, 1, 0)


def test_identity_coins_give_zero_coefficients():
    seq = coins.CoinVerblunsky(coins.PeriodicCoins([np.eye(2)]))
    assert np.all(seq.window(-31, 40) == 0)


@pytest.mark.parametrize("theta", [0.1, 0.7, 1.3])
def test_constant_rotation_gives_sine(theta):
    a = coins.CoinVerblunsky(coins.PeriodicCoins([coins.rotation_coin(theta)])).window(-21, 20)
    ns = np.arange(-21, 21)
    assert np.allclose(a[ns % 2 == 1], math.sin(theta), atol=1e-15)
    assert np.all(a[ns % 2 == 0] == 0)


def test_single_coin_hand_value():
    s, c = 0.5, math.sqrt(3) / 2
    q = coins.make_coin(c, 1j * s, 1j * s, c)
    a = coins.cgmv_verblunsky(coins.PeriodicCoins([q]), 1, 1)
    assert abs(a[0] - (-0.5j)) < 1e-15


def test_substitution_words():
    assert coins.substitution_word("fibonacci", 3) == "abaab"
    assert coins.substitution_word("thue_morse", 4) == "abbabaabbaababba"
    assert coins.substitution_word("fibonacci", 0) == coins.substitution_word("thue-morse", 0) == "a"


def test_two_sided_fibonacci_word():
    assert "".join(coins.fibonacci_two_sided(n) for n in range(13)) == "abaababaabaab"
    assert coins.fibonacci_two_sided(-3) == coins.fibonacci_two_sided(0) == "a"
    assert coins.fibonacci_two_sided(-1) == "b"
    assert coins.fibonacci_two_sided(-2) == "a"


def test_fibonacci_word_is_limit_of_substitution_prefixes():
    n = 10000
    word = coins.substitution_word("fibonacci", 20)
    assert len(word) > n
    fast = "".join(np.where(coins.fibonacci_letters(0, n), "a", "b"))
    assert fast == word[:n + 1]


def test_fibonacci_letters_exact_far_out():
    # the vectorized path and the exact integer path agree at large |n|
    for n0 in (10 ** 8 - 50, -(10 ** 8) - 50):
        fast = coins.fibonacci_letters(n0, n0 + 100)
        slow = [coins.fibonacci_two_sided(n) == "a" for n in range(n0, n0 + 101)]
        assert list(fast) == slow


def test_thue_morse_doubling():
    swap = str.maketrans("ab", "ba")
    w = "a"
    for k in range(20):
        nxt = coins.substitution_word("thue_morse", k + 1)
        assert nxt == w + w.translate(swap)
        w = nxt
    letters = coins.thue_morse_letters(0, len(w) - 1)
    assert "".join(np.where(letters, "a", "b")) == w


def test_thue_morse_two_sided_reflection():
    left = coins.thue_morse_letters(-64, -1)[::-1]
    right = coins.thue_morse_letters(0, 63)
    assert np.array_equal(left, right)


def test_fibonacci_numbers():
    assert [coins.fibonacci_number(k) for k in range(-1, 7)] == [1, 1, 2, 3, 5, 8, 13, 21]
    assert len(coins.substitution_word("fibonacci", 9)) == coins.fibonacci_number(9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_cgmv_formulas_and_modulus(seed):
    table = [haar_coin(seed + i) for i in range(12)]
    seq = coins.ExplicitCoins(table, -6)
    q = seq.coins(-5, 4)
    lam_o, lam_e = coins.gauge(seq, -5, 4)
    f1 = lam_o[:-1] / lam_e[:-1] * np.conj(q[:, 1, 0])
    f2 = -lam_o[1:] / lam_e[1:] * q[:, 0, 1]
    assert np.max(np.abs(f1 - f2)) <= 1e-12
    a = coins.cgmv_verblunsky(seq, -9, 9)
    assert np.allclose(np.abs(a[::2]), np.abs(q[:, 1, 0]), atol=1e-12, rtol=0)
    assert np.allclose(np.abs(a[::2]), np.abs(q[:, 0, 1]), atol=1e-12, rtol=0)
    assert np.all(a[1::2] == 0)


def test_gauge_phases_are_unimodular_and_anchored():
    seq = coins.ExplicitCoins([haar_coin(i) for i in range(10)], -5)
    lam_o, lam_e = coins.gauge(seq, -4, 3)
    assert np.allclose(np.abs(lam_o), 1) and np.allclose(np.abs(lam_e), 1)
    # index i corresponds to coin index j = -4 + i; anchor j = 0
    assert lam_o[4] == 1 and lam_e[4] == 1


def test_explicit_coins_window():
    seq = coins.ExplicitCoins([np.eye(2)] * 4, 2)
    with pytest.raises(OutOfWindow):
        seq.coins(0, 3)


def test_polymer_word_is_reproducible():
    ch = [[coins.rotation_coin(0.7), coins.rotation_coin(-0.7)], [coins.rotation_coin(0.3)]]
    a = coins.PolymerCoins(ch, seed=99).coins(-700, 700)
    b = coins.PolymerCoins(ch, seed=99).coins(-700, 700)
    assert a.tobytes() == b.tobytes()
    c = coins.PolymerCoins(ch, seed=100).coins(-700, 700)
    assert a.tobytes() != c.tobytes()


def test_polymer_slices_are_consistent():
    ch = [[coins.rotation_coin(0.2)] * 3, [coins.rotation_coin(-0.4)]]
    m = coins.PolymerCoins(ch, seed=5)
    whole = m.coins(-40, 40)
    assert np.array_equal(m.coins(-10, 12), whole[30:53])
    w = coins.random_word(5, -20, 20, 2)
    assert np.array_equal(coins.random_word(5, -3, 7, 2), w[17:28])


def test_periodic_polymer_word():
    a, b = coins.rotation_coin(0.2), coins.rotation_coin(0.5)
    m = coins.PolymerCoins([[a], [b, b]], word=[0, 1])
    expect = [a, b, b, a, b, b]
    assert np.allclose(m.coins(0, 5), expect)
    assert np.allclose(m.coins(-3, -1), [a, b, b])


def test_polymer_rejects_bad_arguments():
    ch = [[np.eye(2)]]
    with pytest.raises(ValueError):
        coins.PolymerCoins(ch)
    with pytest.raises(ValueError):
        coins.PolymerCoins(ch, word=[0], seed=1)
    with pytest.raises(ValueError):
        coins.PolymerCoins(ch, word=[1])


def test_polymer_transfer_at_critical_point():
    th = 0.6
    m = coins.PolymerCoins([[coins.rotation_coin(th), coins.rotation_coin(-th)]], word=[0])
    data = coins.polymer_transfer_traces(m, 1.0)
    assert np.allclose(data["transfer"][0], np.eye(2), atol=1e-14)
    assert abs(data["trace"][0] - 2) < 1e-14
    assert data["commutator_defect"] == 0.0


def test_identity_chain_transfer_is_diagonal():
    m = coins.PolymerCoins([[np.eye(2)] * 3], word=[0])
    z = np.exp(0.37j)
    T = coins.polymer_transfer_traces(m, z)["transfer"][0]
    # six Szego steps with alpha = 0: diag(z^6, 1)
    assert np.allclose(T, np.diag([z ** 6, 1]), atol=1e-14)


def test_commuting_diagonal_chains():
    d1 = coins.make_coin(np.exp(0.3j), 0, 0, np.exp(-0.1j))
    d2 = coins.make_coin(np.exp(1.1j), 0, 0, 1)
    m = coins.PolymerCoins([[d1], [d2, d1]], word=[0, 1])
    assert coins.polymer_transfer_traces(m, np.exp(0.9j))["commutator_defect"] == 0.0


def test_is_critical_examples():
    th = 0.7
    m = coins.PolymerCoins([[coins.rotation_coin(th), coins.rotation_coin(-th)],
                            [coins.rotation_coin(0.3), coins.rotation_coin(-0.3)]], seed=1)
    assert coins.is_critical(m, 1.0)[0]
    # find a z on the circle where a chain transfer is hyperbolic
    for t in np.linspace(0.05, np.pi, 200):
        tr = coins.polymer_transfer_traces(m, np.exp(1j * t))["trace"]
        if max(abs(x) for x in tr) > 2 + 1e-6:
            ok, rep = coins.is_critical(m, np.exp(1j * t))
            assert not ok and any(f[0] == 1 for f in rep["failed"])
            break
    else:
        pytest.fail("no hyperbolic point found")
    one = coins.PolymerCoins([[np.eye(2)] * 2], word=[0])
    # T = diag(z^4, 1) is elliptic and trivially commutes with itself
    assert coins.is_critical(one, np.exp(0.4j))[0]
    with pytest.raises(ValueError):
        coins.is_critical(m, 0.5)


def test_sup_abs_bound():
    assert coins.CoinVerblunsky(coins.FibonacciCoins(0.4, 1.1)).sup_abs == pytest.approx(
        math.sin(1.1))
    with pytest.raises(NotInDisk):
        coins.PeriodicVerblunsky([0.2, 1.0])
