"""Coin sequences for quantum walks on the line and their Verblunsky coefficients.

A coin is a 2x2 unitary matrix. A coin sequence assigns a coin to every
integer n. The CGMV construction turns a coin sequence into Verblunsky
coefficients alpha_n with alpha_{2n} = 0, after a diagonal gauge change by
unimodular numbers lambda_n anchored at lambda_0 = lambda_{-1} = 1.
"""

import math

import numpy as np

from .errors import DegenerateCoin, NotInDisk, OutOfWindow

PHI = (1.0 + math.sqrt(5.0)) / 2.0
COIN_TOL = 1e-12


# ---------------------------------------------------------------------------
# single coins

def make_coin(q11, q12, q21, q22, tol=COIN_TOL):
    q = np.array([[q11, q12], [q21, q22]], dtype=complex)
    check_coin(q, tol)
    return q


def check_coin(q, tol=COIN_TOL):
    """Raise DegenerateCoin unless q is unitary with nonzero diagonal."""
    q = np.asarray(q, dtype=complex)
    if q.shape != (2, 2):
        raise DegenerateCoin(f"coin must be 2x2, got shape {q.shape}")
    if np.max(np.abs(q.conj().T @ q - np.eye(2))) > tol:
        raise DegenerateCoin("coin is not unitary")
    if abs(q[0, 0]) <= tol or abs(q[1, 1]) <= tol:
        raise DegenerateCoin("coin has a vanishing diagonal entry")
    return q


def rotation_coin(theta):
    """The rotation R_theta = (cos, -sin; sin, cos) for theta in (-pi/2, pi/2)."""
    theta = float(theta)
    if not -math.pi / 2 < theta < math.pi / 2 or math.cos(theta) <= COIN_TOL:
        raise DegenerateCoin(f"rotation angle {theta} outside (-pi/2, pi/2)")
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


# ---------------------------------------------------------------------------
# substitution words

def substitution_word(kind, level):
    """Return S^level(a) for the Fibonacci (a->ab, b->a) or Thue-Morse
    (a->ab, b->ba) substitution."""
    rules = {"fibonacci": {"a": "ab", "b": "a"},
             "thue_morse": {"a": "ab", "b": "ba"}}
    kind = _kind(kind)
    if kind not in rules:
        raise ValueError(f"unknown substitution {kind!r}")
    if level < 0:
        raise ValueError("level must be >= 0")
    word = "a"
    rule = rules[kind]
    for _ in range(level):
        word = "".join(rule[c] for c in word)
    return word


def _kind(kind):
    return str(kind).lower().replace("-", "_").replace(" ", "_")


def _floor_sqrt5_times(m):
    """Exact floor(m * sqrt(5)) for integer m."""
    m = int(m)
    if m == 0:
        return 0
    r = math.isqrt(5 * m * m)
    return r if m > 0 else -r - 1


def _floor_div_phi(m):
    """Exact floor(m / phi) using m / phi = (m sqrt5 - m) / 2."""
    return (_floor_sqrt5_times(m) - int(m)) // 2


def fibonacci_two_sided(n):
    """Letter of the two-sided Fibonacci word at position n.

    The letter is 'a' iff the fractional part of (n+1)/phi lies in
    [1 - 1/phi, 1), which is the same as floor((n+2)/phi) - floor((n+1)/phi) = 1.
    Arithmetic is exact integer arithmetic, so any n works.
    """
    n = int(n)
    return "a" if _floor_div_phi(n + 2) - _floor_div_phi(n + 1) == 1 else "b"


def fibonacci_letters(n_min, n_max):
    """Boolean array, True where the two-sided Fibonacci word has an 'a'."""
    ns = np.arange(n_min, n_max + 1, dtype=np.int64)
    if max(abs(n_min), abs(n_max)) < 10**8:
        fl = _floor_div_phi_array(ns + 2) - _floor_div_phi_array(ns + 1)
        return fl == 1
    return np.array([fibonacci_two_sided(int(n)) == "a" for n in ns])


def _floor_div_phi_array(m):
    m = np.asarray(m, dtype=np.int64)
    sq = 5 * m * m
    r = np.floor(np.sqrt(sq.astype(float))).astype(np.int64)
    r -= (r * r > sq)
    r += ((r + 1) * (r + 1) <= sq)
    fl = np.where(m > 0, r, np.where(m < 0, -r - 1, 0))
    return (fl - m) // 2


def thue_morse_letters(n_min, n_max):
    """Boolean array, True where the two-sided word u^R | u has an 'a'.

    u(n) = 'a' iff n has an even number of binary ones; position -n of the
    two-sided word carries u(n - 1).
    """
    ns = np.arange(n_min, n_max + 1, dtype=np.int64)
    idx = np.where(ns >= 0, ns, -ns - 1).astype(np.uint64)
    return _popcount_parity(idx) == 0


def _popcount_parity(x):
    x = x.copy()
    par = np.zeros(x.shape, dtype=np.uint64)
    while np.any(x):
        par ^= x & np.uint64(1)
        x >>= np.uint64(1)
    return par


def fibonacci_number(k):
    """F_k with F_{-1} = F_0 = 1, F_1 = 2 (so F_k = |s_k| for k >= 0)."""
    if k < -1:
        raise ValueError("F_k defined for k >= -1")
    a, b = 1, 1
    for _ in range(k + 1):
        a, b = b, a + b
    return a


# ---------------------------------------------------------------------------
# coin sequences

class CoinSequence:
    """Lazily indexed map n -> coin. Subclasses implement `coins`."""

    kind = "abstract"

    def coins(self, n_min, n_max):
        """Array of shape (n_max - n_min + 1, 2, 2)."""
        raise NotImplementedError

    def coin(self, n):
        return self.coins(n, n)[0]

    def __call__(self, n):
        return self.coin(n)


class PeriodicCoins(CoinSequence):
    kind = "periodic"

    def __init__(self, coins):
        self.period_coins = np.array([check_coin(q) for q in coins])
        if len(self.period_coins) == 0:
            raise ValueError("need at least one coin")
        self.period_coins.setflags(write=False)

    @property
    def period(self):
        return len(self.period_coins)

    def coins(self, n_min, n_max):
        idx = np.arange(n_min, n_max + 1) % self.period
        return self.period_coins[idx]


class TwoLetterCoins(CoinSequence):
    """Rotation coins R_{theta_a}, R_{theta_b} placed according to a word."""

    def __init__(self, theta_a, theta_b):
        self.theta_a = float(theta_a)
        self.theta_b = float(theta_b)
        self.coin_a = rotation_coin(theta_a)
        self.coin_b = rotation_coin(theta_b)

    def letters(self, n_min, n_max):
        raise NotImplementedError

    def word(self, n_min, n_max):
        return "".join("a" if x else "b" for x in self.letters(n_min, n_max))

    def angles(self, n_min, n_max):
        return np.where(self.letters(n_min, n_max), self.theta_a, self.theta_b)

    def coins(self, n_min, n_max):
        is_a = self.letters(n_min, n_max)
        return np.where(is_a[:, None, None], self.coin_a, self.coin_b)


class FibonacciCoins(TwoLetterCoins):
    kind = "fibonacci"

    def letters(self, n_min, n_max):
        return fibonacci_letters(n_min, n_max)


class ThueMorseCoins(TwoLetterCoins):
    kind = "thue_morse"

    def letters(self, n_min, n_max):
        return thue_morse_letters(n_min, n_max)


class ExplicitCoins(CoinSequence):
    kind = "explicit"

    def __init__(self, coins, n_min=0):
        self.table = np.array([check_coin(q) for q in coins])
        self.table.setflags(write=False)
        self.n_min = int(n_min)
        self.n_max = self.n_min + len(self.table) - 1

    def coins(self, n_min, n_max):
        if n_min < self.n_min or n_max > self.n_max:
            raise OutOfWindow(f"coins requested on [{n_min}, {n_max}], "
                              f"defined on [{self.n_min}, {self.n_max}]")
        return self.table[n_min - self.n_min:n_max - self.n_min + 1]


def random_word(seed, j_min, j_max, n_letters):
    """Letters in {0, ..., n_letters-1} for word positions j_min..j_max.

    Counter based: position j always maps to the same Philox output for a
    given seed, so any slice is reproducible without building the word.
    """
    js = np.arange(j_min, j_max + 1, dtype=np.int64)
    idx = np.where(js >= 0, 2 * js, -2 * js - 1)
    lo, hi = int(idx.min()) // 4, int(idx.max()) // 4
    bitgen = np.random.Philox(key=int(seed) % 2**64)
    bitgen.advance(lo)
    raw = bitgen.random_raw(4 * (hi - lo + 1))
    return (raw[idx - 4 * lo] % np.uint64(n_letters)).astype(np.int64)


class PolymerCoins(CoinSequence):
    """Concatenation ... u_{w(-1)} u_{w(0)} u_{w(1)} ... of coin chains.

    Position 0 is the first coin of u_{w(0)}. The word w is given as a
    periodic list, or generated from a 64-bit seed.
    """

    kind = "polymer"

    def __init__(self, chains, word=None, seed=None):
        self.chains = [np.array([check_coin(q) for q in ch]) for ch in chains]
        if not self.chains or any(len(ch) == 0 for ch in self.chains):
            raise ValueError("every chain must be nonempty")
        if (word is None) == (seed is None):
            raise ValueError("give exactly one of word, seed")
        self.periodic_word = None if word is None else [int(w) for w in word]
        if self.periodic_word is not None:
            if not self.periodic_word:
                raise ValueError("empty word")
            if min(self.periodic_word) < 0 or max(self.periodic_word) >= len(self.chains):
                raise ValueError("word letter out of range")
        self.seed = None if seed is None else int(seed) % 2**64

    def word(self, j_min, j_max):
        if self.periodic_word is not None:
            w = np.array(self.periodic_word)
            return w[np.arange(j_min, j_max + 1) % len(w)]
        return random_word(self.seed, j_min, j_max, len(self.chains))

    def coins(self, n_min, n_max):
        lengths = np.array([len(ch) for ch in self.chains])
        shortest = int(lengths.min())
        out = []
        # forward part, positions >= 0
        if n_max >= 0:
            need = n_max + 1
            n_words = need // shortest + 1
            w = self.word(0, n_words - 1)
            seq = np.concatenate([self.chains[i] for i in w])
            out_fwd = seq[max(n_min, 0):n_max + 1]
        else:
            out_fwd = np.zeros((0, 2, 2), complex)
        if n_min < 0:
            need = -n_min
            n_words = need // shortest + 1
            w = self.word(-n_words, -1)
            seq = np.concatenate([self.chains[i] for i in w])
            # seq[-1] sits at position -1
            start = len(seq) + n_min
            stop = len(seq) + min(n_max, -1) + 1
            out.append(seq[start:stop])
        out.append(out_fwd)
        return np.concatenate(out)


# ---------------------------------------------------------------------------
# Verblunsky coefficients

def gauge(coins, j_min, j_max, anchor=0):
    """Gauge phases lambda_{2j-1}, lambda_{2j} for coin indices j_min..j_max+1.

    Returns (lam_odd, lam_even) with lam_odd[i] = lambda_{2(j_min+i)-1} and
    lam_even[i] = lambda_{2(j_min+i)}, i = 0..(j_max - j_min + 1). The anchor
    sets lambda_{2 anchor} = lambda_{2 anchor - 1} = 1.
    """
    lo = min(j_min, anchor)
    hi = max(j_max + 1, anchor)
    q = coins.coins(lo, hi)
    q11, q22 = q[:, 0, 0], q[:, 1, 1]
    w1 = q11 / np.abs(q11)
    w2 = q22 / np.abs(q22)
    # lambda_{2j+2} = w1_j lambda_{2j};  lambda_{2j+1} = conj(w2_j) lambda_{2j-1}
    a = anchor - lo
    m = hi - lo + 1
    lam_e = np.ones(m, complex)
    lam_o = np.ones(m, complex)
    for i in range(a, m - 1):
        lam_e[i + 1] = w1[i] * lam_e[i]
        lam_o[i + 1] = np.conj(w2[i]) * lam_o[i]
    for i in range(a - 1, -1, -1):
        lam_e[i] = lam_e[i + 1] / w1[i]
        lam_o[i] = lam_o[i + 1] / np.conj(w2[i])
    s = slice(j_min - lo, j_max + 2 - lo)
    return lam_o[s], lam_e[s]


def cgmv_verblunsky(coins, n_min, n_max, anchor=0, check=True):
    """Verblunsky coefficients alpha_{n_min..n_max} of the walk with these coins.

    alpha_{2j} = 0 and alpha_{2j+1} = (lambda_{2j-1}/lambda_{2j}) conj(q_j^{21}).
    With check=True the second formula -(lambda_{2j+1}/lambda_{2j+2}) q_j^{12}
    is evaluated as well and must agree to 1e-12.
    """
    j_min = (n_min - 1) // 2
    j_max = (n_max - 1) // 2
    q = coins.coins(j_min, j_max)
    for qq in (q[:, 0, 0], q[:, 1, 1]):
        if np.any(np.abs(qq) <= COIN_TOL):
            raise DegenerateCoin("coin with vanishing diagonal entry in window")
    lam_o, lam_e = gauge(coins, j_min, j_max, anchor)
    odd = lam_o[:-1] / lam_e[:-1] * np.conj(q[:, 1, 0])
    if check:
        alt = -lam_o[1:] / lam_e[1:] * q[:, 0, 1]
        if np.max(np.abs(odd - alt), initial=0.0) > 1e-12:
            raise DegenerateCoin("CGMV formulas disagree; coins not unitary")
    alpha = np.zeros(n_max - n_min + 1, complex)
    ns = np.arange(n_min, n_max + 1)
    is_odd = ns % 2 == 1
    alpha[is_odd] = odd[(ns[is_odd] - 1) // 2 - j_min]
    return alpha


class VerblunskySequence:
    """Lazily indexed map n -> alpha_n in the open unit disk."""

    def values(self, n_min, n_max):
        raise NotImplementedError

    def __call__(self, n):
        return self.values(n, n)[0]

    def window(self, n_min, n_max):
        """Values on [n_min, n_max] after checking |alpha| < 1."""
        a = np.asarray(self.values(n_min, n_max), dtype=complex)
        if np.any(np.abs(a) >= 1.0):
            bad = n_min + int(np.argmax(np.abs(a) >= 1.0))
            raise NotInDisk(f"|alpha_{bad}| >= 1")
        return a

    def rho(self, n_min, n_max):
        return np.sqrt(1.0 - np.abs(self.window(n_min, n_max)) ** 2)

    @property
    def sup_abs(self):
        return None


class PeriodicVerblunsky(VerblunskySequence):
    def __init__(self, alphas):
        self.alphas = np.array(alphas, dtype=complex)
        if self.alphas.ndim != 1 or len(self.alphas) == 0:
            raise ValueError("need a nonempty 1-d list of coefficients")
        if np.any(np.abs(self.alphas) >= 1.0):
            raise NotInDisk("periodic coefficients must lie in the open disk")
        self.alphas.setflags(write=False)

    @property
    def period(self):
        return len(self.alphas)

    @property
    def sup_abs(self):
        return float(np.max(np.abs(self.alphas)))

    def values(self, n_min, n_max):
        return self.alphas[np.arange(n_min, n_max + 1) % self.period]


class FunctionVerblunsky(VerblunskySequence):
    """alpha_n = f(n) for a vectorized f(ns)."""

    def __init__(self, func, sup_abs=None):
        self.func = func
        self._sup = sup_abs

    @property
    def sup_abs(self):
        return self._sup

    def values(self, n_min, n_max):
        return np.asarray(self.func(np.arange(n_min, n_max + 1)), dtype=complex)


class ExplicitVerblunsky(VerblunskySequence):
    def __init__(self, alphas, n_min=0):
        self.table = np.array(alphas, dtype=complex)
        self.table.setflags(write=False)
        self.n_min = int(n_min)
        self.n_max = self.n_min + len(self.table) - 1

    @property
    def sup_abs(self):
        return float(np.max(np.abs(self.table)))

    def values(self, n_min, n_max):
        if n_min < self.n_min or n_max > self.n_max:
            raise OutOfWindow(f"alpha requested on [{n_min}, {n_max}], "
                              f"defined on [{self.n_min}, {self.n_max}]")
        return self.table[n_min - self.n_min:n_max - self.n_min + 1]


class CoinVerblunsky(VerblunskySequence):
    """Verblunsky coefficients of a coin sequence via the CGMV construction."""

    def __init__(self, coins, anchor=0):
        self.coins = coins
        self.anchor = int(anchor)

    @property
    def sup_abs(self):
        if isinstance(self.coins, PeriodicCoins):
            return float(np.max(np.abs(self.coins.period_coins[:, 1, 0])))
        if isinstance(self.coins, TwoLetterCoins):
            return max(abs(math.sin(self.coins.theta_a)), abs(math.sin(self.coins.theta_b)))
        if isinstance(self.coins, PolymerCoins):
            return float(max(np.max(np.abs(ch[:, 1, 0])) for ch in self.coins.chains))
        return None

    def values(self, n_min, n_max):
        return cgmv_verblunsky(self.coins, n_min, n_max, self.anchor)


def verblunsky_from_coins(coins, anchor=0):
    return CoinVerblunsky(coins, anchor)


def zero_verblunsky():
    return PeriodicVerblunsky([0.0])


# ---------------------------------------------------------------------------
# polymer criticality

def chain_verblunsky(chain):
    """alpha_0..alpha_{2L-1} of a single chain placed at the origin.

    The gauge needs one coin past each end; the chain is repeated for that.
    """
    seq = PeriodicCoins(chain)
    return cgmv_verblunsky(seq, 0, 2 * len(chain) - 1)


def polymer_transfer_traces(model, z):
    """Szego transfer matrix across each chain, its trace, and the largest
    pairwise commutator norm."""
    from .cocycles import szego_product, spectral_norm
    if z == 0:
        from .errors import ZeroSpectralParameter
        raise ZeroSpectralParameter("z must be nonzero")
    mats = [szego_product(chain_verblunsky(ch), z) for ch in model.chains]
    traces = [complex(np.trace(t)) for t in mats]
    defect = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            c = mats[i] @ mats[j] - mats[j] @ mats[i]
            defect = max(defect, float(spectral_norm(c)))
    return {"transfer": mats, "trace": traces, "commutator_defect": defect}


def is_critical(model, z, tol=1e-10):
    """Check the three criticality conditions at z on the unit circle.

    Returns (flag, report) where report lists failed conditions by number.
    """
    if abs(abs(z) - 1.0) > 1e-12:
        raise ValueError("z must lie on the unit circle")
    data = polymer_transfer_traces(model, z)
    failed = []
    for j, (t, m) in enumerate(zip(data["trace"], data["transfer"])):
        if abs(t) > 2 + tol:
            failed.append((1, j, f"|tr T_{j}| = {abs(t):.6g} > 2"))
        elif abs(abs(t) - 2) <= tol:
            sign = 1.0 if t.real > 0 else -1.0
            if np.max(np.abs(m - sign * np.eye(2))) > tol:
                failed.append((3, j, f"tr T_{j} = {t:.6g} but T_{j} != {sign:+.0f}I"))
    if data["commutator_defect"] > tol:
        failed.append((2, None, f"commutator defect {data['commutator_defect']:.3g}"))
    report = {"traces": data["trace"], "commutator_defect": data["commutator_defect"],
              "failed": failed}
    return not failed, report
