"""Invariant suite behind `cmvwalk verify`.

Each check returns (ok, detail). Checks tagged 'full' only run at level full;
quick keeps every time horizon at or below 10^3 steps.
"""

import math
import time

import numpy as np

from . import bounds, cmv, cocycles, coins, dynamics, floquet, tracemap
from .errors import CMVError

REGISTRY = []

QUICK_HORIZON = 10 ** 3

# large-coupling pairs: theta_a from the sweep at theta_b for mu >= 32 and mu >= 400
PAIR_32 = (1.5274266483780887, 1.0)
PAIR_400 = (1.564298839323687, 1.3)


def check(module, level="quick"):
    def deco(fn):
        REGISTRY.append({"name": fn.__name__, "module": module, "level": level, "fn": fn})
        return fn
    return deco


def _rng(seed):
    return np.random.default_rng(seed)


def random_coin(rng):
    """Haar-like U(2) coin with diagonal bounded away from zero."""
    while True:
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        if min(abs(q[0, 0]), abs(q[1, 1])) > 0.05:
            return q


def random_alphas(rng, n, radius=0.9):
    return radius * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def model_set():
    """Identity coins, an 8-periodic model and a Fibonacci model."""
    rng = _rng(8)
    per = coins.PeriodicCoins([coins.rotation_coin(t) for t in rng.uniform(-1.2, 1.2, 8)])
    return {
        "identity": coins.zero_verblunsky(),
        "periodic8": coins.CoinVerblunsky(per),
        "fibonacci": coins.CoinVerblunsky(coins.FibonacciCoins(0.4, 1.1)),
    }


# ---------------------------------------------------------------------------
# coin-model

@check("coin-model")
def cgmv_formulas_agree(seed):
    rng = _rng(seed)
    seq = coins.ExplicitCoins([random_coin(rng) for _ in range(80)], -40)
    worst = 0.0
    j_min, j_max = -39, 38
    q = seq.coins(j_min, j_max)
    lam_o, lam_e = coins.gauge(seq, j_min, j_max)
    f1 = lam_o[:-1] / lam_e[:-1] * np.conj(q[:, 1, 0])
    f2 = -lam_o[1:] / lam_e[1:] * q[:, 0, 1]
    worst = float(np.max(np.abs(f1 - f2)))
    a = coins.cgmv_verblunsky(seq, 2 * j_min + 1, 2 * j_max + 1)
    mod = float(np.max(np.abs(np.abs(a[::2]) - np.abs(q[:, 1, 0]))))
    even = float(np.max(np.abs(a[1::2])))
    return worst <= 1e-12 and mod <= 1e-12 and even == 0.0, {
        "formula_gap": worst, "modulus_gap": mod, "even_max": even}


@check("coin-model")
def fibonacci_prefix(seed):
    n = 10000
    word = coins.substitution_word("fibonacci", 20)[:n + 1]
    two = "".join(np.where(coins.fibonacci_letters(0, n), "a", "b"))
    exact = "".join(coins.fibonacci_two_sided(m) for m in range(n + 1))
    refl = all(coins.fibonacci_two_sided(-m) == coins.fibonacci_two_sided(m - 3)
               for m in range(3, 200))
    return word == two == exact and refl, {"n": n, "reflection": refl}


@check("coin-model")
def thue_morse_doubling(seed):
    swap = str.maketrans("ab", "ba")
    prev = coins.substitution_word("thue_morse", 0)
    for k in range(20):
        cur = coins.substitution_word("thue_morse", k + 1)
        if cur != prev + prev.translate(swap):
            return False, {"k": k}
        prev = cur
    return True, {"k_max": 20}


@check("coin-model")
def polymer_seed_repeatable(seed):
    chains = [[coins.rotation_coin(0.7), coins.rotation_coin(-0.7)], [coins.rotation_coin(0.3)]]
    a = coins.PolymerCoins(chains, seed=seed).coins(-500, 500)
    b = coins.PolymerCoins(chains, seed=seed).coins(-500, 500)
    return a.tobytes() == b.tobytes(), {"sites": 1001}


# ---------------------------------------------------------------------------
# cmv-operator

@check("cmv-operator")
def lm_factorization(seed):
    rng = _rng(seed)
    worst = diag = 0.0
    for _ in range(20):
        a = random_alphas(rng, 140)
        seq = coins.ExplicitVerblunsky(a, -70)
        E = cmv.build_cmv(seq, -64, 63)
        L, M = cmv.build_LM(seq, -64, 63)
        worst = max(worst, float(np.max(np.abs(L.dense() @ M.dense() - E.dense()))))
        # interior rows; the edge rows carry the window closure
        al = seq.window(-64, 64)
        d = np.array([-complex(al[i + 1]).conjugate() * complex(al[i]) for i in range(128)])
        diag = max(diag, float(np.max(np.abs(E.bands[2][2:-2] - d[2:-2]))))
    return worst <= 1e-12 and diag == 0.0, {"max_entry_gap": worst, "diag_gap": diag}


@check("cmv-operator")
def banded_and_unitary(seed):
    rng = _rng(seed)
    seq = coins.ExplicitVerblunsky(random_alphas(rng, 140), -70)
    D = cmv.build_cmv(seq, -64, 63).dense()
    i, j = np.indices(D.shape)
    off = float(np.max(np.abs(D[np.abs(i - j) > 2])))
    uni = float(np.max(np.abs(D.conj().T @ D - np.eye(len(D)))))
    return off == 0.0 and uni <= 1e-10, {"off_band": off, "unitarity": uni}


@check("cmv-operator")
def finite_propagation(seed):
    rng = _rng(seed)
    seq = coins.ExplicitVerblunsky(random_alphas(rng, 400), -200)
    E = cmv.build_cmv(seq, -180, 179)
    worst = 0.0
    for pkt in dynamics.evolve(E, {0: 1.0}, 60):
        k = pkt.k
        out = np.abs(pkt.sites) > 2 * k + 2
        if np.any(out):
            worst = max(worst, float(np.max(np.abs(pkt.psi[out]))))
    return worst <= 1e-14, {"outside_max": worst}


@check("cmv-operator")
def resolvent_bound(seed):
    rng = _rng(seed)
    seq = coins.ExplicitVerblunsky(random_alphas(rng, 260), -130)
    E = cmv.build_cmv(seq, -128, 127)
    worst = 0.0
    for K in (5, 10, 50):
        r = math.exp(1.0 / K)
        for th in rng.uniform(0, 2 * np.pi, 8):
            u = cmv.resolvent_column(E, r * np.exp(1j * th), 0)
            worst = max(worst, float(np.linalg.norm(u) * (r - 1.0)))
    return worst <= 1.0 + 1e-10, {"max_norm_times_gap": worst}


# ---------------------------------------------------------------------------
# cocycles

@check("cocycles")
def cocycle_property(seed):
    rng = _rng(seed)
    seq = coins.ExplicitVerblunsky(random_alphas(rng, 400), -200)
    worst = 0.0
    for _ in range(100):
        n, k, m = rng.integers(-60, 60, size=3)
        z = np.exp(rng.uniform(-0.1, 0.1) + 1j * rng.uniform(0, 2 * np.pi))
        for fam in ("szego", "gz"):
            a = cocycles.transfer(seq, n, k, z, fam)
            b = cocycles.transfer(seq, k, m, z, fam)
            c = cocycles.transfer(seq, n, m, z, fam)
            scale = cocycles.spectral_norm(a) * cocycles.spectral_norm(b)
            worst = max(worst, float(np.max(np.abs(a @ b - c)) / scale))
    return worst <= 1e-10, {"relative_gap": worst}


@check("cocycles")
def inverse_norm_symmetry(seed):
    rng = _rng(seed)
    seq = coins.ExplicitVerblunsky(random_alphas(rng, 200), -100)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 80))
        z = np.exp(1j * rng.uniform(0, 2 * np.pi))
        # the inverse comes from the backward product, not from the adjugate
        Z = cocycles.transfer(seq, n, 0, z)
        Zinv = cocycles.transfer(seq, 0, n, z)
        a, b = cocycles.spectral_norm(Z), cocycles.spectral_norm(Zinv)
        worst = max(worst, float(abs(a - b) / a))
    return worst <= 1e-10, {"relative_gap": worst}


@check("cocycles")
def solutions_propagate(seed):
    """Phi(n) = Z(n+1, 0) Phi(-1): first component solves E u = z u, second E^T v = z v."""
    rng = _rng(seed)
    seq = coins.ExplicitVerblunsky(random_alphas(rng, 300), -150)
    D = cmv.build_cmv(seq, -100, 99, closure=None).dense()
    worst = 0.0
    for _ in range(4):
        z = math.exp(rng.uniform(-0.1, 0.1)) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        init = rng.normal(size=2) + 1j * rng.normal(size=2)
        phi = cocycles.running_products(seq, 0, 100, z) @ init
        back = np.array([cocycles.transfer(seq, n + 1, 0, z) @ init for n in range(-100, -1)])
        phi = np.concatenate([back, phi])          # n = -100 .. 99
        u, v = phi[:, 0], phi[:, 1]
        ru = np.abs(D @ u - z * u)[3:-3] / np.max(np.abs(u))
        rv = np.abs(D.T @ v - z * v)[3:-3] / np.max(np.abs(v))
        worst = max(worst, float(ru.max()), float(rv.max()))
    return worst <= 1e-9, {"relative_residual": worst, "steps": 200}


@check("cocycles")
def conjugacy_and_traces(seed):
    rng = _rng(seed)
    a, b = random_alphas(rng, 1000), random_alphas(rng, 1000)
    zs = np.exp(rng.uniform(-0.5, 0.5, 1000) + 1j * rng.uniform(0, 2 * np.pi, 1000))
    conj = float(np.max(cocycles.szego_gz_conjugacy_defect(a, b, zs)))
    seq = coins.ExplicitVerblunsky(random_alphas(rng, 100), 0)
    tr = 0.0
    for m in (1, 5, 20, 40):
        z = np.exp(1j * rng.uniform(0, 2 * np.pi))
        t_gz = np.trace(cocycles.transfer(seq, 2 * m, 0, z))
        t_sz = np.trace(cocycles.transfer(seq, 2 * m, 0, z, "szego"))
        tr = max(tr, float(abs(t_gz - z ** (-m) * t_sz) / max(1.0, abs(t_gz))))
    dets = cocycles.det2(cocycles.gz_step(a[:50], zs[:50], "odd"))
    detq = cocycles.det2(cocycles.gz_step(a[:50], zs[:50], "even"))
    d = float(max(np.max(np.abs(dets + 1)), np.max(np.abs(detq + 1))))
    return conj <= 1e-12 and tr <= 1e-10 and d <= 1e-12, {
        "conjugacy": conj, "trace_relation": tr, "det_gap": d}


# ---------------------------------------------------------------------------
# dynamics

def _profile_stack(seq, k_max, site=0):
    n_min, n_max = dynamics.cone_window({site: 1.0}, k_max)
    E = cmv.build_cmv(seq, n_min, n_max)
    return E, np.array([p.probabilities() for p in dynamics.evolve(E, {site: 1.0}, k_max)])


@check("dynamics")
def norm_and_cone(seed):
    worst_n = worst_c = 0.0
    for name, seq in model_set().items():
        E, a = _profile_stack(seq, 300)
        worst_n = max(worst_n, float(np.max(np.abs(a.sum(axis=1) - 1))))
        ks = np.arange(a.shape[0])[:, None]
        out = np.abs(E.sites)[None, :] > 2 * ks + 2
        worst_c = max(worst_c, float(np.max(np.where(out, a, 0.0))))
    return worst_n <= 1e-10 and worst_c <= 1e-14, {"norm": worst_n, "cone": worst_c}


@check("dynamics")
def moments_monotone_in_p(seed):
    """Jensen monotonicity of (sum |n|^p a(n))^{1/p}; the +1 in the moment
    weight breaks monotonicity of the finite values, so it is removed."""
    ps = (0.5, 1.0, 2.0, 4.0, 8.0)
    worst = 0.0
    for seq in model_set().values():
        E, a = _profile_stack(seq, 200)
        a = a[1:]
        vals = np.array([np.log(dynamics.moments(a, E.sites, p) - 1.0) / p for p in ps])
        worst = max(worst, float(np.max(vals[:-1] - vals[1:])))
    return worst <= 1e-9, {"max_decrease": worst}


@check("dynamics")
def ballistic_bound(seed):
    worst = 0.0
    k_max = QUICK_HORIZON
    for seq in model_set().values():
        run = dynamics.simulate(seq, {0: 1.0}, k_max, ps=(2.0,))
        x = run.series(2.0)
        ks = np.arange(1, k_max + 1)
        C = float(np.max(x[1:11] / ks[:10] ** 2))
        worst = max(worst, float(np.max(x[1:] / (C * ks ** 2))))
    return worst <= 1.05, {"max_ratio": worst}


@check("dynamics")
def parseval_identity(seed, Ks=(5,)):
    worst = 0.0
    for seq in model_set().values():
        for K in Ks:
            half = 20 * K
            E = cmv.build_cmv(seq, -half, half - 1)
            for n in (-2, 0, 3):
                worst = max(worst, dynamics.parseval_defect(E, {0: 1.0}, n, K, 512))
    return worst <= 1e-6, {"defect": worst, "K": list(Ks)}


@check("dynamics", level="full")
def parseval_identity_full(seed):
    return parseval_identity(seed, Ks=(5, 10, 20))


@check("dynamics")
def contour_identity(seed):
    worst = 0.0
    for seq in model_set().values():
        E = cmv.build_cmv(seq, -60, 59)
        for k in (0, 1, 5, 20):
            for n in (-1, 0, 4):
                worst = max(worst, dynamics.contour_defect(E, n, k, 1024))
    return worst <= 1e-6, {"defect": worst}


# ---------------------------------------------------------------------------
# tracemap

@check("tracemap")
def orbit_matches_cocycle(seed):
    rng = _rng(seed)
    ta, tb = 0.6, 1.1
    seq = coins.CoinVerblunsky(coins.FibonacciCoins(ta, tb))
    worst = 0.0
    for th in rng.uniform(0, 2 * np.pi, 50):
        x = tracemap.fib_traces(ta, tb, np.array([th]), 12, clip=np.inf)[:, 0]
        for k in range(0, 13):
            z = np.exp(1j * th)
            ref = 0.5 * np.trace(cocycles.transfer(seq, 2 * coins.fibonacci_number(k), 0, z))
            worst = max(worst, float(abs(x[k + 1] - ref) / max(1.0, abs(ref))))
    return worst <= 1e-8, {"relative_gap": worst}


@check("tracemap")
def invariant_and_escape(seed):
    rng = _rng(seed)
    inv = esc = 0.0
    fired = 0
    for _ in range(200):
        ta, tb = rng.uniform(-1.5, 1.5, 2)
        th = rng.uniform(0, 2 * np.pi)
        orb = tracemap.fib_orbit(ta, tb, th, 40)
        I0 = tracemap.invariant_closed_form(ta, tb, np.exp(1j * th))
        inv = max(inv, tracemap.invariant_drift(orb, I0))
        if orb.escape_index is not None:
            fired += 1
            if not orb.growth_ok:
                esc += 1
    return inv <= 1e-8 and esc == 0, {"invariant_gap": inv, "escapes": fired,
                                       "growth_failures": esc}


def _typed_levels(pair, k_max):
    levels = tracemap.band_hierarchy(*pair, k_max)
    typed = {}
    for k in range(1, k_max + 1):
        typed[k], _ = tracemap.classify_bands(levels, k)
    return levels, typed


@check("tracemap")
def band_nesting(seed, k_max=8):
    levels, typed = _typed_levels(PAIR_32, k_max + 2)
    bad = counts = 0
    untyped = 0
    for k in range(1, k_max + 1):
        counts += int(len(levels[k]) != 2 * coins.fibonacci_number(k))
        untyped += sum(b.type not in ("A", "B") for b in typed[k])
        bad += len(tracemap.check_nesting(levels, typed, k))
    return bad == 0 and counts == 0 and untyped == 0, {
        "levels": k_max, "count_mismatches": counts, "untyped": untyped, "nesting_violations": bad}


@check("tracemap", level="full")
def band_nesting_full(seed):
    return band_nesting(seed, k_max=10)


@check("tracemap")
def band_width_bound(seed):
    levels = tracemap.band_hierarchy(*PAIR_32, 8)
    worst_lo, worst_hi = math.inf, 0.0
    for k in range(1, 9):
        for b in levels[k]:
            th = np.linspace(b.theta1, b.theta2, 65)
            _, d = tracemap.fib_trace_derivatives(*PAIR_32, th, k)
            dk = np.abs(d[k + 1])
            worst_lo = min(worst_lo, b.width * dk.max())
            worst_hi = max(worst_hi, b.width * dk.min())
    return worst_lo >= 2 - 1e-9 and worst_hi <= 2 + 1e-9, {
        "min_width_x_max_deriv": worst_lo, "max_width_x_min_deriv": worst_hi}


@check("tracemap")
def thue_morse_closed_gaps(seed):
    ta, tb = 0.7, 1.2
    found = tracemap.tm_closed_gap_search(ta, tb, 8)
    worst = {"monodromy": 0.0, "trace": 0.0, "derivative": 0.0}
    for r in found:
        rep = tracemap.verify_closed_gap_mp(ta, tb, r["theta"], r["k"], r["k"] + 4)
        for key in worst:
            worst[key] = max(worst[key], rep[key])
    ok = worst["monodromy"] <= 1e-8 and worst["trace"] <= 1e-8 and worst["derivative"] <= 1e-6
    return ok, dict(worst, roots=len(found))


# ---------------------------------------------------------------------------
# floquet

FLOQUET_MODELS = {"half": [0.0, -0.75],
                  "random4": list(random_alphas(_rng(4), 4, 0.8))}


@check("floquet")
def fiber_unitarity(seed):
    worst_u = worst_e = 0.0
    th = 2 * np.pi * np.arange(256) / 256
    for a in FLOQUET_MODELS.values():
        for t in th:
            c = floquet.floquet_cell(a, t)
            m = c.matrix
            worst_u = max(worst_u, float(np.max(np.abs(m.conj().T @ m - np.eye(len(m))))))
            worst_e = max(worst_e, float(np.max(np.abs(np.abs(c.eigenvalues) - 1))))
    return worst_u <= 1e-12 and worst_e <= 1e-12, {"unitarity": worst_u, "modulus": worst_e}


@check("floquet")
def band_union_matches_closure(seed):
    worst = 0.0
    for a in FLOQUET_MODELS.values():
        L = 32
        dense = np.linalg.eigvals(floquet.periodic_closure(a, L))
        fib = floquet.floquet_spectrum(a, 2 * np.pi * np.arange(L) / L).ravel()
        d = np.abs(dense[:, None] - fib[None, :])
        worst = max(worst, float(max(d.min(axis=1).max(), d.min(axis=0).max())))
    arcs = floquet.band_arcs(FLOQUET_MODELS["half"])
    # |Im z| >= 3/4: arcs [asin(3/4), pi - asin(3/4)] and its mirror
    s = math.asin(0.75)
    target = [(s, math.pi - s), (math.pi + s, 2 * math.pi - s)]
    arc_gap = floquet.arcs_distance(arcs, target)
    return worst <= 1e-6 and arc_gap <= 1e-6, {"hausdorff": worst, "arc_gap": arc_gap}


@check("floquet")
def commutator_richardson(seed):
    rng = _rng(seed)
    ratios = []
    for p in (2, 4):
        a = random_alphas(rng, p, 0.8)
        for th in rng.uniform(0, 2 * np.pi, 16):
            ratios.append(floquet.richardson_ratio(a, th))
    lo, hi = float(min(ratios)), float(max(ratios))
    return 3.5 <= lo and hi <= 4.5, {"min": lo, "max": hi}


@check("floquet")
def velocity_cross_check(seed):
    worst = 0.0
    for a in FLOQUET_MODELS.values():
        rep = floquet.velocities_and_J(a, 256)
        worst = max(worst, rep.cross_check)
    return worst <= 1e-6, {"fd_vs_fh": worst}


def _ballistic(L_values):
    out = {}
    ok = True
    for name, a in FLOQUET_MODELS.items():
        rep = floquet.ballistic_check(a, {0: 1.0}, L_values)
        rel = [r["s_L_rel"] for r in rep["rows"]]
        ripples = all(b <= 1.1 * x for x, b in zip(rel, rel[1:]))
        ok &= ripples and rel[-1] < 0.05
        out[name] = {"s_L_rel": rel, "monotone": ripples}
    return ok, out


@check("floquet")
def ballistic_convergence(seed):
    return _ballistic([125, 250, 500, 1000])


@check("floquet", level="full")
def ballistic_convergence_full(seed):
    return _ballistic([250, 500, 1000, 2000])


# ---------------------------------------------------------------------------
# bounds

@check("bounds")
def integrand_monotone_in_N(seed):
    seq = coins.CoinVerblunsky(coins.FibonacciCoins(*PAIR_32))
    worst = -math.inf
    for K in (10, 40):
        vals = [bounds._log_integral(seq, K, N, "right", 2048, 2 ** 16, 1e-3)[0]
                for N in (5, 10, 20, 40, 80)]
        worst = max(worst, float(np.max(np.diff(vals))))
    return worst <= 1e-3 and vals[0] <= 1e-12, {"max_increase": worst}


@check("bounds")
def certificate_resampling(seed):
    seq = coins.zero_verblunsky()
    base = bounds.verify_power_law(seq, lambda R: np.exp(2j * np.pi * np.arange(16) / 16), 0.0)
    fine = bounds.verify_power_law(seq, lambda R: np.exp(2j * np.pi * np.arange(64) / 64), 0.0)
    ch = [[coins.rotation_coin(0.7), coins.rotation_coin(-0.7)],
          [coins.rotation_coin(0.3), coins.rotation_coin(-0.3)]]
    poly = coins.CoinVerblunsky(coins.PolymerCoins(ch, seed=seed))
    pc = bounds.verify_power_law(poly, lambda R: np.array([1.0 + 0j]), 0.0)
    ratio = fine.C / base.C
    return base.valid and pc.valid and ratio <= 2.0, {"C_ratio": ratio, "polymer_C": pc.C}


@check("bounds", level="full")
def polymer_delocalization(seed):
    ch = [[coins.rotation_coin(0.7), coins.rotation_coin(-0.7)],
          [coins.rotation_coin(0.3), coins.rotation_coin(-0.3)]]
    model = coins.PolymerCoins(ch, seed=seed)
    crit, _ = coins.is_critical(model, 1.0)
    seq = coins.CoinVerblunsky(model)
    K = 10 ** 4
    run = dynamics.simulate(seq, {0: 1.0}, dynamics.horizon_for(K), ps=(10.0,))
    Ks = dynamics.log_grid(10, K, 37)
    b = dynamics.estimate_beta(Ks, run.averaged(10.0, Ks), 10.0)
    return crit and b["slope"] >= 1 - 1 / 10 - 0.1, {"beta_tilde_minus": b["slope"]}


@check("bounds", level="full")
def anomalous_window(seed):
    out = bounds.fibonacci_dynamical_window(*PAIR_400, lam=400.0)
    ok = all(r["inside"] and r["sub_ballistic"] for r in out["rows"])
    return ok, {"rows": out["rows"]}


@check("bounds", level="full")
def integrand_superpolynomial(seed):
    seq = coins.CoinVerblunsky(coins.FibonacciCoins(*PAIR_400))
    Ks = np.unique(np.round(np.logspace(1, 3, 9)).astype(int))
    sw = bounds.gz_integrand_sweep(seq, Ks, bounds.power_rule(2.0, 0.5))
    worst = max(sw.slope_right, sw.slope_left)
    return worst <= -8.0, {"slope_right": sw.slope_right, "slope_left": sw.slope_left}


# ---------------------------------------------------------------------------

def run_suite(level="quick", seed=0, only=None):
    """Run registered checks; failures and exceptions become report entries."""
    if level not in ("quick", "full"):
        raise ValueError("level must be quick or full")
    entries = []
    for c in REGISTRY:
        if c["level"] == "full" and level != "full":
            continue
        if only and c["module"] not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = c["fn"](seed)
        except CMVError as exc:
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        entries.append({"name": c["name"], "module": c["module"], "level": c["level"],
                        "ok": bool(ok), "detail": detail,
                        "seconds": round(time.perf_counter() - t0, 3)})
    passed = sum(e["ok"] for e in entries)
    return {"level": level, "seed": seed, "passed": passed,
            "failed": len(entries) - passed, "checks": entries}
