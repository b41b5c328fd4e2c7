"""Fourteen acceptance criteria, each at its stated tolerance and time budget.

Every test prints one line: ``criterion NN PASS|FAIL <seconds> <detail>``.
Run standalone with ``python3 tests/test_acceptance.py`` for the same lines
without pytest.
"""

import math
import sys
import time

import numpy as np
import pytest

from cmvwalk import bounds, cmv, cocycles, coins, dynamics, floquet, tracemap
from cmvwalk.checks import PAIR_400, model_set, random_alphas


def _theta_dense(alpha, lo, hi, offset):
    """Direct sum of Theta(alpha_j) blocks on rows/cols (j-1, j) for j = offset, offset+2, ...
    inside the index window [lo, hi]; an independent build of L or M."""
    size = hi - lo + 1
    out = np.zeros((size, size), complex)
    for j in range(offset, hi + 2, 2):
        a = alpha(j)
        r = math.sqrt(max(1.0 - abs(a) ** 2, 0.0))
        blk = np.array([[np.conj(a), r], [r, -a]])
        for bi, n in enumerate((j - 1, j)):
            for bj, m in enumerate((j - 1, j)):
                if lo <= n <= hi and lo <= m <= hi:
                    out[n - lo, m - lo] = blk[bi, bj]
    return out


def criterion_01():
    rng = np.random.default_rng(101)
    lm = diag = oracle = 0.0
    for _ in range(20):
        seq = coins.ExplicitVerblunsky(random_alphas(rng, 140), -70)
        E = cmv.build_cmv(seq, -64, 63)
        L, M = cmv.build_LM(seq, -64, 63)
        D = E.dense()
        lm = max(lm, float(np.max(np.abs(L.dense() @ M.dense() - D))))
        al = E.alpha  # alpha_{n_min-1} .. alpha_{n_max+2}, closure included

        def a_at(n, al=al):
            return al[n + 64 + 1]
        Lo = _theta_dense(a_at, -64, 63, -64)
        Mo = _theta_dense(a_at, -64, 63, -63)
        oracle = max(oracle, float(np.max(np.abs(Lo @ Mo - D))))
        d = np.array([-np.conj(a_at(n + 1)) * a_at(n) for n in range(-64, 64)])
        diag = max(diag, float(np.max(np.abs(np.diag(D) - d))))
    ok = lm <= 1e-12 and oracle <= 1e-12 and diag == 0.0
    return ok, 1.0, f"LM-E {lm:.1e}, independent blocks {oracle:.1e}, diagonal {diag:.0e}"


def criterion_02():
    rng = np.random.default_rng(102)
    a, b = random_alphas(rng, 1000), random_alphas(rng, 1000)
    zs = np.exp(rng.uniform(-0.5, 0.5, 1000) + 1j * rng.uniform(0, 2 * np.pi, 1000))
    # numpy oracle of z^{-1} S(a) S(b) against D^{-1} P(a) Q(b) D
    conj = 0.0
    for al, be, z in zip(a, b, zs):
        ra, rb = math.sqrt(1 - abs(al) ** 2), math.sqrt(1 - abs(be) ** 2)
        Sa = np.array([[z, -np.conj(al)], [-al * z, 1]]) / ra
        Sb = np.array([[z, -np.conj(be)], [-be * z, 1]]) / rb
        P = np.array([[-np.conj(al), z], [1 / z, -al]]) / ra
        Q = np.array([[-be, 1], [1, -np.conj(be)]]) / rb
        D = np.diag([z, 1])
        conj = max(conj, float(np.linalg.norm(Sa @ Sb / z - np.linalg.inv(D) @ P @ Q @ D, 2)))
    lib = float(np.max(cocycles.szego_gz_conjugacy_defect(a, b, zs)))
    det = float(max(np.max(np.abs(cocycles.det2(cocycles.gz_step(a, zs, "odd")) + 1)),
                    np.max(np.abs(cocycles.det2(cocycles.gz_step(a, zs, "even")) + 1))))
    # Wronskian at spectral points, where the 200-step cocycle stays bounded
    ms = model_set()
    pts = {"identity": np.exp(1j * rng.uniform(0, 2 * np.pi, 6))}
    per = ms["periodic8"]
    lam = floquet.floquet_spectrum(per.window(0, 15), rng.uniform(0, 2 * np.pi, 3)).ravel()
    pts["periodic8"] = lam / np.abs(lam)
    lv = tracemap.band_hierarchy(0.4, 1.1, 10)[10]
    pts["fibonacci"] = np.array([np.exp(0.5j * (b.theta1 + b.theta2)) for b in lv[::9]])
    wr = 0.0
    for name, zz in pts.items():
        for z in zz:
            sb = cocycles.solution_basis(ms[name], z, 199)
            wr = max(wr, float(np.max(np.abs(sb["wronskian"] - 2 * (-1.0) ** sb["n"] * z))))
    ok = conj <= 1e-12 and lib <= 1e-12 and wr <= 1e-10 and det <= 1e-12
    return ok, 5.0, f"conjugacy {max(conj, lib):.1e}, Wronskian {wr:.1e}, det+1 {det:.1e}"


def criterion_03():
    worst = 0.0
    for seq in model_set().values():
        for K in (5, 10, 20):
            E = cmv.build_cmv(seq, -20 * K, 20 * K - 1)
            for n in (-3, 0, 1, 6):
                worst = max(worst, dynamics.parseval_defect(E, {0: 1.0}, n, K, 512))
    return worst <= 1e-6, 120.0, f"max Parseval defect {worst:.2e}"


def criterion_04():
    worst = 0.0
    for seq in model_set().values():
        E = cmv.build_cmv(seq, -60, 59)
        for k in range(0, 21):
            for n in (-3, -1, 0, 2, 5):
                worst = max(worst, dynamics.contour_defect(E, n, k, 1024))
    return worst <= 1e-6, 60.0, f"max contour defect {worst:.2e}"


def criterion_05():
    seq = coins.zero_verblunsky()
    k_max = 10 ** 4
    E = cmv.build_cmv(seq, *dynamics.cone_window({0: 1.0}, k_max))
    off = 0.0
    for pkt in dynamics.evolve(E, {0: 1.0}, k_max):
        pr = pkt.probabilities()
        i = E.index(2 * pkt.k)
        off = max(off, abs(pr[i] - 1.0), float(pr.sum() - pr[i]))
    run = dynamics.simulate(seq, {0: 1.0}, k_max, ps=(1.0, 2.0))
    ks = dynamics.log_grid(100, k_max, 41)
    slopes = [dynamics.estimate_beta(ks, run.series(p)[ks], p, last_decades=2.0)["slope"]
              for p in (1.0, 2.0)]
    ok = off <= 1e-14 and all(abs(s - 1.0) <= 0.01 for s in slopes)
    return ok, 10.0, f"slopes {slopes[0]:.4f}/{slopes[1]:.4f}, mass off 2k {off:.0e}"


FLOQUET_MODELS = {"(0,-3/4)": [0.0, -0.75],
                  "random4": list(random_alphas(np.random.default_rng(4), 4, 0.8))}


def criterion_06():
    parts, ok = [], True
    for name, a in FLOQUET_MODELS.items():
        run = dynamics.simulate(coins.PeriodicVerblunsky(a), {0: 1.0}, 2000, ps=(1.0, 2.0))
        ks = dynamics.log_grid(200, 2000, 25)
        betas = [dynamics.estimate_beta(ks, run.series(p)[ks], p, min_decades=1.0)["slope"]
                 for p in (1.0, 2.0)]
        rep = floquet.ballistic_check(a, {0: 1.0}, [2000])
        s_rel = rep["rows"][-1]["s_L_rel"]
        ok &= all(abs(b - 1) <= 0.05 for b in betas) and s_rel < 0.05
        parts.append(f"{name} beta {betas[0]:.3f}/{betas[1]:.3f} s_L/|J| {s_rel:.1e}")
    s = math.asin(0.75)
    gap = floquet.arcs_distance(floquet.band_arcs(FLOQUET_MODELS["(0,-3/4)"]),
                                [(s, math.pi - s), (math.pi + s, 2 * math.pi - s)])
    ok &= gap <= 1e-6
    return ok, 300.0, "; ".join(parts) + f"; band arcs vs |Im z|>=3/4 {gap:.1e}"


def criterion_07():
    rng = np.random.default_rng(107)
    ratios = []
    for p in (2, 4):
        a = random_alphas(rng, p, 0.8)
        ratios += [floquet.richardson_ratio(a, th) for th in rng.uniform(0, 2 * np.pi, 16)]
    lo, hi = min(ratios), max(ratios)
    return 3.5 <= lo and hi <= 4.5, 10.0, f"Richardson ratios in [{lo:.4f}, {hi:.4f}]"


def criterion_08():
    rng = np.random.default_rng(108)
    ta, tb = 0.6, 1.1
    seq = coins.CoinVerblunsky(coins.FibonacciCoins(ta, tb))
    orbit = 0.0
    for th in rng.uniform(0, 2 * np.pi, 20):
        x = tracemap.fib_traces(ta, tb, np.array([th]), 12, clip=np.inf)[:, 0]
        z = np.exp(1j * th)
        for k in range(0, 13):
            ref = 0.5 * np.trace(cocycles.transfer(seq, 2 * coins.fibonacci_number(k), 0, z))
            orbit = max(orbit, float(abs(x[k + 1] - ref) / max(1.0, abs(ref))))
    cons = closed = 0.0
    for _ in range(200):
        a, b = rng.uniform(-1.5, 1.5, 2)
        th = rng.uniform(0, 2 * np.pi)
        z = np.exp(1j * th)
        I0 = float(tracemap.invariant_closed_form(a, b, z))
        # oracle: initial traces from the cocycle, not from the trace formulas
        s2 = coins.CoinVerblunsky(coins.FibonacciCoins(a, b))
        xm1 = z.real / math.cos(b)
        x0 = 0.5 * np.trace(cocycles.transfer(s2, 2, 0, z)).real
        x1 = 0.5 * np.trace(cocycles.transfer(s2, 4, 0, z)).real
        closed = max(closed, abs(tracemap.fricke_vogt(x1, x0, xm1) - I0) / max(1.0, I0))
        orb = tracemap.fib_orbit(a, b, th, 40)
        # relative to the largest cancelling term, while |x| <= 1e12
        x = orb.values
        for i in range(1, len(x) - 1):
            u, v, w = x[i + 1], x[i], x[i - 1]
            if np.isfinite(orb.invariant[i]) and max(abs(u), abs(v), abs(w)) <= 1e12:
                scale = max(1.0, u * u, v * v, w * w, abs(2 * u * v * w))
                cons = max(cons, abs(orb.invariant[i] - I0) / scale)
    ends = max(abs(float(tracemap.invariant_closed_form(0.3, 0.9, w))) for w in (1.0, -1.0))
    ok = orbit <= 1e-8 and cons <= 1e-8 and closed <= 1e-10 and ends == 0.0
    return ok, 30.0, (f"orbit vs cocycle {orbit:.1e}, conservation {cons:.1e}, "
                      f"closed form {closed:.1e}, I(+-1) {ends:.0e}")


def criterion_09():
    tb = 1.0
    ta = tracemap.largecoup_sweep(tb, 32.0)
    levels = tracemap.band_hierarchy(ta, tb, 10)
    mu = tracemap.coupling_report(ta, tb, 8, levels=levels)["mu"]
    counts = untyped = nest = 0
    typed = {}
    for k in range(1, 11):
        typed[k], _ = tracemap.classify_bands(levels, k)
    for k in range(1, 9):
        counts += len(levels[k]) != 2 * coins.fibonacci_number(k)
        untyped += sum(b.type not in ("A", "B") for b in typed[k])
        nest += len(tracemap.check_nesting(levels, typed, k))
    ok = mu >= 32 and counts == 0 and untyped == 0 and nest == 0
    return ok, 120.0, (f"theta_a {ta:.6f}, mu {mu:.2f}, count mismatches {counts}, "
                       f"untyped {untyped}, nesting violations {nest}")


def criterion_10():
    rng = np.random.default_rng(110)
    ta, tb = 1.2, 0.8
    delta = 0.1
    fired = bad = tried = 0
    while fired < 100 and tried < 10000:
        tried += 1
        orb = tracemap.fib_orbit(ta, tb, rng.uniform(0, 2 * np.pi), 40, escape_delta=delta)
        if orb.escape_index is None:
            continue
        fired += 1
        # growth |x_{k0+j}| >= (1 + delta/2)^{F_{j-1}} from the log magnitudes
        i0 = orb.escape_index + 1
        for j in range(0, len(orb.log_abs) - i0):
            need = coins.fibonacci_number(j - 1) * math.log1p(delta / 2)
            bad += orb.log_abs[i0 + j] < need - 1e-9 * max(1.0, need)
    return fired == 100 and bad == 0, 10.0, f"{fired} escaping z, growth violations {bad}"


def criterion_11():
    ta, tb = 0.7, 1.2
    found = tracemap.tm_closed_gap_search(ta, tb, 8)   # zeros of t_k for k <= 6
    mono = tr = 0.0
    for r in found:
        rep = tracemap.verify_closed_gap_mp(ta, tb, r["theta"], r["k"], r["k"] + 4)
        mono, tr = max(mono, rep["monodromy"]), max(tr, rep["trace"])
    ks = sorted({r["k"] for r in found})
    ok = len(found) > 0 and mono <= 1e-8 and tr <= 1e-8
    return ok, 30.0, f"{len(found)} roots (k in {ks}), |M_j-I| {mono:.1e}, |t_j-2| {tr:.1e}"


POLYMER_CHAINS = [[coins.rotation_coin(0.7), coins.rotation_coin(-0.7)],
                  [coins.rotation_coin(0.3), coins.rotation_coin(-0.3)]]


def criterion_12():
    model = coins.PolymerCoins(POLYMER_CHAINS, seed=20240601)
    crit, _ = coins.is_critical(model, 1.0)
    K = 10 ** 4
    run = dynamics.simulate(coins.CoinVerblunsky(model), {0: 1.0}, dynamics.horizon_for(K),
                            ps=(10.0,))
    Ks = dynamics.log_grid(10, K, 37)
    beta = dynamics.estimate_beta(Ks, run.averaged(10.0, Ks), 10.0)["slope"]
    ok = crit and beta >= 1 - 1 / 10 - 0.1
    return ok, 600.0, f"critical at z=1: {crit}, beta~-(10) = {beta:.4f} (needs >= 0.8)"


def criterion_13():
    out = bounds.fibonacci_dynamical_window(*PAIR_400, K_max=10 ** 4, lam=400.0)
    ok = True
    parts = []
    for r in out["rows"]:
        lo, hi = r["predicted_lower"] - 0.1, r["predicted_upper"] + 0.1
        inside = lo <= r["beta_tilde_minus"] <= hi and lo <= r["beta_plus"] <= hi
        ok &= inside and r["beta_plus"] < 0.9
        parts.append(f"p={r['p']:g}: {r['beta_tilde_minus']:.3f}/{r['beta_plus']:.3f} "
                     f"in [{lo:.3f}, {hi:.3f}]")
    return ok, 1200.0, "qualitative; " + "; ".join(parts)


def criterion_14():
    seq = coins.CoinVerblunsky(coins.FibonacciCoins(*PAIR_400))
    Ks = np.unique(np.round(np.logspace(1, 3, 9)).astype(int))
    sw = bounds.gz_integrand_sweep(seq, Ks, bounds.power_rule(2.0, 0.5))
    worst = max(sw.slope_right, sw.slope_left)
    return worst <= -8.0, 600.0, (f"final-decade slopes right {sw.slope_right:.2f}, "
                                  f"left {sw.slope_left:.2f}, K up to {int(sw.Ks[-1])}")


CRITERIA = [criterion_01, criterion_02, criterion_03, criterion_04, criterion_05, criterion_06,
            criterion_07, criterion_08, criterion_09, criterion_10, criterion_11, criterion_12,
            criterion_13, criterion_14]


def evaluate(fn):
    t0 = time.perf_counter()
    ok, budget, detail = fn()
    dt = time.perf_counter() - t0
    ok = bool(ok) and dt <= budget
    line = (f"criterion {fn.__name__[-2:]} {'PASS' if ok else 'FAIL'} "
            f"{dt:7.1f}s/{budget:.0f}s  {detail}")
    return ok, line


@pytest.mark.parametrize("fn", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_criterion(fn, capsys):
    ok, line = evaluate(fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for fn in CRITERIA:
        ok, line = evaluate(fn)
        print(line, flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
