"""Numerically evaluable forms of the dynamical bounds.

Lower bounds: power-law certificates for Szego transfer matrices on sets A_R
and the moment exponent they imply. Upper bounds: the GZ integrand
I(K) = int (max_{1<=n<=N(K)} ||Z(+-n, 0; e^{1/K + i theta})||^2)^{-1} dtheta/2pi,
whose super-polynomial decay in K bounds beta^+ by the exponent of N(K).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .cocycles import inv2, spectral_norm, szego_step
from .errors import EmptySet, NotInDisk, RegimeNotReached

FLOOR_LOG = math.log(1e-300)


# ---------------------------------------------------------------------------
# power-law certificates

@dataclass
class PowerLawCertificate:
    gamma: float
    C: float
    R_grid: list
    worst_ratio: float                     # max ||T|| / (C R^gamma) seen
    samples: int
    violation: dict | None = None
    set_measure: dict = field(default_factory=dict)

    @property
    def valid(self):
        return self.violation is None


def _transfer_stack(alpha, R, zs):
    """P_k = T(-R + k, -R; z) for k = 0..2R, shape (2R+1, len(zs), 2, 2)."""
    zs = np.asarray(zs, dtype=complex)
    steps = szego_step(np.repeat(alpha[:, None], len(zs), axis=1),
                       np.broadcast_to(zs, (len(alpha), len(zs))))
    out = np.empty((2 * R + 1, len(zs), 2, 2), dtype=complex)
    out[0] = np.eye(2)
    for k in range(2 * R):
        out[k + 1] = steps[k] @ out[k]
    return out


def max_transfer_norms(seq, R, zs):
    """Per z: max_{|n|, |m| <= R} ||T(n, m; z)|| and the maximizing (n, m).

    Uses T(n, m) = P_n P_m^{-1} with P_k = T(k, -R).
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    alpha = seq.window(-R, R - 1)
    P = _transfer_stack(alpha, R, zs)
    Pinv = inv2(P)
    best = np.zeros(len(zs))
    arg = np.zeros((len(zs), 2), dtype=int)
    cols = np.arange(len(zs))
    for i in range(len(P)):
        norms = spectral_norm(P[i][None] @ Pinv)          # (2R+1, nz)
        j = np.argmax(norms, axis=0)
        val = norms[j, cols]
        up = val > best
        best[up] = val[up]
        arg[up, 0] = i - R
        arg[up, 1] = j[up] - R
    return best, arg


def max_transfer_norm(seq, R, z):
    """max_{|n|, |m| <= R} ||T(n, m; z)|| at a single z."""
    best, arg = max_transfer_norms(seq, R, [z])
    return float(best[0]), (int(arg[0, 0]), int(arg[0, 1]))


def verify_power_law(seq, sets, gamma, C=None, R_grid=(4, 8, 16, 32, 64)):
    """Check max_{z in A_R} max_{|n|,|m|<=R} ||T(n,m;z)|| <= C R^gamma.

    sets(R) returns the sample points of A_R. With C=None the smallest valid C
    on the samples is reported. Returns a certificate; `violation` holds the
    first (z, n, m, R) that breaks a given C.
    """
    sup = seq.sup_abs
    if sup is not None and sup >= 1.0:
        raise NotInDisk("coefficients not bounded away from the circle")
    records = []
    count = 0
    for R in R_grid:
        pts = np.atleast_1d(sets(R))
        if len(pts) == 0:
            raise EmptySet(f"A_R is empty for R = {R}")
        vals, args = max_transfer_norms(seq, R, pts)
        for val, z, (n, m) in zip(vals, pts, args):
            records.append((val / R ** gamma, complex(z), int(n), int(m), R))
        count += len(pts)
    if C is None:
        C = max(r[0] for r in records)
    viol = None
    for r in records:
        if r[0] > C * (1 + 1e-12):
            viol = {"z": r[1], "n": r[2], "m": r[3], "R": r[4], "ratio": r[0] / C}
            break
    worst = max(r[0] for r in records) / C
    return PowerLawCertificate(float(gamma), float(C), list(R_grid), float(worst), count, viol)


def band_samples(band_list, per_band=64):
    """Points e^{i theta} on each arc: endpoints plus per_band interior points."""
    pts = []
    for b in band_list:
        th = np.linspace(b.theta1, b.theta2, per_band + 2)
        pts.append(np.exp(1j * th))
    if not pts:
        return np.zeros(0, complex)
    return np.concatenate(pts)


def fibonacci_band_sets(theta_a, theta_b, per_band=64):
    """A_R = sigma_{l(R)} with l(R) the first level whose period 2F_l reaches R.

    Returns a callable R -> sample points, with the band hierarchy cached.
    """
    from .coins import fibonacci_number
    from .tracemap import band_hierarchy

    cache = {}

    def level(R):
        k = 0
        while 2 * fibonacci_number(k) < R:
            k += 1
        return k

    def sets(R):
        k = level(R)
        if k not in cache:
            cache.update(band_hierarchy(theta_a, theta_b, k))
        return band_samples(cache[k], per_band)

    sets.level = level
    return sets


def predicted_lower_exponent(cert, p, measure="point", measure_exponent=None):
    """Exponent of K in C |B_K| K^{(p - 3 gamma)/(1 + gamma)}, and beta~^- >= it / p.

    measure: 'point' (|B_K| ~ K^{-1}), or 'bands' with |B_K| ~ K^{measure_exponent}.
    Returns (moment exponent, beta lower bound).
    """
    g = cert.gamma if isinstance(cert, PowerLawCertificate) else float(cert)
    base = (p - 3 * g) / (1 + g)
    if measure == "point":
        e = -1.0
    elif measure == "bands":
        if measure_exponent is None:
            raise ValueError("band measure needs its K exponent")
        e = float(measure_exponent)
    else:
        raise ValueError("measure must be 'point' or 'bands'")
    return base + e, (base + e) / p


def fibonacci_lower_exponent(tau, eta, p):
    """(p - 3 tau - eta) / (p (1 + tau)): the band-family certificate with
    gamma = tau and |B_K| ~ K^{-eta/(1 + tau)}."""
    return predicted_lower_exponent(tau, p, "bands", -eta / (1 + tau))[1]


def measure_neighbourhood(arcs, K):
    """|B_K|: normalized length of the 1/K-neighbourhood of a union of arcs."""
    ivs = sorted((a - 1.0 / K, b + 1.0 / K) for a, b in arcs)
    total, cur = 0.0, None
    for a, b in ivs:
        if cur is None or a > cur[1]:
            if cur is not None:
                total += cur[1] - cur[0]
            cur = [a, b]
        else:
            cur[1] = max(cur[1], b)
    if cur is not None:
        total += cur[1] - cur[0]
    return min(total, 2 * np.pi) / (2 * np.pi)


# ---------------------------------------------------------------------------
# GZ integrand

@dataclass
class IntegrandSweep:
    Ks: np.ndarray
    Ns: np.ndarray
    log_right: np.ndarray
    log_left: np.ndarray
    nodes: np.ndarray
    slope_right: float
    slope_left: float
    floor_hit: bool

    @property
    def right(self):
        return np.exp(self.log_right)

    @property
    def left(self):
        return np.exp(self.log_left)


def _chunked(kern, alpha, k0, zs, N, workers):
    """Kernel over zs, split across a thread pool (the kernels release the GIL)."""
    if workers <= 1 or len(zs) < 4096:
        return kern(alpha, k0, zs, N)
    from concurrent.futures import ThreadPoolExecutor
    parts = np.array_split(zs, workers)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        out = list(ex.map(lambda part: kern(alpha, k0, part, N), parts))
    return np.concatenate(out)


def _log_integral(seq, K, N, side, nodes, max_nodes, rtol, workers=1):
    r = math.exp(1.0 / K)
    if side == "right":
        alpha = np.ascontiguousarray(seq.window(0, N), dtype=complex)
        k0 = 0
        kern = _kernels.gz_running_lognorm
    else:
        alpha = np.ascontiguousarray(seq.window(-N, 0), dtype=complex)
        k0 = -N
        kern = _kernels.gz_left_running_lognorm

    def at(m):
        th = 2 * np.pi * np.arange(m) / m
        return -2.0 * _chunked(kern, alpha, k0, r * np.exp(1j * th), N, workers)

    m = nodes
    g = at(m)
    prev = logsumexp(g) - math.log(m)
    while m < max_nodes:
        m *= 2
        # reuse the coarse nodes: new nodes are the odd ones
        th = 2 * np.pi * (np.arange(m // 2) * 2 + 1) / m
        g_new = -2.0 * _chunked(kern, alpha, k0, r * np.exp(1j * th), N, workers)
        g = np.concatenate([g, g_new])
        cur = logsumexp(g) - math.log(m)
        if abs(cur - prev) < rtol:
            return cur, m
        prev = cur
    return prev, m


def _fit_last_decade(Ks, logs):
    x = np.log(Ks)
    sel = (x >= x[-1] - math.log(10.0) - 1e-12) & np.isfinite(logs)
    if np.sum(sel) < 2:
        return float("nan")
    return float(np.polyfit(x[sel], logs[sel], 1)[0])


def gz_integrand_sweep(seq, Ks, N_rule, sides=("right", "left"), nodes_per_K=32,
                       min_nodes=2048, max_nodes=2 ** 21, rtol=1e-3, target_slope=-8.0,
                       extend=True, K_cap=10 ** 4, workers=1):
    """I(K) on the K grid with N = N_rule(K); log-scale throughout.

    The trapezoid rule on |z| = e^{1/K} doubles its node count until the log of
    the integral changes by less than rtol. If `extend` is set and the fitted
    slope over the last decade is above target_slope, the grid grows by
    half-decades until the slope criterion, the 1e-300 floor, or K_cap is hit.
    workers > 1 splits each node batch over a thread pool.
    """
    sup = seq.sup_abs
    if sup is not None and sup >= 1.0:
        raise NotInDisk("coefficients not bounded away from the circle")
    Ks = [int(k) for k in Ks]
    rows = []

    def run(K):
        N = int(N_rule(K))
        start = max(min_nodes, int(nodes_per_K * K))
        out = {"K": K, "N": N}
        for side in ("right", "left"):
            if side in sides:
                val, m = _log_integral(seq, K, N, side, start, max_nodes, rtol, workers)
            else:
                val, m = float("nan"), 0
            out[side] = val
            out["nodes"] = max(out.get("nodes", 0), m)
        return out

    for K in Ks:
        rows.append(run(K))

    def summary():
        k = np.array([r["K"] for r in rows], float)
        lr = np.array([r["right"] for r in rows])
        ll = np.array([r["left"] for r in rows])
        return k, lr, ll

    floor = False
    while True:
        k, lr, ll = summary()
        sr, sl = _fit_last_decade(k, lr), _fit_last_decade(k, ll)
        fits = [v for v in (sr, sl) if not math.isnan(v)]
        worst = max(fits) if fits else math.nan
        cur_min = np.nanmax([lr[-1], ll[-1]])
        floor = bool(cur_min < FLOOR_LOG)
        if not extend or worst <= target_slope or floor or k[-1] * math.sqrt(10) > K_cap:
            break
        rows.append(run(int(round(k[-1] * math.sqrt(10)))))
    k, lr, ll = summary()
    return IntegrandSweep(k, np.array([r["N"] for r in rows]), lr, ll,
                          np.array([r["nodes"] for r in rows]),
                          _fit_last_decade(k, lr), _fit_last_decade(k, ll), floor)


def power_rule(C, a):
    """N(K) = ceil(C K^a)."""
    return lambda K: int(math.ceil(C * K ** a))


# ---------------------------------------------------------------------------
# Fibonacci dynamical window

def fibonacci_dynamical_window(theta_a, theta_b, ps=(1.0, 2.0, 4.0), K_max=10 ** 4,
                               lam=32.0, k_levels=8, tol=0.1, points_per_decade=12):
    """Predicted exponent window and finite-horizon estimates for delta_0.

    beta~^- estimate: least-squares slope of log<|X|^p>(K)/p over the last
    decade of K. beta^+ estimate: least-squares slope of the running maximum
    of log|X|^p(k)/p over the last decade of k. Both are finite-horizon
    estimates of asymptotic quantities.
    """
    from .coins import CoinVerblunsky, FibonacciCoins
    from .dynamics import estimate_beta, horizon_for, log_grid, simulate
    from .tracemap import coupling_report, predicted_exponents

    rep = coupling_report(theta_a, theta_b, k_levels)
    if not rep["mu"] >= lam:
        raise RegimeNotReached(f"mu = {rep['mu']:.3g} below the threshold {lam}")
    seq = CoinVerblunsky(FibonacciCoins(theta_a, theta_b))
    k_max = horizon_for(K_max)
    run = simulate(seq, {0: 1.0}, k_max, ps=tuple(ps))
    Ks = log_grid(10, K_max, 3 * points_per_decade + 1)
    out = {"coupling": rep, "K_max": K_max, "rows": []}
    for p in ps:
        pred = predicted_exponents(rep["kappa"], rep["mu"], rep["m"], rep["M"], p)
        av = run.averaged(p, Ks)
        raw = run.series(p)[:K_max + 1]
        env = np.maximum.accumulate(raw)
        b_av = estimate_beta(Ks, av, p)
        b_env = estimate_beta(Ks, env[Ks], p)
        low, up = b_av["slope"], b_env["slope"]
        out["rows"].append({
            "p": p, "predicted_lower": pred["lower"], "predicted_upper": pred["upper"],
            "beta_tilde_minus": low, "beta_plus": up,
            "secants_averaged": (b_av["beta_lower"], b_av["beta_upper"]),
            "secants_envelope": (b_env["beta_lower"], b_env["beta_upper"]),
            "inside": bool(low >= pred["lower"] - tol and up <= pred["upper"] + tol),
            "sub_ballistic": bool(up < 0.9)})
    return out
