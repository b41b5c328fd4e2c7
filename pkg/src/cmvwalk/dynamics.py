"""Wavepacket evolution, time-averaged probabilities, moments and exponents.

The evolution is psi(k) = E^k psi0 on a closed window large enough that the
wavepacket never reaches the edge blocks, so windowed results coincide with
the infinite lattice. Long runs stream per-step moments from a compiled
kernel instead of storing the probability profile.
"""

import math

import numpy as np

from . import _kernels
from .cmv import build_cmv, resolvent_column
from .errors import GridTooShort, InsufficientHorizon, WindowTooSmall


# ---------------------------------------------------------------------------
# wavepackets

class WavePacket:
    """Amplitudes psi(n) on [n_min, n_max] at time k."""

    def __init__(self, n_min, amplitudes, k=0):
        self.n_min = int(n_min)
        self.psi = np.asarray(amplitudes, dtype=complex)
        self.k = int(k)

    @property
    def n_max(self):
        return self.n_min + len(self.psi) - 1

    @property
    def sites(self):
        return np.arange(self.n_min, self.n_max + 1)

    def probabilities(self):
        return np.abs(self.psi) ** 2

    def support(self, tol=0.0):
        nz = np.nonzero(np.abs(self.psi) ** 2 > tol)[0]
        if len(nz) == 0:
            return None
        return self.n_min + int(nz[0]), self.n_min + int(nz[-1])

    def norm(self):
        return float(np.linalg.norm(self.psi))


def delta(n, amplitude=1.0):
    return {int(n): complex(amplitude)}


def _as_dict(psi0):
    if isinstance(psi0, dict):
        return {int(k): complex(v) for k, v in psi0.items()}
    if isinstance(psi0, (int, np.integer)):
        return {int(psi0): 1.0 + 0j}
    if isinstance(psi0, WavePacket):
        return {int(n): complex(a) for n, a in zip(psi0.sites, psi0.psi) if a != 0}
    raise TypeError("initial state must be a dict site -> amplitude, a site, or a WavePacket")


def cone_window(psi0, k_max, margin=4):
    """Smallest even-aligned window that keeps E^k psi0 away from the edges."""
    sites = list(_as_dict(psi0))
    s0, s1 = min(sites), max(sites)
    n_min = s0 - 2 * k_max - margin
    n_min -= n_min % 2
    n_max = s1 + 2 * k_max + margin
    if (n_max - n_min + 1) % 2:
        n_max += 1
    return n_min, n_max


def _check_window(E, psi0, k_max):
    sites = list(_as_dict(psi0))
    s0, s1 = min(sites), max(sites)
    if s0 - 2 * k_max < E.n_min + 2 or s1 + 2 * k_max > E.n_max - 2:
        raise WindowTooSmall(f"support [{s0}, {s1}] after {k_max} steps leaves "
                             f"[{E.n_min + 2}, {E.n_max - 2}]")


def _vector(E, psi0):
    psi = np.zeros(E.size, dtype=complex)
    for n, a in _as_dict(psi0).items():
        psi[E.index(n)] = a
    return psi


def _step_arrays(E):
    al = np.ascontiguousarray(E.alpha, dtype=complex)
    rh = np.sqrt(np.maximum(1.0 - np.abs(al) ** 2, 0.0))
    return al, rh


def evolve(E, psi0, k_max, exact=True):
    """Yield WavePackets psi(0), ..., psi(k_max) with psi(k) = E^k psi0.

    With exact=True the window must contain the propagation cone, otherwise
    WindowTooSmall is raised; with exact=False the closed-window dynamics is
    returned as is.
    """
    if exact:
        _check_window(E, psi0, k_max)
    psi = _vector(E, psi0)
    al, rh = _step_arrays(E)
    nz = np.nonzero(psi)[0]
    lo, hi = (int(nz[0]), int(nz[-1])) if len(nz) else (0, 0)
    yield WavePacket(E.n_min, psi.copy(), 0)
    for k in range(1, k_max + 1):
        lo, hi = _kernels.cmv_step(psi, al, rh, lo, hi)
        yield WavePacket(E.n_min, psi.copy(), k)


def evolve_inverse_steps(E, psi, steps):
    """E^{-steps} psi on the closed window (full-window support)."""
    psi = np.array(psi, dtype=complex)
    al, rh = _step_arrays(E)
    for _ in range(steps):
        _kernels.cmv_step_inverse(psi, al, rh, 0, E.size - 1)
    return psi


def step_forward(E, psi, steps=1):
    psi = np.array(psi, dtype=complex)
    al, rh = _step_arrays(E)
    for _ in range(steps):
        _kernels.cmv_step(psi, al, rh, 0, E.size - 1)
    return psi


# ---------------------------------------------------------------------------
# time averages

def horizon_for(K, eps=1e-12):
    """Smallest k* with exp(-2 k*/K) <= eps."""
    return int(math.ceil(K * math.log(1.0 / eps) / 2.0))


def average_weights(K, k_max, normalization="standard"):
    """Weights w_k with a~(n,K) = sum_k w_k a(n,k).

    'standard': 2/K e^{-2k/K}; 'exact': (1 - e^{-2/K}) e^{-2k/K}, which sums to one.
    """
    k = np.arange(k_max + 1)
    w = np.exp(-2.0 * k / K)
    if normalization == "standard":
        return (2.0 / K) * w
    if normalization == "exact":
        return -math.expm1(-2.0 / K) * w
    raise ValueError("normalization must be 'standard' or 'exact'")


def time_average(a, K, normalization="standard", eps=1e-12):
    """a~(n, K) from a[k, n] (or a[k]) for k = 0..k_max.

    Requires k_max >= k* with exp(-2k*/K) <= eps. Returns (a_tilde, bound) where
    bound limits the truncation error for data bounded by one.
    """
    a = np.asarray(a, dtype=float)
    k_star = horizon_for(K, eps)
    if a.shape[0] - 1 < k_star:
        raise InsufficientHorizon(f"need {k_star + 1} time steps for K={K}, have {a.shape[0]}")
    w = average_weights(K, k_star, normalization)
    at = np.tensordot(w, a[:k_star + 1], axes=(0, 0))
    c = 2.0 / K if normalization == "standard" else -math.expm1(-2.0 / K)
    bound = c * math.exp(-2.0 * (k_star + 1) / K) / (-math.expm1(-2.0 / K))
    return at, bound


# ---------------------------------------------------------------------------
# moments

def moments(profile, sites, p):
    """|X|^p = sum_n (|n|^p + 1) a(n) for one profile or a stack a[k, n]."""
    profile = np.asarray(profile, dtype=float)
    weight = np.abs(np.asarray(sites, dtype=float)) ** p + 1.0
    return profile @ weight


def outside_probability(profile, sites, N, side="right"):
    """P_r = sum_{n > N} a(n), P_l = sum_{n < -N} a(n), or both."""
    profile = np.asarray(profile, dtype=float)
    sites = np.asarray(sites)
    right = profile[..., sites > N].sum(axis=-1)
    left = profile[..., sites < -N].sum(axis=-1)
    if side == "right":
        return right
    if side == "left":
        return left
    if side == "both":
        return right + left
    raise ValueError("side must be left, right or both")


def check_moment_tail_bound(profile, sites, p, R):
    """Markov-type check <|X|^p> >= R^p sum_{|n| >= R} a(n); returns slack >= 0."""
    profile = np.asarray(profile, dtype=float)
    sites = np.asarray(sites)
    lhs = moments(profile, sites, p)
    rhs = R ** p * profile[..., np.abs(sites) >= R].sum(axis=-1)
    return lhs - rhs


class MomentRun:
    """Per-step moments |X|^p(k) of one simulation, plus time averages."""

    def __init__(self, ps, moments_k, norms, support, window, avg_profiles=None, avg_K=None,
                 trim=0.0):
        self.ps = list(ps)
        self.moments_k = moments_k
        self.norms = norms
        self.support = support
        self.window = window
        self.avg_profiles = avg_profiles
        self.avg_K = avg_K
        self.trim = trim

    @property
    def k_max(self):
        return len(self.norms) - 1

    def series(self, p):
        return self.moments_k[:, self.ps.index(p)]

    def averaged(self, p, Ks, normalization="standard", eps=1e-12):
        """<|X|^p>(K) = sum_k w_k(K) |X|^p(k) for each K."""
        col = self.series(p)
        out = []
        for K in np.atleast_1d(Ks):
            k_star = horizon_for(K, eps)
            if k_star > self.k_max:
                raise InsufficientHorizon(f"K={K} needs {k_star} steps, run has {self.k_max}")
            out.append(float(average_weights(K, k_star, normalization) @ col[:k_star + 1]))
        return np.array(out)


def simulate(seq, psi0, k_max, ps=(1.0, 2.0), avg_K=(), trim=1e-200, normalization="standard",
             window=None):
    """Evolve psi0 for k_max steps, streaming moments for each p in ps.

    The window defaults to the propagation cone. avg_K lists K values whose
    time-averaged profiles a~(n,K) are accumulated (cost grows with len(avg_K)).
    """
    psi_d = _as_dict(psi0)
    if window is None:
        window = cone_window(psi_d, k_max)
    n_min, n_max = window
    E = build_cmv(seq, n_min, n_max)
    _check_window(E, psi_d, k_max)
    psi = _vector(E, psi_d)
    al, rh = _step_arrays(E)
    sites = E.sites.astype(float)
    powtab = np.array([np.abs(sites) ** p + 1.0 for p in ps])
    weights = np.array([average_weights(K, k_max, normalization) for K in avg_K]).reshape(
        len(avg_K), k_max + 1)
    avg = np.zeros((len(avg_K), E.size))
    nz = np.nonzero(psi)[0]
    mom, norms, support = _kernels.run_moments(psi, al, rh, int(nz[0]), int(nz[-1]), k_max,
                                               powtab, float(trim), weights, avg)
    support = support + n_min
    return MomentRun(ps, mom, norms, support, (n_min, n_max),
                     avg_profiles=avg if len(avg_K) else None, avg_K=list(avg_K), trim=trim)


# ---------------------------------------------------------------------------
# exponents

def log_grid(lo, hi, n):
    return np.unique(np.round(np.logspace(math.log10(lo), math.log10(hi), n)).astype(int))


def estimate_beta(Ks, values, p, last_decades=1.0, min_points=8, min_decades=1.5):
    """Finite-horizon transport exponent estimates from a moment series.

    y = log(values)/p against x = log(K). Lower / upper are the min / max of
    consecutive secant slopes over the last `last_decades` of the grid; the
    least-squares slope and its rms residual use the same points.
    """
    Ks = np.asarray(Ks, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(Ks) < min_points or math.log10(Ks[-1] / Ks[0]) < min_decades - 1e-9:
        raise GridTooShort(f"need >= {min_points} points over >= {min_decades} decades")
    x = np.log(Ks)
    y = np.log(values) / p
    sel = x >= x[-1] - last_decades * math.log(10.0) - 1e-12
    xs, ys = x[sel], y[sel]
    if np.ptp(ys) == 0.0:
        return {"p": p, "beta_lower": 0.0, "beta_upper": 0.0, "slope": 0.0, "residual": 0.0}
    secants = np.diff(ys) / np.diff(xs)
    coef = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coef, xs) - ys) ** 2)))
    return {"p": p, "beta_lower": float(secants.min()), "beta_upper": float(secants.max()),
            "slope": float(coef[0]), "residual": resid}


# ---------------------------------------------------------------------------
# identities

def trapezoid_circle(func, radius, nodes):
    """(1/2pi) int_0^{2pi} func(radius e^{i t}) dt by the trapezoid rule."""
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    zs = radius * np.exp(1j * t)
    vals = np.array([func(z) for z in zs])
    return vals.mean(axis=0), zs


def _power_matrix_element(E, n, k, source):
    psi = np.zeros(E.size, dtype=complex)
    psi[E.index(source)] = 1.0
    psi = step_forward(E, psi, k)
    return psi[E.index(n)]


def parseval_sides(E, psi0, n, K, nodes=512, eps=1e-16):
    """Both sides of sum_k e^{-2k/K} a(n,k) = e^{2/K} int |<d_n,(U - e^{1/K+it})^{-1} psi>|^2 dt/2pi.

    U is the closed window operator, so the identity holds exactly and the sum
    runs until exp(-2k/K) <= eps.
    """
    psi = _vector(E, psi0)
    al, rh = _step_arrays(E)
    k_star = horizon_for(K, eps)
    idx = E.index(n)
    lhs = 0.0
    cur = psi.copy()
    for k in range(k_star + 1):
        if k:
            _kernels.cmv_step(cur, al, rh, 0, E.size - 1)
        lhs += math.exp(-2.0 * k / K) * abs(cur[idx]) ** 2
    r = math.exp(1.0 / K)
    ab = E.banded_lapack()
    from scipy.linalg import solve_banded
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    acc = 0.0
    for tt in t:
        w = r * np.exp(1j * tt)
        a2 = ab.copy()
        a2[2] -= w
        # <d_n, (U - w)^{-1} psi> = <(U* - conj w)^{-1} d_n, psi>; solve directly
        u = solve_banded((2, 2), a2, psi)
        acc += abs(u[idx]) ** 2
    rhs = math.exp(2.0 / K) * acc / nodes
    return lhs, rhs


def parseval_defect(E, psi0, n, K, nodes=512):
    lhs, rhs = parseval_sides(E, psi0, n, K, nodes)
    return abs(lhs - rhs)


def contour_defect(E, n, k, nodes=1024, source=-1):
    """|<d_n, E^k d_src> + (1/2 pi i) oint z^k <d_n, (E - z)^{-1} d_src> dz| on |z| = e^{1/k}.

    k = 0 uses radius e.
    """
    radius = math.e if k == 0 else math.exp(1.0 / k)
    direct = _power_matrix_element(E, n, k, source)
    idx = E.index(n)
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    acc = 0.0 + 0j
    for tt in t:
        z = radius * np.exp(1j * tt)
        g = resolvent_column(E, z, source)[idx]
        # dz = i z dt, so (1/2 pi i) oint f dz = mean of z f
        acc += z ** (k + 1) * g
    integral = acc / nodes
    return abs(direct + integral)


def adaptive(defect_fn, nodes=512, max_nodes=8192):
    """Double the node count until two successive defects differ by < 10%."""
    prev = defect_fn(nodes)
    while nodes < max_nodes:
        nodes *= 2
        cur = defect_fn(nodes)
        if abs(cur - prev) <= 0.1 * max(abs(prev), 1e-300):
            return cur, nodes
        prev = cur
    return prev, nodes
