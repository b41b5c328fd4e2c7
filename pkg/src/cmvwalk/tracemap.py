"""Trace maps for the Fibonacci and Thue-Morse walks with rotation coins.

Fibonacci: half-traces x_k = tr M_k / 2 of the monodromies M_k = Z(2F_k, 0; z)
obey x_{k+2} = 2 x_{k+1} x_k - x_{k-1}, conserve the Fricke-Vogt invariant,
and define the periodic spectra sigma_k = {|x_k| <= 1} on the circle.
Thue-Morse: full traces t_n = tr Z(2^{n+1}, 0; z).
Spectral parameters on the circle are written z = e^{i theta}.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coins import PHI, FibonacciCoins, ThueMorseCoins, fibonacci_number, rotation_coin
from .errors import ComplexBranch, NoRootFound, SuspectedMissedBand, UntypeableBand

BIG = 1e100
LOG_SWITCH = 1e50


def _sec(t):
    return 1.0 / math.cos(t)


def _check_angles(theta_a, theta_b):
    rotation_coin(theta_a)
    rotation_coin(theta_b)


# ---------------------------------------------------------------------------
# Fibonacci half-traces

def fib_initial_traces(theta_a, theta_b, z):
    """(x_{-1}, x_0, x_1) at z (broadcasts over arrays)."""
    _check_angles(theta_a, theta_b)
    z = np.asarray(z, dtype=complex)
    sa, sb = _sec(theta_a), _sec(theta_b)
    xm1 = z.real * sb
    x0 = z.real * sa
    x1 = (z * z).real * sa * sb + math.tan(theta_a) * math.tan(theta_b)
    return xm1, x0, x1


def fricke_vogt(u, v, w):
    """I(u, v, w) = u^2 + v^2 + w^2 - 2uvw - 1."""
    return u * u + v * v + w * w - 2.0 * u * v * w - 1.0


def kappa(theta_a, theta_b):
    """|sec(a) tan(b) - tan(a) sec(b)|."""
    return abs(_sec(theta_a) * math.tan(theta_b) - math.tan(theta_a) * _sec(theta_b))


def invariant_closed_form(theta_a, theta_b, z):
    """I(z) = kappa^2 Im(z)^2 on the unit circle."""
    z = np.asarray(z, dtype=complex)
    return kappa(theta_a, theta_b) ** 2 * z.imag ** 2


@dataclass
class TraceOrbit:
    model: str
    theta: float
    ks: np.ndarray
    values: np.ndarray          # real values while representable, else nan
    log_abs: np.ndarray         # log |x_k|, always available
    signs: np.ndarray
    invariant: np.ndarray = field(default_factory=lambda: np.zeros(0))
    escape_index: int | None = None
    escape_delta: float | None = None
    growth_ok: bool | None = None

    def value(self, k):
        return self.values[k - self.ks[0]]


def _logadd_real(sa, la, sb, lb):
    """sign and log|.| of sa e^la + sb e^lb."""
    if la < lb:
        sa, la, sb, lb = sb, lb, sa, la
    if lb == -np.inf:
        return sa, la
    r = sb * sa * math.exp(lb - la)
    tot = 1.0 + r
    if tot == 0.0:
        return 0.0, -np.inf
    return sa * math.copysign(1.0, tot), la + math.log(abs(tot))


def fib_orbit(theta_a, theta_b, theta, k_max, escape_delta=0.0, imag_tol=1e-10):
    """Iterate the Fibonacci trace map at z = e^{i theta} for k = -1..k_max.

    Values switch to (sign, log|x|) once |x| > 1e50 and the invariant is then
    no longer tracked. Detects the first escape index k0 with
    |x_k0| > 1+d, |x_k0+1| > 1+d, |x_k0+1| > |x_k0-1| and checks the growth
    |x_{k0+j}| >= (1 + d/2)^{F_{j-1}}.
    """
    z = complex(np.exp(1j * theta))
    xs = [complex(v) for v in fib_initial_traces(theta_a, theta_b, z)]
    for v in xs:
        if abs(v.imag) > imag_tol * max(1.0, abs(v)):
            raise ValueError("trace has an imaginary part")
    n = k_max + 2
    vals = np.full(n, np.nan)
    logs = np.empty(n)
    sgn = np.empty(n)
    for i in range(min(3, n)):
        vals[i] = xs[i].real
        logs[i] = math.log(abs(xs[i].real)) if xs[i].real != 0 else -np.inf
        sgn[i] = math.copysign(1.0, xs[i].real)
    for i in range(3, n):
        if max(abs(vals[i - 1]), abs(vals[i - 2]), abs(vals[i - 3])) < LOG_SWITCH and \
                np.isfinite(vals[i - 1]):
            v = 2.0 * vals[i - 1] * vals[i - 2] - vals[i - 3]
            vals[i] = v
            logs[i] = math.log(abs(v)) if v != 0 else -np.inf
            sgn[i] = math.copysign(1.0, v)
        else:
            s1 = sgn[i - 1] * sgn[i - 2]
            l1 = math.log(2.0) + logs[i - 1] + logs[i - 2]
            s, l = _logadd_real(s1, l1, -sgn[i - 3], logs[i - 3])
            sgn[i], logs[i] = s, l
            vals[i] = s * math.exp(l) if l < math.log(LOG_SWITCH) else np.nan
    ks = np.arange(-1, k_max + 1)
    finite = np.isfinite(vals)
    inv = np.full(n, np.nan)
    for i in range(1, n - 1):
        if finite[i - 1] and finite[i] and finite[i + 1] and abs(vals[i + 1]) < 1e12:
            inv[i] = fricke_vogt(vals[i + 1], vals[i], vals[i - 1])
    orbit = TraceOrbit("fibonacci", float(theta), ks, vals, logs, sgn, inv)
    # escape detection; k0 >= 0 means index i = k0 + 1
    thr = math.log1p(escape_delta)
    for k0 in range(0, k_max):
        i = k0 + 1
        if logs[i] > thr and logs[i + 1] > thr and logs[i + 1] > logs[i - 1]:
            orbit.escape_index = k0
            orbit.escape_delta = escape_delta
            ok = True
            for j in range(0, k_max - k0 + 1):
                need = fibonacci_number(j - 1) * math.log1p(escape_delta / 2.0) if j >= 0 else 0.0
                if logs[i + j] < need - 1e-9 * max(1.0, need):
                    ok = False
            orbit.growth_ok = ok
            break
    return orbit


def invariant_drift(orbit, I0):
    """Max |I(x_{k+1}, x_k, x_{k-1}) - I0| along an orbit, relative to the
    largest term u^2, v^2, w^2, 2|uvw| that cancels in the invariant."""
    x = orbit.values
    u, v, w = x[2:], x[1:-1], x[:-2]
    scale = np.fmax.reduce([np.ones_like(v), u * u, v * v, w * w, np.abs(2 * u * v * w)])
    drift = np.abs(orbit.invariant[1:-1] - I0) / scale
    return float(np.max(drift[np.isfinite(drift)], initial=0.0))


def fib_traces(theta_a, theta_b, thetas, k, clip=BIG):
    """x_{-1}, ..., x_k at each theta (array of shape (k + 2, len(thetas))).

    Values are clipped at +-clip; only used where orbits stay moderate.
    """
    z = np.exp(1j * np.asarray(thetas, dtype=float))
    xm1, x0, x1 = fib_initial_traces(theta_a, theta_b, z)
    out = np.empty((k + 2,) + z.shape)
    out[0] = xm1
    if k >= 0:
        out[1] = x0
    if k >= 1:
        out[2] = x1
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(3, k + 2):
            out[i] = np.clip(2.0 * out[i - 1] * out[i - 2] - out[i - 3], -clip, clip)
    return out


def fib_trace(theta_a, theta_b, thetas, k):
    return fib_traces(theta_a, theta_b, thetas, k)[-1]


def fib_trace_derivatives(theta_a, theta_b, thetas, k):
    """(x, x') for levels -1..k, derivatives with respect to theta."""
    th = np.asarray(thetas, dtype=float)
    sa, sb = _sec(theta_a), _sec(theta_b)
    x = fib_traces(theta_a, theta_b, th, max(k, 1))
    d = np.empty_like(x)
    d[0] = -np.sin(th) * sb
    d[1] = -np.sin(th) * sa
    d[2] = -2.0 * np.sin(2 * th) * sa * sb
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(3, k + 2):
            d[i] = 2.0 * d[i - 1] * x[i - 2] + 2.0 * x[i - 1] * d[i - 2] - d[i - 3]
    return x[:k + 2], d[:k + 2]


# ---------------------------------------------------------------------------
# bands

@dataclass
class SpectralBand:
    level: int
    theta1: float
    theta2: float
    type: str = "untyped"

    @property
    def width(self):
        return self.theta2 - self.theta1

    def contains(self, other, tol=1e-12):
        return self.theta1 - tol <= other.theta1 and other.theta2 <= self.theta2 + tol


def _bisect(f, a, b, fa, tol):
    """Vectorized bisection for sign changes of f on [a, b] (fa = f(a))."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    fa = np.array(fa, dtype=float)
    while np.any(b - a > tol):
        m = 0.5 * (a + b)
        if np.all((m == a) | (m == b)):
            break  # float resolution reached
        fm = f(m)
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, m)
    return 0.5 * (a + b)


def _level_func(theta_a, theta_b, k):
    def f(th):
        return fib_trace(theta_a, theta_b, th, k)
    return f


def _sample_points(k, grid_density, parents):
    n_uniform = max(int(grid_density) * 2 * fibonacci_number(max(k, 0)), 1024)
    pts = [np.linspace(0.0, 2 * np.pi, n_uniform, endpoint=False)]
    for band in parents:
        w = max(band.width, 1e-15)
        pts.append(np.linspace(band.theta1 - 0.5 * w, band.theta2 + 0.5 * w, 257))
    pts = np.concatenate(pts) % (2 * np.pi)
    return np.unique(pts)


def bands(theta_a, theta_b, k, grid_density=16, parents=(), tol=1e-13, check_missed=True):
    """Bands of sigma_k = {theta : |x_k(theta)| <= 1}.

    Zeros of x_k are bracketed on a uniform grid (grid_density * 2F_k points)
    refined inside the `parents` bands, then each band is grown from its zero
    to the two points where |x_k| = 1 by bisection. Without `parents` the
    lower levels are computed first, since a uniform grid alone misses the
    narrow bands of high levels.
    """
    if not parents and k >= 1:
        return band_hierarchy(theta_a, theta_b, k, grid_density)[k]
    f = _level_func(theta_a, theta_b, k)
    th = _sample_points(k, grid_density, parents)
    th = np.append(th, th[0] + 2 * np.pi)
    vals = f(th)
    sc = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    zeros = _bisect(f, th[sc], th[sc + 1], vals[sc], tol)
    found = []
    for z0, i in zip(zeros, sc):
        # left edge: last sample at or before i with |x| > 1
        j = i
        while j >= 0 and abs(vals[j]) <= 1.0:
            j -= 1
        r = i + 1
        while r < len(th) and abs(vals[r]) <= 1.0:
            r += 1
        if j < 0 or r >= len(th):
            raise SuspectedMissedBand("band touches the end of the sampled range")
        g = lambda t: np.abs(f(t)) - 1.0  # noqa: E731
        if j + 1 <= i:
            left = _bisect(g, [th[j]], [th[j + 1]], [abs(vals[j]) - 1.0], tol)[0]
        else:
            left = _bisect(g, [th[j]], [z0], [abs(vals[j]) - 1.0], tol)[0]
        if r - 1 > i:
            right = _bisect(g, [th[r - 1]], [th[r]], [abs(vals[r - 1]) - 1.0], tol)[0]
        else:
            right = _bisect(g, [z0], [th[r]], [-1.0], tol)[0]
        found.append(SpectralBand(k, float(left % (2 * np.pi)), float(right % (2 * np.pi))))
    # merge bands that share an interval (closed gaps or duplicated brackets)
    found.sort(key=lambda b: b.theta1)
    merged = []
    for b in found:
        if merged and b.theta1 <= merged[-1].theta2 + tol:
            merged[-1].theta2 = max(merged[-1].theta2, b.theta2)
        else:
            merged.append(b)
    if check_missed:
        _missed_band_check(f, th, merged, parents)
    return merged


def _missed_band_check(f, th, found, parents):
    mids = 0.5 * (th[:-1] + th[1:])
    fine = np.concatenate([th[:-1] + (th[1:] - th[:-1]) * q for q in (0.25, 0.5, 0.75)])
    fine = np.concatenate([fine, mids]) % (2 * np.pi)
    inside = np.abs(f(fine)) <= 1.0
    if not np.any(inside):
        return
    pts = fine[inside]
    lo = np.array([b.theta1 for b in found])
    hi = np.array([b.theta2 for b in found])
    covered = np.zeros(len(pts), dtype=bool)
    for a, b in zip(lo, hi):
        covered |= (pts >= a - 1e-12) & (pts <= b + 1e-12)
    if not np.all(covered):
        raise SuspectedMissedBand(f"{int(np.sum(~covered))} sample points with |x_k| <= 1 "
                                  "lie outside all detected bands")


def band_hierarchy(theta_a, theta_b, k_max, grid_density=16):
    """Bands of sigma_{-1}, ..., sigma_{k_max}; level k is refined inside the
    bands of levels k-1 and k-2."""
    levels = {}
    for k in range(-1, k_max + 1):
        parents = levels.get(k - 1, []) + levels.get(k - 2, [])
        levels[k] = bands(theta_a, theta_b, k, grid_density, parents)
    return levels


def sigma_minus1_arcs(theta_b):
    """sigma_{-1} = {|cos theta| <= cos theta_b}: two arcs."""
    c = math.acos(math.cos(theta_b))
    return [(c, math.pi - c), (math.pi + c, 2 * math.pi - c)]


def classify_bands(levels, k, strict=False):
    """Mark level-k bands A (inside a level k-1 band) or B (inside level k-2)."""
    out = []
    problems = []
    for b in levels[k]:
        in_a = any(p.contains(b) for p in levels.get(k - 1, []))
        in_b = any(p.contains(b) for p in levels.get(k - 2, []))
        t = "A" if in_a and not in_b else "B" if in_b and not in_a else "untyped"
        if t == "untyped":
            problems.append(b)
        out.append(SpectralBand(b.level, b.theta1, b.theta2, t))
    if problems and strict:
        raise UntypeableBand(f"{len(problems)} untypeable bands at level {k}")
    return out, problems


def nesting_counts(levels, typed, k):
    """For each typed level-k band: number of level-(k+1) and level-(k+2) bands inside."""
    rows = []
    for b in typed[k]:
        n1 = sum(b.contains(c) for c in levels.get(k + 1, []))
        n2 = sum(b.contains(c) for c in levels.get(k + 2, []))
        rows.append((b.type, n1, n2))
    return rows


def check_nesting(levels, typed, k):
    """Type A: 0 children at k+1, 1 at k+2. Type B: 1 at k+1, 2 at k+2."""
    expected = {"A": (0, 1), "B": (1, 2)}
    bad = []
    for t, n1, n2 in nesting_counts(levels, typed, k):
        if t not in expected or (n1, n2) != expected[t]:
            bad.append((t, n1, n2))
    return bad


def trace_derivative_ratios(theta_a, theta_b, typed_bands, k, samples=16):
    """Min/max of |x'_{k}/x'_{k-1}| on type A and |x'_k/x'_{k-2}| on type B bands."""
    stats = {"A": [], "B": []}
    for b in typed_bands:
        if b.type not in stats:
            continue
        th = np.linspace(b.theta1, b.theta2, samples)
        _, d = fib_trace_derivatives(theta_a, theta_b, th, k)
        ref = d[k] if b.type == "A" else d[k - 1]
        r = np.abs(d[k + 1] / ref)
        stats[b.type].append((float(r.min()), float(r.max())))
    return {t: (min(v[0] for v in s), max(v[1] for v in s)) if s else None
            for t, s in stats.items()}


def g_pm(u, v, I, sign):
    """g_+-(u, v, I) = uv +- sqrt(I + (1 - u^2)(1 - v^2))."""
    rad = I + (1.0 - u * u) * (1.0 - v * v)
    if np.any(np.asarray(rad) < 0):
        raise ComplexBranch("negative radicand")
    return u * v + (1.0 if sign > 0 else -1.0) * np.sqrt(rad)


# ---------------------------------------------------------------------------
# coupling constants and predicted exponents

def derivative_constants(theta_b, mu):
    """(m, M) from the explicit derivative-ratio inequalities.

    xi = m sqrt(mu) is the smaller of (2 - 1/s^2) sqrt(mu) - 7 and
    (4 - 3/(2 s^2)) sqrt(mu) - 14; Xi = M sqrt(mu) is the larger of
    (2 + 1/s^2) sqrt(mu) + 9 and (4 + 3/(2 s^2)) sqrt(mu) + 18, s = sin(theta_b).
    """
    s2 = math.sin(theta_b) ** 2
    r = math.sqrt(mu)
    xi = min((2 - 1 / s2) * r - 7, (4 - 1.5 / s2) * r - 14)
    big = max((2 + 1 / s2) * r + 9, (4 + 1.5 / s2) * r + 18)
    return xi / r, big / r


def predicted_exponents(kap, mu, m, M, p):
    xi = m * math.sqrt(mu)
    Xi = M * math.sqrt(mu)
    eta = math.log(Xi) / math.log(PHI) - 1.0
    tau = 2.0 * math.log((kap + 2.0) * (2.0 * kap + 5.0) ** 2) / math.log(PHI)
    lower = (p - 3 * tau - eta) / (p * (1 + tau))
    upper = 2.0 * math.log(PHI) / math.log(xi) if xi > 1.0 else math.inf
    return {"xi": xi, "Xi": Xi, "eta": eta, "tau": tau, "lower": lower, "upper": upper}


def coupling_report(theta_a, theta_b, k_max=8, m=None, M=None, p=2.0, levels=None):
    """kappa, mu = kappa^2 min_{sigma_k, k <= k_max} Im(z)^2, and exponent bounds."""
    kap = kappa(theta_a, theta_b)
    if levels is None:
        levels = band_hierarchy(theta_a, theta_b, k_max)
    min_s2 = math.inf
    for k in range(-1, k_max + 1):
        for b in levels[k]:
            th = np.array([b.theta1, b.theta2])
            s2 = np.sin(th) ** 2
            lo = float(s2.min())
            # interior minimum at a multiple of pi
            for c in (0.0, math.pi, 2 * math.pi):
                if b.theta1 < c < b.theta2:
                    lo = 0.0
            min_s2 = min(min_s2, lo)
    mu = kap ** 2 * min_s2
    dm, dM = derivative_constants(theta_b, mu) if mu > 0 else (float("nan"), float("nan"))
    m = dm if m is None else m
    M = dM if M is None else M
    rep = {"theta_a": theta_a, "theta_b": theta_b, "kappa": kap, "mu": mu, "k_max": k_max,
           "m": m, "M": M, "p": p}
    if mu > 0:
        rep.update(predicted_exponents(kap, mu, m, M, p))
    return rep


def largecoup_conditions(theta_a, theta_b, lam):
    """The two sufficient inequalities for sigma_k in {|Im z| >= sin theta_b}."""
    c1 = kappa(theta_a, theta_b) ** 2 >= lam / math.sin(theta_b) ** 2
    c2 = (2 * math.cos(theta_b) ** 2 - 1) + math.sin(theta_a) * math.sin(theta_b) > math.cos(theta_a)
    return c1 and c2


def largecoup_sweep(theta_b, lam=32.0, steps=4000):
    """Smallest theta_a on a grid in (theta_b, pi/2) meeting both conditions."""
    for ta in np.linspace(theta_b, math.pi / 2, steps + 2)[1:-1]:
        if largecoup_conditions(ta, theta_b, lam):
            return float(ta)
    return None


# ---------------------------------------------------------------------------
# Thue-Morse

def tm_traces(theta_a, theta_b, thetas, n_max):
    """Full traces t_{-1}, ..., t_{n_max} with derivatives in theta.

    t_{-1}, t_0, t_1 are twice the Fibonacci half-traces;
    t_2 = t_0 t_{-1} t_1 - t_0^2 - t_{-1}^2 + 2 (the words a and b differ);
    t_{n+1} = t_{n-1}^2 (t_n - 2) + 2 for n >= 2.
    """
    x, d = fib_trace_derivatives(theta_a, theta_b, thetas, 1)
    t = np.empty((max(n_max, 2) + 2,) + np.shape(thetas))
    dt = np.empty_like(t)
    t[:3] = 2 * x[:3]
    dt[:3] = 2 * d[:3]
    if n_max >= 2:
        a, b, c = t[1], t[0], t[2]
        da, db, dc = dt[1], dt[0], dt[2]
        t[3] = a * b * c - a * a - b * b + 2
        dt[3] = da * b * c + a * db * c + a * b * dc - 2 * a * da - 2 * b * db
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(2, n_max):
            i = n + 1
            t[i + 1] = t[i - 1] ** 2 * (t[i] - 2) + 2
            dt[i + 1] = 2 * t[i - 1] * dt[i - 1] * (t[i] - 2) + t[i - 1] ** 2 * dt[i]
    return t[:n_max + 2], dt[:n_max + 2]


def tm_orbit(theta_a, theta_b, theta, n_max):
    t, _ = tm_traces(theta_a, theta_b, np.array([theta]), n_max)
    vals = t[:, 0]
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(vals))
    return TraceOrbit("thue_morse", float(theta), np.arange(-1, n_max + 1), vals, logs,
                      np.sign(vals))


def tm_monodromy(theta_a, theta_b, theta, n):
    """M_n = Z(2^{n+1}, 0; z) from the cocycle (n >= 0), M_{-1} from the b coin."""
    from .cocycles import transfer
    from .coins import CoinVerblunsky
    z = np.exp(1j * theta)
    if n == -1:
        s, c = math.sin(theta_b), math.cos(theta_b)
        return np.array([[z, -s], [-s, 1 / z]]) / c
    seq = CoinVerblunsky(ThueMorseCoins(theta_a, theta_b))
    return transfer(seq, 2 ** (n + 1), 0, z)


def fib_monodromy(theta_a, theta_b, theta, k):
    """M_k = Z(2F_k, 0; z) for k >= 0; M_{-1} = sec(b) (z, -sin b; -sin b, 1/z)."""
    from .cocycles import transfer
    from .coins import CoinVerblunsky
    z = np.exp(1j * np.asarray(theta))
    if k == -1:
        s, c = math.sin(theta_b), math.cos(theta_b)
        return np.stack([np.stack([z, -s + 0 * z], -1), np.stack([-s + 0 * z, 1 / z], -1)], -2) / c
    seq = CoinVerblunsky(FibonacciCoins(theta_a, theta_b))
    return transfer(seq, 2 * fibonacci_number(k), 0, z)


def tm_closed_gap_search(theta_a, theta_b, n, grid=None, tol=1e-14):
    """Points z0 = e^{i theta0} with t_k(z0) = 0 for some 1 <= k <= n - 2 and
    t_2(z0) != 2. Returns a list of dicts with theta, k and t_n(z0)."""
    if n < 3:
        raise ValueError("n must be >= 3")
    found = []
    for k in range(1, n - 1):
        pts = grid or max(64 * 2 ** (k + 1), 4096)
        th = np.linspace(0.0, 2 * np.pi, pts + 1)

        def f(x, k=k):
            return tm_traces(theta_a, theta_b, x, k)[0][k + 1]

        v = f(th)
        sc = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
        roots = _bisect(f, th[sc], th[sc + 1], v[sc], tol)
        for r in roots:
            t_all, _ = tm_traces(theta_a, theta_b, np.array([r]), max(n, 2))
            if abs(t_all[3, 0] - 2.0) > 1e-8:
                found.append({"theta": float(r), "k": k, "t_n": float(t_all[n + 1, 0])})
    if not found:
        raise NoRootFound(f"no zero of t_k, 1 <= k <= {n - 2}, on the sampled grid")
    return found


def _tm_letter_mp(theta_x, z, mp):
    # P(sin theta_x) Q(0): the two GZ steps of one coin, independent of position
    s, c = mp.sin(theta_x), mp.cos(theta_x)
    P = mp.matrix([[-s, z], [1 / z, -s]]) / c
    return P * mp.matrix([[0, 1], [1, 0]])


def tm_monodromies_mp(theta_a, theta_b, theta, n_max, dps=40):
    """M_0, ..., M_{n_max} at z = e^{i theta} in extended precision.

    Uses M(w_{n+1}) = M(wbar_n) M(w_n), two products per level.
    """
    import mpmath
    with mpmath.workdps(dps):
        z = mpmath.expj(mpmath.mpf(theta))
        A = _tm_letter_mp(mpmath.mpf(theta_a), z, mpmath)
        B = _tm_letter_mp(mpmath.mpf(theta_b), z, mpmath)
        out = [A]
        for _ in range(n_max):
            A, B = B * A, A * B
            out.append(A)
    return out


def polish_tm_root(theta_a, theta_b, theta0, k, dps=40, width=1e-9):
    """Refine a zero of t_k = tr M_k near theta0 in extended precision."""
    import mpmath

    def f(th):
        M = tm_monodromies_mp(theta_a, theta_b, th, k, dps)[k]
        return mpmath.re(M[0, 0] + M[1, 1])

    with mpmath.workdps(dps):
        lo, hi = mpmath.mpf(theta0) - width, mpmath.mpf(theta0) + width
        if f(lo) * f(hi) > 0:
            raise NoRootFound(f"no sign change of t_{k} around {theta0}")
        return mpmath.findroot(f, (lo, hi), solver="anderson")


def verify_closed_gap_mp(theta_a, theta_b, theta0, k, j_max, dps=40):
    """Extended-precision version of verify_closed_gap at a polished root.

    The monodromies have derivatives of size 1e10 and beyond in theta, so a
    root known to double precision cannot show M_j = I to 1e-8.
    """
    import mpmath
    with mpmath.workdps(dps):
        root = polish_tm_root(theta_a, theta_b, theta0, k, dps)
        Ms = tm_monodromies_mp(theta_a, theta_b, root, j_max, dps)
        eye = mpmath.eye(2)
        worst_m = worst_t = worst_d = 0.0
        for j in range(k + 2, j_max + 1):
            D = Ms[j] - eye
            worst_m = max(worst_m, float(max(abs(D[r, c]) for r in range(2) for c in range(2))))
            worst_t = max(worst_t, float(abs(Ms[j][0, 0] + Ms[j][1, 1] - 2)))

            def tr(th, j=j):
                M = tm_monodromies_mp(theta_a, theta_b, th, j, dps)[j]
                return mpmath.re(M[0, 0] + M[1, 1])
            # central difference; tm_monodromies_mp fixes its own precision,
            # so mpmath.diff cannot raise it
            h = mpmath.mpf(10) ** (-(dps // 2))
            worst_d = max(worst_d, float(abs((tr(root + h) - tr(root - h)) / (2 * h))))
        return {"theta": root, "monodromy": worst_m, "trace": worst_t, "derivative": worst_d,
                "t_k": float(abs(Ms[k][0, 0] + Ms[k][1, 1]))}


def verify_closed_gap(theta_a, theta_b, theta0, k, j_max):
    """Max ||M_j(z0) - I|| and |t_j(z0) - 2| for k + 2 <= j <= j_max, and |t'_j|."""
    t, dt = tm_traces(theta_a, theta_b, np.array([theta0]), j_max)
    worst_m = worst_t = worst_d = 0.0
    for j in range(k + 2, j_max + 1):
        M = tm_monodromy(theta_a, theta_b, theta0, j)
        worst_m = max(worst_m, float(np.max(np.abs(M - np.eye(2)))))
        worst_t = max(worst_t, abs(t[j + 1, 0] - 2.0))
        worst_d = max(worst_d, abs(dt[j + 1, 0]))
    return {"monodromy": worst_m, "trace": worst_t, "derivative": worst_d}
