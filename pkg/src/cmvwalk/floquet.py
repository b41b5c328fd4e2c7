"""Periodic CMV matrices as direct integrals over the fiber angle theta.

Fiber coordinates: index s = 0..p-1 of the p x p matrix E_theta is lattice
site s, and u_hat_s(theta) = sum_l u_{s + l p} e^{-i l theta}. Entries of E
that reach into the neighbouring cell pick up e^{+-i theta}.
The fiber position used for B_theta and V_theta is x(s) = 2 floor((s+1)/2);
it differs from the lattice X = 2 floor(n/2) by a bounded operator, so J and
the velocities are the same for both.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .cmv import build_cmv, build_commutator, build_position
from .coins import FunctionVerblunsky, PeriodicVerblunsky
from .dynamics import evolve_inverse_steps, step_forward
from .errors import BranchCrossing, DimensionMismatch, NotInDisk, NotUnimodularTwist, PeriodMismatch


def _periodic_alphas(alphas):
    a = np.asarray(alphas.alphas if isinstance(alphas, PeriodicVerblunsky) else alphas,
                   dtype=complex)
    if a.ndim != 1 or len(a) == 0:
        raise PeriodMismatch("need one period of coefficients")
    if np.any(np.abs(a) >= 1.0):
        raise NotInDisk("|alpha| >= 1")
    if len(a) % 2:
        a = np.concatenate([a, a])  # odd period: use the doubled period
    return a


def abcd(seq, n):
    """(a_n, b_n, c_n, d_n) = (-conj(al_n) al_{n-1}, conj(al_n) rho_{n-1},
    -rho_n al_{n-1}, rho_n rho_{n-1})."""
    if isinstance(seq, (list, tuple, np.ndarray)):
        seq = PeriodicVerblunsky(seq)
    prev, cur = seq.window(n - 1, n)
    rp, rc = math.sqrt(1 - abs(prev) ** 2), math.sqrt(1 - abs(cur) ** 2)
    return (-np.conj(cur) * prev, np.conj(cur) * rp, -rc * prev, rc * rp)


def _row_entries(a, s):
    """Nonzero entries {column: value} of row s of the extended CMV matrix for
    periodic coefficients a (columns are lattice sites, possibly outside 0..p-1)."""
    p = len(a)

    def al(n):
        return a[n % p]

    def rh(n):
        return math.sqrt(1.0 - abs(al(n)) ** 2)

    def A(n):
        return -np.conj(al(n)) * al(n - 1)

    def B(n):
        return np.conj(al(n)) * rh(n - 1)

    def C(n):
        return -rh(n) * al(n - 1)

    def D(n):
        return rh(n) * rh(n - 1)

    if s % 2 == 0:
        return {s - 2: D(s), s - 1: C(s), s: A(s + 1), s + 1: C(s + 1)}
    return {s - 1: B(s + 1), s: A(s + 1), s + 1: B(s + 2), s + 2: D(s + 2)}


def _fiber_position(p):
    s = np.arange(p)
    return 2 * ((s + 1) // 2)


def _fibered(a, theta, weight=None):
    p = len(a)
    out = np.zeros((p, p), dtype=complex)
    x = _fiber_position(p)
    for s in range(p):
        for t, val in _row_entries(a, s).items():
            ell = t // p
            w = 1.0
            if weight is not None:
                xt = x[t % p] + ell * p
                w = weight(xt - x[s])
            out[s, t % p] += val * w * np.exp(1j * ell * theta)
    return out


@dataclass
class FloquetCell:
    p: int
    theta: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def projections(self):
        v = self.eigenvectors
        return np.einsum("ij,kj->jik", v, v.conj())


def _unitary_eig(m):
    """Eigen-decomposition of a unitary matrix through the complex Schur form."""
    t, z = schur(m, output="complex")
    return np.diag(t).copy(), z


def floquet_cell(alphas, theta):
    """E_theta with corner entries carrying e^{+-i theta}."""
    a = _periodic_alphas(alphas)
    m = _fibered(a, theta)
    lam, vec = _unitary_eig(m)
    return FloquetCell(len(a), float(theta), m, lam, vec)


def commutator_cell(alphas, theta):
    """B_theta: fiber of B = E X - X E with the fiber position."""
    a = _periodic_alphas(alphas)
    return _fibered(a, theta, weight=lambda dx: dx)


def v_theta(p, theta):
    """V_theta = diag(e^{i x(s) theta / p})."""
    return np.diag(np.exp(1j * _fiber_position(p) * theta / p))


def tilde(m, p, theta):
    v = v_theta(p, theta)
    return v.conj().T @ m @ v


def commutator_identity_defect(alphas, theta, dtheta):
    """|| (E~_{theta+d} - E~_{theta-d}) / 2d - (i/p) B~_theta ||_2."""
    if not 1e-7 <= dtheta <= 1e-3:
        raise ValueError("dtheta must lie in [1e-7, 1e-3]")
    a = _periodic_alphas(alphas)
    p = len(a)
    ep = tilde(_fibered(a, theta + dtheta), p, theta + dtheta)
    em = tilde(_fibered(a, theta - dtheta), p, theta - dtheta)
    bt = tilde(commutator_cell(a, theta), p, theta)
    return float(np.linalg.norm((ep - em) / (2 * dtheta) - 1j / p * bt, 2))


def analytic_derivative_defect(alphas, theta):
    """Entrywise |d/dtheta E~_theta - (i/p) B~_theta| with the derivative of the
    phases e^{i (x_t - x_s) theta / p} taken in closed form."""
    a = _periodic_alphas(alphas)
    p = len(a)
    deriv = tilde(_fibered(a, theta, weight=lambda dx: 1j * dx / p), p, theta)
    bt = tilde(commutator_cell(a, theta), p, theta)
    return float(np.max(np.abs(deriv - 1j / p * bt)))


def richardson_ratio(alphas, theta, dtheta=1e-3):
    return commutator_identity_defect(alphas, theta, dtheta) / \
        commutator_identity_defect(alphas, theta, dtheta / 2)


# ---------------------------------------------------------------------------
# mod-p Fourier transform and periodic closure

def mod_p_fourier(u, p, n_min=0):
    """u on sites n_min..n_min + L p - 1 (n_min divisible by p) -> u_hat[m, s]
    at theta_m = 2 pi m / L."""
    u = np.asarray(u, dtype=complex)
    if len(u) % p or n_min % p:
        raise DimensionMismatch("window length and start must be multiples of p")
    L = len(u) // p
    cells = u.reshape(L, p)
    l0 = n_min // p
    thetas = 2 * np.pi * np.arange(L) / L
    uh = np.fft.fft(cells, axis=0) * np.exp(-1j * l0 * thetas)[:, None]
    return thetas, uh


def inverse_mod_p_fourier(uh, n_min=0):
    uh = np.asarray(uh, dtype=complex)
    L, p = uh.shape
    thetas = 2 * np.pi * np.arange(L) / L
    cells = np.fft.ifft(uh * np.exp(1j * (n_min // p) * thetas)[:, None], axis=0)
    return cells.reshape(L * p)


def periodic_closure(alphas, L):
    """Dense E on the ring of L cells (sites 0..Lp-1 with wraparound)."""
    a = _periodic_alphas(alphas)
    p = len(a)
    n = L * p
    out = np.zeros((n, n), dtype=complex)
    for s in range(n):
        for t, val in _row_entries(a, s).items():
            out[s, t % n] += val
    return out


# ---------------------------------------------------------------------------
# band functions and velocities

def floquet_spectrum(alphas, thetas):
    """Eigenvalues lambda_j(theta) on a grid, shape (len(thetas), p)."""
    a = _periodic_alphas(alphas)
    return np.array([_unitary_eig(_fibered(a, t))[0] for t in thetas])


def band_arcs(alphas):
    """Arcs of the periodic spectrum as (arg_start, arg_end) with 0 <= start < 2 pi.

    Band edges sit at theta = 0 and theta = pi, where the discriminant is +-2;
    each band is the arc between consecutive eigenvalues of E_0 and E_pi.
    """
    a = _periodic_alphas(alphas)
    pts = []
    for t in (0.0, np.pi):
        lam = _unitary_eig(_fibered(a, t))[0]
        pts.extend((np.angle(lam) % (2 * np.pi)).tolist())
    pts = np.sort(np.array(pts))
    # bands alternate with gaps; a band contains the midpoint images of theta = pi/2
    mid = np.angle(_unitary_eig(_fibered(a, np.pi / 2))[0]) % (2 * np.pi)
    arcs = []
    n = len(pts)
    for i in range(n):
        lo, hi = pts[i], pts[(i + 1) % n] + (2 * np.pi if i == n - 1 else 0.0)
        if hi - lo < 1e-14:
            continue
        inside = np.any(((mid - lo) % (2 * np.pi)) < (hi - lo))
        if inside:
            arcs.append((float(lo), float(hi % (2 * np.pi)) if hi > 2 * np.pi else float(hi)))
    return arcs


def arcs_distance(arcs1, arcs2):
    """Max endpoint mismatch between two sorted arc lists (inf if counts differ)."""
    if len(arcs1) != len(arcs2):
        return math.inf
    e1 = np.sort(np.ravel(arcs1) % (2 * np.pi))
    e2 = np.sort(np.ravel(arcs2) % (2 * np.pi))
    d = np.abs(e1 - e2)
    return float(np.max(np.minimum(d, 2 * np.pi - d)))


def _sort_branches(lams, vecs):
    """Reorder eigenpairs along the grid by nearest-phase continuity."""
    out_l = [lams[0]]
    out_v = [vecs[0]]
    for lam, vec in zip(lams[1:], vecs[1:]):
        prev = out_l[-1]
        dist = np.abs(prev[:, None] - lam[None, :])
        order = np.argmin(dist, axis=1)
        if len(set(order.tolist())) != len(order):
            raise BranchCrossing("eigenvalue branches not separable on the grid")
        out_l.append(lam[order])
        out_v.append(vec[:, order])
    return np.array(out_l), np.array(out_v)


@dataclass
class VelocityReport:
    thetas: np.ndarray
    eigenvalues: np.ndarray        # (n_theta, p)
    velocities: np.ndarray         # p d(arg lambda_j)/d theta, Feynman-Hellmann
    velocities_fd: np.ndarray      # same by finite differences
    cross_check: float
    j_spectrum: tuple              # (min, max) of the velocity values
    min_abs_velocity: float


def velocities_and_J(alphas, n_theta=256, h=1e-6):
    """Group velocities on an offset theta grid (never hitting 0 or pi)."""
    a = _periodic_alphas(alphas)
    p = len(a)
    thetas = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    keep = (np.abs(np.sin(thetas)) > 1e-9)
    thetas = thetas[keep]
    lams, vecs, fh, fd = [], [], [], []
    for t in thetas:
        lam, vec = _unitary_eig(_fibered(a, t))
        bt = commutator_cell(a, t)
        dlam = np.array([1j / p * np.vdot(vec[:, j], bt @ vec[:, j]) for j in range(p)])
        fh.append(p * np.real(dlam / (1j * lam)))
        lp = _unitary_eig(_fibered(a, t + h))[0]
        lm = _unitary_eig(_fibered(a, t - h))[0]
        ip = np.argmin(np.abs(lam[:, None] - lp[None, :]), axis=1)
        im = np.argmin(np.abs(lam[:, None] - lm[None, :]), axis=1)
        dphase = np.angle(lp[ip] / lm[im]) / (2 * h)
        fd.append(p * dphase)
        lams.append(lam)
        vecs.append(vec)
    lams, vecs = np.array(lams), np.array(vecs)
    fh, fd = np.array(fh), np.array(fd)
    # order branches continuously so per-branch curves are meaningful
    order_l, _ = _sort_branches(lams, vecs)
    perm = np.array([[int(np.argmin(np.abs(lams[i] - x))) for x in order_l[i]]
                     for i in range(len(thetas))])
    fh = np.take_along_axis(fh, perm, axis=1)
    fd = np.take_along_axis(fd, perm, axis=1)
    cross = float(np.max(np.abs(fh - fd)))
    return VelocityReport(thetas, order_l, fh, fd, cross, (float(fh.min()), float(fh.max())),
                          float(np.min(np.abs(fh))))


def apply_J(alphas, psi, n_min, n_theta=4096):
    """J psi for finitely supported psi on sites n_min..; J has fiber symbol
    sum_j v_j P_j with v_j = p d(arg lambda_j)/d theta.

    The result is sampled back on n_theta / 2 cells on each side of the support.
    Returns (sites, values).
    """
    a = _periodic_alphas(alphas)
    p = len(a)
    psi = np.asarray(psi, dtype=complex)
    start = (n_min // p) * p
    pad = np.zeros(n_min - start + len(psi) + (-(n_min + len(psi))) % p, dtype=complex)
    pad[n_min - start:n_min - start + len(psi)] = psi
    cells = pad.reshape(-1, p)
    l0 = start // p
    ells = l0 + np.arange(len(cells))
    thetas = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    phase = np.exp(-1j * np.outer(thetas, ells))
    uh = phase @ cells                       # (n_theta, p)
    out = np.empty_like(uh)
    for m, t in enumerate(thetas):
        lam, vec = _unitary_eig(_fibered(a, t))
        bt = commutator_cell(a, t)
        v = np.array([p * np.real((1j / p * np.vdot(vec[:, j], bt @ vec[:, j])) / (1j * lam[j]))
                      for j in range(p)])
        out[m] = vec @ (v * (vec.conj().T @ uh[m]))
    half = n_theta // 2
    lc = l0 + np.arange(-half, half + len(cells))
    back = np.exp(1j * np.outer(lc, thetas)) @ out / n_theta
    sites = (lc[:, None] * p + np.arange(p)[None, :]).ravel()
    return sites, back.ravel()


# ---------------------------------------------------------------------------
# ballistic transport

def ballistic_check(alphas, psi0, L_values, n_theta=4096):
    """m_L and s_L for the Heisenberg evolution X(L) = E^L X E^{-L}.

    psi0 is a dict {site: amplitude}. X(L) psi0 is computed two ways: by
    conjugated evolution, and by the Cesaro form X + (sum_{l<L} B(l)) E^*,
    accumulated as Q_{m+1} = E^{-1} Q_m + B E^{-m} E^* psi0 and
    X(L) psi0 = X psi0 + E^{L-1} Q_L.
    Also returns the forward displacement <E^L psi0, X E^L psi0> / L.
    """
    a = _periodic_alphas(alphas)
    p = len(a)
    seq = PeriodicVerblunsky(a)
    L_values = sorted(int(v) for v in L_values)
    L_max = L_values[-1]
    sites0 = sorted(psi0)
    margin = 4 * L_max + 8
    n_min = ((sites0[0] - margin) // p) * p
    n_min -= n_min % 2
    n_max = sites0[-1] + margin
    if (n_max - n_min + 1) % 2:
        n_max += 1
    E = build_cmv(seq, n_min, n_max)
    X = build_position(n_min, n_max).bands[2].real
    size = E.size

    def fwd_steps(v, k):
        return step_forward(E, v, k)

    def back_steps(v, k):
        return evolve_inverse_steps(E, v, k)

    psi = np.zeros(size, dtype=complex)
    for n, v in psi0.items():
        psi[n - n_min] = v
    Bop = build_commutator(E)

    jsites, jvals = apply_J(a, np.array([psi0.get(n, 0.0) for n in range(sites0[0], sites0[-1] + 1)]),
                            sites0[0], n_theta)
    jpsi = np.zeros(size, dtype=complex)
    inside = (jsites >= n_min) & (jsites <= n_max)
    jpsi[jsites[inside] - n_min] = jvals[inside]
    jnorm = float(np.linalg.norm(jvals))

    rows = []
    for L in L_values:
        # conjugated evolution
        w = back_steps(psi, L)
        w = X * w
        xl = fwd_steps(w, L)
        # Cesaro form
        y = back_steps(psi, 1)
        q = np.zeros(size, dtype=complex)
        wm = y.copy()
        for m in range(L):
            if m > 0:
                q = back_steps(q, 1)
            q = q + Bop.apply(wm)
            wm = back_steps(wm, 1)
        xc = X * psi + fwd_steps(q, L - 1)
        fwd = fwd_steps(psi, L)
        m_L = float(np.real(np.vdot(psi, xl))) / L
        s_L = float(np.linalg.norm(xl / L - jpsi))
        disp = float(np.sum(X * np.abs(fwd) ** 2)) / L
        rows.append({"L": L, "m_L": m_L, "s_L": s_L, "s_L_rel": s_L / jnorm if jnorm else math.inf,
                     "cesaro_defect": float(np.linalg.norm(xl - xc)),
                     "forward_displacement": disp,
                     "edge_mass": float(np.sum(np.abs(xl[:4])) + np.sum(np.abs(xl[-4:])))})
    return {"rows": rows, "J_norm": jnorm, "J_expectation": float(np.real(np.vdot(psi, jpsi)))}


# ---------------------------------------------------------------------------
# skew-periodic coefficients

def skew_gauge(alpha_func, p, omega, n_check=(-16, 15)):
    """alpha_{n+p} = omega alpha_n  ->  (periodic alpha~, gauge gamma).

    phi = arg(omega)/p, alpha~_j = e^{-i j phi} alpha_j and
    gamma_k = exp(i (-1)^{k+1} floor((k+1)/2) phi). The identity
    E = e^{-i phi} Gamma^* E~ Gamma is checked on a window; the defect is returned.
    """
    omega = complex(omega)
    if abs(abs(omega) - 1.0) > 1e-12:
        raise NotUnimodularTwist("|omega| != 1")
    phi = np.angle(omega) / p
    js = np.arange(p)
    alpha_t = np.exp(-1j * js * phi) * np.asarray(alpha_func(js), dtype=complex)

    def gamma(k):
        k = np.asarray(k)
        return np.exp(1j * (-1.0) ** (k + 1) * ((k + 1) // 2) * phi)

    n0, n1 = n_check
    orig = FunctionVerblunsky(alpha_func)
    E = build_cmv(orig, n0, n1, closure=None).dense()
    Et = build_cmv(PeriodicVerblunsky(alpha_t), n0, n1, closure=None).dense()
    g = np.diag(gamma(np.arange(n0, n1 + 1)))
    defect = float(np.max(np.abs(E - np.exp(-1j * phi) * g.conj().T @ Et @ g)))
    return alpha_t, gamma, defect
