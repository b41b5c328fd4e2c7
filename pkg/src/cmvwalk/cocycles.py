"""Szego and Gesztesy-Zinchenko (GZ) transfer matrices.

All one-step constructors broadcast over arrays of alpha and z and return
arrays of shape (..., 2, 2). Products over long index ranges are done with
a separate log-scale accumulator so that norms far beyond the float range
stay representable.
"""

import numpy as np

from .errors import NotInDisk, ZeroSpectralParameter

RENORM_AT = 1e100


def _check(alpha, z):
    alpha = np.asarray(alpha, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(alpha) >= 1.0):
        raise NotInDisk("|alpha| >= 1")
    if np.any(z == 0):
        raise ZeroSpectralParameter("z = 0")
    return alpha, z


def _mat(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


def szego_step(alpha, z):
    """S(alpha, z) = rho^{-1} (z, -conj(alpha); -alpha z, 1)."""
    alpha, z = _check(alpha, z)
    rho = np.sqrt(1.0 - np.abs(alpha) ** 2)
    return _mat(z, -np.conj(alpha), -alpha * z, np.ones_like(z)) / rho[..., None, None]


def gz_step(alpha, z, parity):
    """P(alpha, z) for parity 'odd', Q(alpha, z) for parity 'even'.

    P = rho^{-1} (-conj(alpha), z; 1/z, -alpha), Q = rho^{-1} (-alpha, 1; 1, -conj(alpha)).
    """
    alpha, z = _check(alpha, z)
    rho = np.sqrt(1.0 - np.abs(alpha) ** 2)[..., None, None]
    if parity in ("odd", 1):
        return _mat(-np.conj(alpha), z, 1.0 / z, -alpha) / rho
    if parity in ("even", 0):
        one = np.ones_like(z)
        return _mat(-alpha, one, one, -np.conj(alpha)) / rho
    raise ValueError("parity must be 'odd' or 'even'")


def gz_one_step(alpha_n, n, z):
    """Y(n, z): P when n is odd, Q when n is even."""
    return gz_step(alpha_n, z, "odd" if n % 2 else "even")


def theta_block(alpha):
    """Theta(alpha) = (conj(alpha), rho; rho, -alpha)."""
    alpha = np.asarray(alpha, dtype=complex)
    if np.any(np.abs(alpha) > 1.0):
        raise NotInDisk("|alpha| > 1")
    rho = np.sqrt(np.maximum(1.0 - np.abs(alpha) ** 2, 0.0))
    return _mat(np.conj(alpha), rho, rho, -alpha)


def inv2(m):
    """Inverse of a stack of 2x2 matrices via the adjugate."""
    m = np.asarray(m)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return _mat(m[..., 1, 1], -m[..., 0, 1], -m[..., 1, 0], m[..., 0, 0]) / det[..., None, None]


def det2(m):
    m = np.asarray(m)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def spectral_norm(m):
    """Largest singular value of 2x2 matrices, in closed form."""
    m = np.asarray(m)
    # scale out the largest entry so squares neither overflow nor underflow
    _, e = np.frexp(np.max(np.abs(m), axis=(-2, -1)))
    e = e[..., None, None]
    m = np.ldexp(m.real, -e) + 1j * np.ldexp(m.imag, -e)
    s = np.ldexp(1.0, e[..., 0, 0])
    # largest eigenvalue of m^* m; stays accurate when the singular values coincide
    a = np.abs(m[..., 0, 0]) ** 2 + np.abs(m[..., 1, 0]) ** 2
    d = np.abs(m[..., 0, 1]) ** 2 + np.abs(m[..., 1, 1]) ** 2
    b = np.conj(m[..., 0, 0]) * m[..., 0, 1] + np.conj(m[..., 1, 0]) * m[..., 1, 1]
    return s * np.sqrt((a + d) / 2.0 + np.hypot((a - d) / 2.0, np.abs(b)))


def _alphas(seq, lo, hi):
    """alpha_lo..alpha_hi from a VerblunskySequence or an (array, offset) pair."""
    if isinstance(seq, tuple):
        arr, offset = seq
        return np.asarray(arr[lo - offset:hi - offset + 1], dtype=complex)
    return seq.window(lo, hi)


def _one_steps(alpha, ks, z, family):
    z = np.asarray(z, dtype=complex)
    a = alpha.reshape(alpha.shape + (1,) * z.ndim)
    if family == "szego":
        return szego_step(a, z)
    odd = gz_step(a, z, "odd")
    even = gz_step(a, z, "even")
    sel = (ks % 2 == 1).reshape(ks.shape + (1,) * (z.ndim + 2))
    return np.where(sel, odd, even)


class LogMatrix:
    """Matrix stored as mantissa * exp(log_scale), broadcast over a z grid."""

    def __init__(self, mantissa, log_scale=None):
        self.mantissa = np.asarray(mantissa, dtype=complex)
        if log_scale is None:
            log_scale = np.zeros(self.mantissa.shape[:-2])
        self.log_scale = np.asarray(log_scale, dtype=float)

    def lognorm(self):
        return np.log(spectral_norm(self.mantissa)) + self.log_scale

    def value(self):
        return self.mantissa * np.exp(self.log_scale)[..., None, None]

    def trace(self):
        return np.trace(self.mantissa, axis1=-2, axis2=-1) * np.exp(self.log_scale)

    def renormalize(self):
        nrm = spectral_norm(self.mantissa)
        big = nrm > RENORM_AT
        if np.any(big):
            s = np.where(big, nrm, 1.0)
            self.mantissa = self.mantissa / s[..., None, None]
            self.log_scale = self.log_scale + np.log(s)
        return self


def transfer(seq, n, m, z, family="gz", log_scale=False):
    """T(n, m; z) (family 'szego') or Z(n, m; z) (family 'gz').

    n > m: Y(n-1) ... Y(m);  n = m: I;  n < m: Y(n)^{-1} ... Y(m-1)^{-1}.
    Broadcasts over an array z. With log_scale=True a LogMatrix is returned.
    """
    family = family.lower()
    if family not in ("szego", "gz"):
        raise ValueError("family must be 'szego' or 'gz'")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroSpectralParameter("z = 0")
    acc = LogMatrix(np.broadcast_to(np.eye(2, dtype=complex), z.shape + (2, 2)).copy())
    if n != m:
        lo, hi = (m, n - 1) if n > m else (n, m - 1)
        alpha = _alphas(seq, lo, hi)
        ks = np.arange(lo, hi + 1)
        chunk = 256
        for start in range(0, len(ks), chunk):
            sl = slice(start, start + chunk)
            steps = _one_steps(alpha[sl], ks[sl], z, family)
            if n < m:
                steps = inv2(steps)
            for y in steps:
                # forward: new step on the left; backward: inverse on the right
                if n > m:
                    acc.mantissa = y @ acc.mantissa
                else:
                    acc.mantissa = acc.mantissa @ y
                acc.renormalize()
    return acc if log_scale else acc.value()


def szego_product(alphas, z):
    """T(len(alphas), 0; z) for a finite list alpha_0, alpha_1, ..."""
    return transfer((np.asarray(alphas, complex), 0), len(alphas), 0, z, "szego")


def szego_gz_conjugacy_defect(alpha, beta, z):
    """|| z^{-1} S(alpha,z) S(beta,z) - D^{-1} P(alpha,z) Q(beta,z) D ||, D = diag(z,1)."""
    z = np.asarray(z, dtype=complex)
    lhs = szego_step(alpha, z) @ szego_step(beta, z) / z[..., None, None]
    d = _mat(z, np.zeros_like(z), np.zeros_like(z), np.ones_like(z))
    dinv = _mat(1.0 / z, np.zeros_like(z), np.zeros_like(z), np.ones_like(z))
    rhs = dinv @ gz_step(alpha, z, "odd") @ gz_step(beta, z, "even") @ d
    return spectral_norm(lhs - rhs)


def running_products(seq, n_start, n_stop, z, family="gz"):
    """Z(n, n_start; z) for n = n_start .. n_stop (forward, n_stop >= n_start).

    Returns an array of shape (n_stop - n_start + 1, 2, 2); intended for
    moderate ranges where values stay in float range.
    """
    z = complex(z)
    count = n_stop - n_start
    out = np.empty((count + 1, 2, 2), dtype=complex)
    out[0] = np.eye(2)
    if count == 0:
        return out
    alpha = _alphas(seq, n_start, n_stop - 1)
    ks = np.arange(n_start, n_stop)
    steps = _one_steps(alpha, ks, np.asarray(z), family)
    for i in range(count):
        out[i + 1] = steps[i] @ out[i]
    return out


def solution_basis(seq, z, n_max, n_min=-1):
    """p+, q+, r+, s+ for n = n_min..n_max and the Wronskian W(z, n).

    (p q; r s)(n) = Z(n+1, 0; z) (z z; 1 -1).
    """
    z = complex(z)
    if z == 0:
        raise ZeroSpectralParameter("z = 0")
    init = np.array([[z, z], [1.0, -1.0]], dtype=complex)
    ns = np.arange(n_min, n_max + 1)
    mats = np.empty((len(ns), 2, 2), dtype=complex)
    # forward part, n + 1 >= 0
    fwd = running_products(seq, 0, max(n_max + 1, 0), z)
    for i, n in enumerate(ns):
        if n + 1 >= 0:
            mats[i] = fwd[n + 1] @ init
    if n_min + 1 < 0:
        for i, n in enumerate(ns):
            if n + 1 < 0:
                mats[i] = transfer(seq, n + 1, 0, z) @ init
    p, q = mats[:, 0, 0], mats[:, 0, 1]
    r, s = mats[:, 1, 0], mats[:, 1, 1]
    return {"n": ns, "p": p, "q": q, "r": r, "s": s, "wronskian": p * s - q * r}


def energy_variation_check(seq, z, N, delta):
    """Check ||T(n,0; z e^delta)|| <= L(N) exp(2 L(N) |n| |delta|) for |n| <= N.

    L(N) = max_{|n|,|m| <= N} ||T(n,m;z)||. Returns L(N), the worst ratio of
    left side to right side (<= 1 means the bound holds), and the arg max n.
    """
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-12:
        raise ValueError("z must be unimodular")
    if abs(delta) > 1:
        raise ValueError("|delta| must be <= 1")
    # T(n,m) = T(n,-N) T(-N,m) = T(n,-N) T(m,-N)^{-1}
    base = running_products(seq, -N, N, z, "szego")
    inv = inv2(base)
    big = 0.0
    for i in range(len(base)):
        big = max(big, float(np.max(spectral_norm(base[i][None] @ inv))))
    zd = z * np.exp(delta)
    worst, where = 0.0, 0
    for n in range(-N, N + 1):
        lhs = float(spectral_norm(transfer(seq, n, 0, zd, "szego")))
        rhs = big * np.exp(2.0 * big * abs(n) * abs(delta))
        if lhs / rhs > worst:
            worst, where = lhs / rhs, n
    return {"L": big, "max_ratio": worst, "argmax_n": where}
