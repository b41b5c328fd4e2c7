"""Windowed extended CMV matrices and their LM factorization.

A window [n_min, n_max] with n_min even and even length is closed by
replacing alpha_{n_min} and alpha_{n_max+1} with a unimodular number u
(default -1). The L blocks straddling the two edges then decouple and the
window operator is exactly unitary. Operators are stored as five diagonals:
bands[d + 2, i] holds the entry in row i, column i + d.
"""

import numpy as np
from scipy.linalg import solve_banded

from .cocycles import theta_block
from .errors import DimensionMismatch, NotInDisk, NumericalSingularity


class WindowedOperator:
    """Banded operator on the lattice window [n_min, n_max]."""

    def __init__(self, kind, n_min, n_max, bands, alpha=None, closure=None):
        self.kind = kind
        self.n_min = int(n_min)
        self.n_max = int(n_max)
        self.bands = np.asarray(bands, dtype=complex)
        self.bands.setflags(write=False)
        # alpha on [n_min - 1, n_max + 2] after closure, kept for block steps
        self.alpha = alpha
        self.closure = closure

    @property
    def size(self):
        return self.n_max - self.n_min + 1

    @property
    def sites(self):
        return np.arange(self.n_min, self.n_max + 1)

    def index(self, n):
        if not self.n_min <= n <= self.n_max:
            raise IndexError(f"site {n} outside window [{self.n_min}, {self.n_max}]")
        return n - self.n_min

    def dense(self):
        size = self.size
        out = np.zeros((size, size), dtype=complex)
        for d in range(-2, 3):
            i = np.arange(max(0, -d), min(size, size - d))
            out[i, i + d] = self.bands[d + 2, i]
        return out

    def apply(self, psi):
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (self.size,):
            raise DimensionMismatch(f"vector of length {psi.shape} for window of size {self.size}")
        out = np.zeros(self.size, dtype=complex)
        for d in range(-2, 3):
            if d >= 0:
                out[:self.size - d] += self.bands[d + 2, :self.size - d] * psi[d:]
            else:
                out[-d:] += self.bands[d + 2, -d:] * psi[:self.size + d]
        return out

    def adjoint(self):
        size = self.size
        adj = np.zeros_like(self.bands)
        for d in range(-2, 3):
            # (A*)[i, i+d] = conj(A[i+d, i])
            i = np.arange(max(0, -d), min(size, size - d))
            adj[d + 2, i] = np.conj(self.bands[-d + 2, i + d])
        return WindowedOperator(self.kind + "*", self.n_min, self.n_max, adj)

    def banded_lapack(self):
        """Matrix in the (l + u + 1, N) layout used by scipy.linalg.solve_banded."""
        ab = np.zeros((5, self.size), dtype=complex)
        for d in range(-2, 3):
            # ab[2 - d, j] = A[j - d, j] = bands[d + 2, j - d] with row i = j - d
            j = np.arange(max(0, d), min(self.size, self.size + d))
            ab[2 - d, j] = self.bands[d + 2, j - d]
        return ab


def _window_alpha(seq, n_min, n_max, closure):
    if n_min % 2 != 0:
        raise ValueError("window must start at an even site")
    if (n_max - n_min + 1) % 2 != 0 or n_max - n_min + 1 < 4:
        raise ValueError("window length must be even and at least 4")
    alpha = np.array(seq.values(n_min - 1, n_max + 2), dtype=complex)
    if np.any(np.abs(alpha[1:-2]) >= 1.0):
        raise NotInDisk("|alpha| >= 1 inside the window")
    if closure is not None:
        if abs(abs(closure) - 1.0) > 1e-12:
            raise ValueError("closure value must be unimodular")
        alpha[1] = closure
        alpha[-2] = closure
    return alpha


def _rho(alpha):
    return np.sqrt(np.maximum(1.0 - np.abs(alpha) ** 2, 0.0))


def build_cmv(seq, n_min, n_max, closure=-1.0):
    """Five-diagonal extended CMV matrix on [n_min, n_max].

    closure=None gives the plain truncation of the infinite matrix.
    """
    a = _window_alpha(seq, n_min, n_max, closure)
    r = _rho(a)
    size = n_max - n_min + 1
    bands = np.zeros((5, size), dtype=complex)

    def al(n):
        return a[n - n_min + 1]

    def rh(n):
        return r[n - n_min + 1]

    def put(row, col, val):
        d = col - row
        if n_min <= col <= n_max:
            bands[d + 2, row - n_min] = val

    for n in range(n_min, n_max + 1):
        if n % 2 == 0:
            put(n, n - 2, rh(n) * rh(n - 1))
            put(n, n - 1, -rh(n) * al(n - 1))
            put(n, n, -np.conj(al(n + 1)) * al(n))
            put(n, n + 1, -rh(n + 1) * al(n))
        else:
            put(n, n - 1, np.conj(al(n + 1)) * rh(n))
            put(n, n, -np.conj(al(n + 1)) * al(n))
            put(n, n + 1, np.conj(al(n + 2)) * rh(n + 1))
            put(n, n + 2, rh(n + 2) * rh(n + 1))
    return WindowedOperator("E", n_min, n_max, bands, alpha=a, closure=closure)


def _block_operator(kind, a, n_min, n_max, first, closure):
    """Direct sum of Theta(alpha_k) on pairs (k-1, k), k = first, first+2, ..."""
    size = n_max - n_min + 1
    bands = np.zeros((5, size), dtype=complex)
    for k in range(first, n_max + 2, 2):
        t = theta_block(a[k - n_min + 1])
        lo, hi = k - 1, k
        if lo >= n_min:
            bands[2, lo - n_min] = t[0, 0]
        if hi <= n_max:
            bands[2, hi - n_min] = t[1, 1]
        if lo >= n_min and hi <= n_max:
            bands[3, lo - n_min] = t[0, 1]
            bands[1, hi - n_min] = t[1, 0]
    return WindowedOperator(kind, n_min, n_max, bands, alpha=a, closure=closure)


def build_LM(seq, n_min, n_max, closure=-1.0):
    """The factors L = (+) Theta(alpha_{2j}) on (2j-1, 2j) and
    M = (+) Theta(alpha_{2j-1}) on (2j-2, 2j-1), restricted to the window."""
    a = _window_alpha(seq, n_min, n_max, closure)
    L = _block_operator("L", a, n_min, n_max, n_min, closure)
    M = _block_operator("M", a, n_min, n_max, n_min + 1, closure)
    return L, M


def build_position(n_min, n_max):
    """X delta_n = 2 floor(n/2) delta_n."""
    size = n_max - n_min + 1
    bands = np.zeros((5, size), dtype=complex)
    ns = np.arange(n_min, n_max + 1)
    bands[2] = 2 * (ns // 2)
    return WindowedOperator("X", n_min, n_max, bands)


def build_commutator(E):
    """B = E X - X E, entrywise E[i, j] (x_j - x_i)."""
    x = 2 * (E.sites // 2)
    size = E.size
    bands = np.zeros_like(E.bands)
    for d in range(-2, 3):
        i = np.arange(max(0, -d), min(size, size - d))
        bands[d + 2, i] = E.bands[d + 2, i] * (x[i + d] - x[i])
    return WindowedOperator("B", E.n_min, E.n_max, bands)


def resolvent_column(E, z, source, refine=True):
    """Solve (E - z) u = delta_source by banded LU with partial pivoting."""
    z = complex(z)
    if abs(abs(z) - 1.0) < 1e-6:
        raise ValueError("|z| must stay at least 1e-6 away from 1")
    ab = E.banded_lapack()
    ab[2] -= z
    rhs = np.zeros(E.size, dtype=complex)
    rhs[E.index(source)] = 1.0
    try:
        u = solve_banded((2, 2), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalSingularity(str(exc)) from exc
    res = rhs - (E.apply(u) - z * u)
    scale = np.linalg.norm(u)
    if refine and np.linalg.norm(res) > 1e-10 * scale:
        u = u + solve_banded((2, 2), ab, res)
        res = rhs - (E.apply(u) - z * u)
    if not np.all(np.isfinite(u)) or np.linalg.norm(res) > 1e-10 * max(scale, 1.0):
        raise NumericalSingularity("resolvent residual too large")
    return u


def resolvent_columns(E, zs, source):
    """Resolvent columns for many z at once, shape (len(zs), size)."""
    return np.array([resolvent_column(E, z, source) for z in np.atleast_1d(zs)])


def dump_csv(op, path):
    """Write nonzero entries as (row, col, re, im) with lattice indices."""
    from .io import write_csv
    rows = []
    dense = op.dense()
    for i, j in zip(*np.nonzero(dense)):
        rows.append((op.n_min + i, op.n_min + j, dense[i, j].real, dense[i, j].imag))
    write_csv(path, ["row", "col", "re", "im"], rows)
