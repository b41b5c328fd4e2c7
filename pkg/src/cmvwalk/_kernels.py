"""Compiled inner loops: one CMV step as two layers of 2x2 blocks."""

import numpy as np
from numba import njit


@njit(cache=True)
def _theta_layer(psi, al, rh, lo, hi, parity, size):
    # pairs (i, i+1) with i % 2 == parity; block Theta(alpha) with alpha = al[i + 2]
    # returns new support bounds
    start = lo - ((lo - parity) % 2)
    if start < 0:
        start = 0 if parity == 0 else -1
    new_lo = size
    new_hi = -1
    i = start
    while i <= hi:
        if i < 0:
            # lone site 0 under the left edge block (only for parity 1)
            a = al[1]
            psi[0] = -a * psi[0]
            if psi[0] != 0:
                new_lo = min(new_lo, 0)
                new_hi = max(new_hi, 0)
        elif i + 1 >= size:
            a = al[size + 1]
            psi[i] = np.conj(a) * psi[i]
            if psi[i] != 0:
                new_lo = min(new_lo, i)
                new_hi = max(new_hi, i)
        else:
            a = al[i + 2]
            r = rh[i + 2]
            x = psi[i]
            y = psi[i + 1]
            psi[i] = np.conj(a) * x + r * y
            psi[i + 1] = r * x - a * y
            new_lo = min(new_lo, i)
            new_hi = max(new_hi, i + 1)
        i += 2
    if new_hi < 0:
        return lo, hi
    return new_lo, new_hi


@njit(cache=True)
def cmv_step(psi, al, rh, lo, hi):
    """psi <- L M psi in place on the closed window; returns the new support."""
    size = psi.shape[0]
    lo, hi = _theta_layer(psi, al, rh, lo, hi, 0, size)
    lo, hi = _theta_layer(psi, al, rh, lo, hi, 1, size)
    return lo, hi


@njit(cache=True)
def cmv_step_inverse(psi, al, rh, lo, hi):
    """psi <- M* L* psi in place (Theta blocks are self-adjoint up to conj)."""
    size = psi.shape[0]
    # L* : blocks Theta(alpha)* = (alpha, rho; rho, -conj(alpha))
    lo, hi = _theta_layer_adj(psi, al, rh, lo, hi, 1, size)
    lo, hi = _theta_layer_adj(psi, al, rh, lo, hi, 0, size)
    return lo, hi


@njit(cache=True)
def _theta_layer_adj(psi, al, rh, lo, hi, parity, size):
    start = lo - ((lo - parity) % 2)
    if start < 0:
        start = 0 if parity == 0 else -1
    new_lo = size
    new_hi = -1
    i = start
    while i <= hi:
        if i < 0:
            a = al[1]
            psi[0] = -np.conj(a) * psi[0]
            if psi[0] != 0:
                new_lo = min(new_lo, 0)
                new_hi = max(new_hi, 0)
        elif i + 1 >= size:
            a = al[size + 1]
            psi[i] = a * psi[i]
            if psi[i] != 0:
                new_lo = min(new_lo, i)
                new_hi = max(new_hi, i)
        else:
            a = al[i + 2]
            r = rh[i + 2]
            x = psi[i]
            y = psi[i + 1]
            psi[i] = a * x + r * y
            psi[i + 1] = r * x - np.conj(a) * y
            new_lo = min(new_lo, i)
            new_hi = max(new_hi, i + 1)
        i += 2
    if new_hi < 0:
        return lo, hi
    return new_lo, new_hi


@njit(cache=True)
def run_moments(psi, al, rh, lo, hi, k_max, powtab, trim, weights, avg):
    """Evolve k_max steps, recording per-step moments and norms.

    powtab[j, i] = |n_i|^{p_j} + 1. weights[m, k] are time-average weights; the
    profile sum_k weights[m, k] |psi_k(n)|^2 accumulates into avg[m, :].
    Edge amplitudes with |psi|^2 < trim are dropped (set to zero).
    Returns (moments[k, j], norms[k], support[k, 2]).
    """
    n_p = powtab.shape[0]
    n_w = weights.shape[0]
    moments = np.zeros((k_max + 1, n_p))
    norms = np.zeros(k_max + 1)
    support = np.zeros((k_max + 1, 2), dtype=np.int64)
    for k in range(k_max + 1):
        if k > 0:
            lo, hi = cmv_step(psi, al, rh, lo, hi)
            if trim > 0.0:
                while lo < hi and (psi[lo].real ** 2 + psi[lo].imag ** 2) < trim:
                    psi[lo] = 0.0
                    lo += 1
                while hi > lo and (psi[hi].real ** 2 + psi[hi].imag ** 2) < trim:
                    psi[hi] = 0.0
                    hi -= 1
        support[k, 0] = lo
        support[k, 1] = hi
        s = 0.0
        for i in range(lo, hi + 1):
            prob = psi[i].real ** 2 + psi[i].imag ** 2
            s += prob
            for j in range(n_p):
                moments[k, j] += prob * powtab[j, i]
            for m in range(n_w):
                avg[m, i] += weights[m, k] * prob
        norms[k] = s
    return moments, norms, support


@njit(cache=True, nogil=True)
def _norm2x2(a00, a01, a10, a11):
    # largest singular value, computed on the entrywise-rescaled matrix
    m = max(abs(a00), abs(a01), abs(a10), abs(a11))
    if m == 0.0:
        return 0.0
    b00, b01, b10, b11 = a00 / m, a01 / m, a10 / m, a11 / m
    p = abs(b00) ** 2 + abs(b10) ** 2
    q = abs(b01) ** 2 + abs(b11) ** 2
    c = abs(b00.conjugate() * b01 + b10.conjugate() * b11)
    return m * np.sqrt((p + q) / 2.0 + np.hypot((p - q) / 2.0, c))


@njit(cache=True, nogil=True)
def _gz_factor(al, n, z, zinv):
    rho = np.sqrt(1.0 - (al.real ** 2 + al.imag ** 2))
    if n % 2 != 0:
        return -np.conj(al) / rho, z / rho, zinv / rho, -al / rho
    return -al / rho, 1.0 / rho + 0j, 1.0 / rho + 0j, -np.conj(al) / rho


@njit(cache=True, nogil=True)
def gz_running_lognorm(alpha, k0, zs, n_max):
    """max_{1 <= n <= n_max} log ||Z(n, 0; z)|| for every z in zs.

    alpha[i] holds alpha_{k0 + i}; the product starts at index 0.
    """
    out = np.empty(zs.shape[0])
    for t in range(zs.shape[0]):
        z = zs[t]
        zinv = 1.0 / z
        a00 = 1.0 + 0j
        a01 = 0.0 + 0j
        a10 = 0.0 + 0j
        a11 = 1.0 + 0j
        logscale = 0.0
        best = -np.inf
        thr = 0.0
        for n in range(n_max):
            y00, y01, y10, y11 = _gz_factor(alpha[n - k0], n, z, zinv)
            b00 = y00 * a00 + y01 * a10
            b01 = y00 * a01 + y01 * a11
            b10 = y10 * a00 + y11 * a10
            b11 = y10 * a01 + y11 * a11
            a00, a01, a10, a11 = b00, b01, b10, b11
            fro2 = (a00.real ** 2 + a00.imag ** 2 + a01.real ** 2 + a01.imag ** 2
                    + a10.real ** 2 + a10.imag ** 2 + a11.real ** 2 + a11.imag ** 2)
            if fro2 <= thr * thr and fro2 <= 1e100:
                continue  # ||A|| <= Frobenius norm: no new maximum possible
            nrm = _norm2x2(a00, a01, a10, a11)
            if nrm > thr:
                best = np.log(nrm) + logscale
                thr = nrm
            if nrm > 1e50:
                a00 /= nrm
                a01 /= nrm
                a10 /= nrm
                a11 /= nrm
                logscale += np.log(nrm)
                thr = np.exp(best - logscale)
        out[t] = best
    return out


@njit(cache=True, nogil=True)
def gz_left_running_lognorm(alpha, k0, zs, n_max):
    """max_{1 <= n <= n_max} log ||Z(-n, 0; z)|| for every z in zs.

    Since |det Y| = 1, ||Z(-n, 0)|| = ||Y(-1) ... Y(-n)||, accumulated by
    right multiplication. alpha[i] holds alpha_{k0 + i} (k0 <= -n_max).
    """
    out = np.empty(zs.shape[0])
    for t in range(zs.shape[0]):
        z = zs[t]
        zinv = 1.0 / z
        a00 = 1.0 + 0j
        a01 = 0.0 + 0j
        a10 = 0.0 + 0j
        a11 = 1.0 + 0j
        logscale = 0.0
        best = -np.inf
        thr = 0.0
        for n in range(1, n_max + 1):
            y00, y01, y10, y11 = _gz_factor(alpha[-n - k0], -n, z, zinv)
            b00 = a00 * y00 + a01 * y10
            b01 = a00 * y01 + a01 * y11
            b10 = a10 * y00 + a11 * y10
            b11 = a10 * y01 + a11 * y11
            a00, a01, a10, a11 = b00, b01, b10, b11
            fro2 = (a00.real ** 2 + a00.imag ** 2 + a01.real ** 2 + a01.imag ** 2
                    + a10.real ** 2 + a10.imag ** 2 + a11.real ** 2 + a11.imag ** 2)
            if fro2 <= thr * thr and fro2 <= 1e100:
                continue  # ||A|| <= Frobenius norm: no new maximum possible
            nrm = _norm2x2(a00, a01, a10, a11)
            if nrm > thr:
                best = np.log(nrm) + logscale
                thr = nrm
            if nrm > 1e50:
                a00 /= nrm
                a01 /= nrm
                a10 /= nrm
                a11 /= nrm
                logscale += np.log(nrm)
                thr = np.exp(best - logscale)
        out[t] = best
    return out
