"""Compiled Jacobi kernels for Hermitian eigenproblems and the SVD.

Both kernels use the same 2x2 complex rotation

    G = [[c, s], [-s * conj(phase), c * conj(phase)]]

which diagonalizes the Hermitian block [[a, g], [conj(g), b]] with
``g = |g| * phase``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _rotation(app, aqq, g):
    ag = abs(g)
    phase = g / ag
    theta = (aqq - app) / (2.0 * ag)
    if theta >= 0.0:
        t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    return c, s, phase


@njit(cache=True, nogil=True)
def jacobi_eigh(h, max_sweeps, rel_tol):
    """Cyclic Jacobi on a complex Hermitian matrix.

    Returns (diagonal, eigenvectors, sweeps_used, off_diagonal_norm).
    Eigenvalues are not sorted here.
    """
    n = h.shape[0]
    a = h.copy()
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += abs(a[i, j]) ** 2
    scale = math.sqrt(scale)
    tiny = 1e-300
    off = 0.0
    sweep = 0
    while sweep < max_sweeps:
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        off = math.sqrt(2.0 * off)
        if off <= rel_tol * scale or off < tiny:
            return a, v, sweep, off
        for p in range(n):
            for q in range(p + 1, n):
                g = a[p, q]
                if abs(g) <= tiny:
                    continue
                c, s, phase = _rotation(a[p, p].real, a[q, q].real, g)
                cph = phase.conjugate()
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * cph * akq
                    a[k, q] = s * akp + c * cph * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * phase * aqk
                    a[q, k] = s * apk + c * phase * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * cph * vkq
                    v[k, q] = s * vkp + c * cph * vkq
        sweep += 1
    off = 0.0
    for p in range(n):
        for q in range(p + 1, n):
            off += abs(a[p, q]) ** 2
    off = math.sqrt(2.0 * off)
    return a, v, sweep, off


@njit(cache=True, nogil=True)
def jacobi_svd(m, max_sweeps, rel_tol):
    """One-sided (Hestenes) Jacobi: orthogonalize the columns of ``m``.

    Returns (rotated columns W = m V, V, sweeps_used, converged_flag).
    """
    n = m.shape[1]
    rows = m.shape[0]
    a = m.copy()
    v = np.eye(n, dtype=np.complex128)
    sweep = 0
    while sweep < max_sweeps:
        rotated = False
        for p in range(n):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0 + 0.0j
                for k in range(rows):
                    alpha += a[k, p].real ** 2 + a[k, p].imag ** 2
                    beta += a[k, q].real ** 2 + a[k, q].imag ** 2
                    gamma += a[k, p].conjugate() * a[k, q]
                if abs(gamma) <= rel_tol * math.sqrt(alpha * beta) or abs(gamma) < 1e-300:
                    continue
                rotated = True
                c, s, phase = _rotation(alpha, beta, gamma)
                cph = phase.conjugate()
                for k in range(rows):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * cph * akq
                    a[k, q] = s * akp + c * cph * akq
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * cph * vkq
                    v[k, q] = s * vkp + c * cph * vkq
        sweep += 1
        if not rotated:
            return a, v, sweep, True
    return a, v, sweep, False
