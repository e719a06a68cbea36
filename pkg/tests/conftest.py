"""Shared fixtures and independent dense oracles."""

from __future__ import annotations

import numpy as np
import pytest


def e(lo: int, hi: int, x: int, i: int) -> np.ndarray:
    """Dense basis vector ``e_i^x`` on ``[lo, hi]`` (``i`` in {1, 2}); zero outside."""
    v = np.zeros(2 * (hi - lo + 1), dtype=complex)
    if lo <= x <= hi:
        v[2 * (x - lo) + i - 1] = 1.0
    return v


def dyad(ket: np.ndarray, bra: np.ndarray) -> np.ndarray:
    return np.outer(ket, np.conj(bra))


def canonical_dyad_oracle(lo, p, r, theta, kappa, theta_left=0.0) -> np.ndarray:
    """Dense accumulation of the two dyads per site, written out term by term."""
    n = len(p)
    hi = lo + n - 1
    p = np.asarray(p, float)
    r = np.asarray(r, float)
    q = np.sqrt(1 - p**2)
    s = np.sqrt(1 - r**2)
    U = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(n):
        x = lo + k
        ket1 = np.exp(1j * theta[k]) * p[k] * e(lo, hi, x, 1) + q[k] * e(lo, hi, x + 1, 2)
        bra1 = np.exp(1j * kappa[k]) * r[k] * e(lo, hi, x, 1) + s[k] * e(lo, hi, x, 2)
        if k == 0:
            pl, ql, tl = 1.0, 0.0, theta_left
        else:
            pl, ql, tl = p[k - 1], q[k - 1], theta[k - 1]
        ket2 = ql * e(lo, hi, x - 1, 1) - np.exp(-1j * tl) * pl * e(lo, hi, x, 2)
        bra2 = s[k] * e(lo, hi, x, 1) - np.exp(-1j * kappa[k]) * r[k] * e(lo, hi, x, 2)
        U += dyad(ket1, bra1) + dyad(ket2, bra2)
    return U


def suzuki_dyad_oracle(lo, p, a, q, b) -> np.ndarray:
    """
    Suzuki's walk written as a dyad sum in the ``(a, b, p, q)`` naming:
    ``|p e1^x + conj(q) e2^{x+1}><a e1^x + b e2^x| + |q_{x-1} e1^{x-1} - p_{x-1} e2^x><conj(b) e1^x - a e2^x|``.
    """
    n = len(p)
    hi = lo + n - 1
    U = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(n):
        x = lo + k
        ket1 = p[k] * e(lo, hi, x, 1) + np.conj(q[k]) * e(lo, hi, x + 1, 2)
        bra1 = a[k] * e(lo, hi, x, 1) + b[k] * e(lo, hi, x, 2)
        pl, ql = (1.0, 0.0) if k == 0 else (p[k - 1], q[k - 1])
        ket2 = ql * e(lo, hi, x - 1, 1) - pl * e(lo, hi, x, 2)
        bra2 = np.conj(b[k]) * e(lo, hi, x, 1) - a[k] * e(lo, hi, x, 2)
        U += dyad(ket1, bra1) + dyad(ket2, bra2)
    return U


def kitagawa_ring(theta1: float, theta2: float, n: int) -> np.ndarray:
    """
    Kitagawa's walk on a periodic ring of ``n`` sites, sigma_x-conjugated:
    shift ``[[sin t1, cos t1 L], [cos t1 L*, -sin t1]]`` after the coin
    ``[[-sin t2, cos t2], [cos t2, sin t2]]`` with ``(L psi)(x) = psi(x+1)``.
    """
    L = np.roll(np.eye(n), 1, axis=1)
    s1, c1 = np.sin(theta1), np.cos(theta1)
    S = np.block([[s1 * np.eye(n), c1 * L], [c1 * L.T, -s1 * np.eye(n)]])
    coin = np.array([[-np.sin(theta2), np.cos(theta2)], [np.cos(theta2), np.sin(theta2)]])
    C = np.kron(coin, np.eye(n))
    # reorder (component, site) to (site, component)
    perm = np.array([c * n + x for x in range(n) for c in range(2)])
    M = S @ C
    return M[np.ix_(perm, perm)]


def dense_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.svd(a - b, compute_uv=False)[0]) if a.size else 0.0


def circ(a, b) -> np.ndarray:
    d = np.mod(np.asarray(a) - np.asarray(b), 2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
