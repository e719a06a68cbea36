"""
Chiral symmetry: certificates ``Gamma U Gamma = U*`` and the Suzuki reduction.

A walk ``U = Gamma C`` with both factors self-adjoint unitaries has chiral
symmetry ``Gamma``.  The canonical walk factors this way whenever
``theta = kappa = 0``, with ``Gamma = S`` and ``C`` the coin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .builders import (
    GaugeTransform,
    SSQWParams,
    SuzukiParams,
    apply_gauge,
    build_canonical,
    build_suzuki,
    canonical_factors,
)
from .canonical import (
    Anchor,
    CanonicalForm,
    CanonicalSegment,
    anchor_for_params,
    canonicalize,
    circle_distance,
    segment_tags,
)
from .errors import NegativeRealPart, NotASymmetryCandidate
from .operator import WalkOperator, operator_distance

__all__ = [
    "CERT_TOL",
    "ChiralCertificate",
    "chiral_factorize",
    "verify_chiral",
    "suzuki_reduce",
    "chiral_search",
    "coin_angles",
    "chiral_certificate",
]

CERT_TOL = 1e-10
SEARCH_TOL = 1e-8
_GATE_TOL = 1e-9


def _norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


@dataclass(frozen=True, eq=False)
class ChiralCertificate:
    """``Gamma`` and ``C`` (dense) with ``U = Gamma C``, and the six residuals."""

    gamma: np.ndarray
    coin: np.ndarray
    residuals: dict

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def valid(self) -> bool:
        return self.max_residual < CERT_TOL

    @classmethod
    def from_factors(cls, gamma: np.ndarray, coin: np.ndarray, U) -> "ChiralCertificate":
        u = U.to_dense() if isinstance(U, WalkOperator) else np.asarray(U)
        eye = np.eye(u.shape[0])
        res = {
            "gamma_selfadjoint": _norm(gamma - gamma.conj().T),
            "gamma_involution": _norm(gamma @ gamma - eye),
            "coin_selfadjoint": _norm(coin - coin.conj().T),
            "coin_involution": _norm(coin @ coin - eye),
            "factorization": _norm(gamma @ coin - u),
            "chiral": _norm(gamma @ u @ gamma - u.conj().T),
        }
        return cls(gamma, coin, res)


def chiral_factorize(params: SSQWParams) -> ChiralCertificate | None:
    """
    Certificate ``Gamma = S`` for ``theta = kappa = 0``; None otherwise.

    None only means the sufficient condition does not hold, not that no
    chiral symmetry exists.
    """
    phases = np.concatenate([params.theta, params.kappa, [params.theta_left]])
    if np.any(circle_distance(phases, 0.0) > _GATE_TOL):
        return None
    S, C = canonical_factors(params)
    return ChiralCertificate.from_factors(S, C, build_canonical(params))


def verify_chiral(U: WalkOperator, gamma: np.ndarray) -> float:
    """``||Gamma U Gamma - U*||`` after checking ``Gamma`` is a self-adjoint unitary."""
    g = np.asarray(gamma, dtype=np.complex128)
    if g.shape != (U.dim, U.dim):
        raise NotASymmetryCandidate(f"Gamma has shape {g.shape}, expected {(U.dim, U.dim)}")
    if _norm(g - g.conj().T) > CERT_TOL or _norm(g @ g - np.eye(U.dim)) > CERT_TOL:
        raise NotASymmetryCandidate("Gamma is not a self-adjoint unitary")
    u = U.to_dense()
    return _norm(g @ u @ g - u.conj().T)


def chiral_certificate(U: WalkOperator, geometry: str = "finite") -> ChiralCertificate | None:
    """
    Certificate for a general walk whose canonical form has ``theta = kappa = 0``.

    With ``W U W* = S C`` the pair ``(W* S W, W* C W)`` factors ``U``.
    None means the sufficient condition fails (inconclusive).
    """
    form = canonicalize(U, geometry)
    S = np.zeros((U.dim, U.dim), dtype=np.complex128)
    C = np.zeros_like(S)
    for seg in form.segments:
        pr = seg.params
        phases = np.concatenate([pr.theta, pr.kappa, [pr.theta_left]])
        if np.any(circle_distance(phases, 0.0) > _GATE_TOL):
            return None
        s, c = canonical_factors(pr)
        k = 2 * (seg.lo - U.lo)
        S[k : k + s.shape[0], k : k + s.shape[0]] = s
        C[k : k + s.shape[0], k : k + s.shape[0]] = c
    W = form.gauge.to_dense()
    Wh = W.conj().T
    return ChiralCertificate.from_factors(Wh @ S @ W, Wh @ C @ W, U)


# --------------------------------------------------------------------------- #
# Suzuki walks
# --------------------------------------------------------------------------- #

def suzuki_reduce(sp: SuzukiParams, geometry: str = "finite") -> CanonicalForm:
    """
    Closed-form reduction of Suzuki's walk to ``U_{p,a}`` (``theta = kappa = 0``).

    With ``q_x = e^{i mu_x}|q_x|`` and ``b_x = e^{i nu_x}|b_x|`` the gauge
    ``diag(e^{i g_x}, e^{i h_x})`` with ``h_x = g_x - nu_x`` and
    ``h_{x+1} = g_x + mu_x`` makes every ``q`` and ``b`` real nonnegative.

    Raises
    ------
    NegativeRealPart
        If some ``p_x < 0`` or ``a_x < 0``; the exception carries the result
        of the generic canonicalizer.
    """
    U = build_suzuki(sp)
    if np.any(sp.p < 0) or np.any(sp.a < 0):
        bad = int(np.nonzero((sp.p < 0) | (sp.a < 0))[0][0])
        raise NegativeRealPart(
            canonicalize(U, geometry),
            f"negative p or a at site {sp.lo + bad}; generic canonical form attached",
        )
    mu = np.angle(sp.q)
    nu = np.angle(sp.b)
    # g_lo = 0, h_x = g_x - nu_x, h_{x+1} = g_x + mu_x
    g = np.concatenate([[0.0], np.cumsum(mu[:-1] + nu[1:])])
    h = g - nu
    p = np.clip(sp.p, 0.0, 1.0)
    a = np.clip(sp.a, 0.0, 1.0)
    closed = np.abs(sp.q) <= 1e-12
    closed[-1] = True
    p = np.where(closed, 1.0, p)
    ends = np.nonzero(closed)[0]
    starts = np.concatenate([[0], ends[:-1] + 1])
    tags = segment_tags(len(ends), geometry)
    full = GaugeTransform.diagonal(sp.lo, g, h)
    segs = []
    for i0, i1, tag in zip(starts, ends, tags):
        lo, hi = sp.lo + int(i0), sp.lo + int(i1)
        zeros = np.zeros(i1 - i0 + 1)
        params = SSQWParams(lo, p[i0 : i1 + 1], a[i0 : i1 + 1], zeros, zeros, 0.0)
        w, rule = anchor_for_params(params, tag)
        gauge = full.restrict(lo, hi)
        res = operator_distance(apply_gauge(U.restrict(lo, hi, validate=False), gauge),
                                build_canonical(params))
        origin = 0 if lo <= 0 <= hi else lo
        segs.append(CanonicalSegment(lo, hi, tag, params, Anchor(w, rule, float(h[origin - sp.lo]), origin),
                                     gauge, None, float(res)))
    return CanonicalForm(sp.window, geometry, segs, None)


# --------------------------------------------------------------------------- #
# exploratory search
# --------------------------------------------------------------------------- #

def _pauli(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Per-site ``n . sigma`` with ``n = (sin t cos f, sin t sin f, cos t)``."""
    m = np.empty((t.shape[0], 2, 2), dtype=np.complex128)
    m[:, 0, 0] = np.cos(t)
    m[:, 1, 1] = -np.cos(t)
    m[:, 1, 0] = np.sin(t) * np.exp(1j * f)
    m[:, 0, 1] = np.sin(t) * np.exp(-1j * f)
    return m


def coin_angles(mats: np.ndarray) -> np.ndarray:
    """Inverse of the ``n . sigma`` parametrization for traceless self-adjoint unitaries."""
    mats = np.asarray(mats)
    t = np.arccos(np.clip(mats[:, 0, 0].real, -1.0, 1.0))
    f = np.angle(mats[:, 1, 0])
    return np.concatenate([t, f])


def _chiral_blocks(x: np.ndarray, U: WalkOperator) -> np.ndarray:
    n = U.n
    G = _pauli(x[:n], x[n:])
    hc = lambda a: np.conj(np.swapaxes(a, 1, 2))
    parts = [G @ U.diag @ G - hc(U.diag)]
    if n > 1:
        parts.append(G[1:] @ U.up @ G[:-1] - hc(U.down))
        parts.append(G[:-1] @ U.down @ G[1:] - hc(U.up))
    v = np.concatenate([p.ravel() for p in parts])
    return np.concatenate([v.real, v.imag])


def chiral_search(U: WalkOperator, budget: int = 20000, seed: int = 0,
                  restarts: int = 16, initial: np.ndarray | None = None) -> ChiralCertificate | None:
    """
    Look for a site-diagonal chiral symmetry ``Gamma = (+)_x n_x . sigma``.

    Restarted least squares on ``Gamma U Gamma - U*``, at most ``budget``
    residual evaluations in total.  A returned certificate is checked; None
    is inconclusive.  ``initial`` optionally seeds the first start with
    per-site matrices (e.g. the coin of a ``theta = kappa = 0`` walk).
    """
    if budget <= 0:
        return None
    u = U.to_dense()
    if _norm(u - u.conj().T) < SEARCH_TOL:
        # self-adjoint U: Gamma = I, C = U
        cert = ChiralCertificate.from_factors(np.eye(U.dim), u, u)
        return cert if cert.max_residual < SEARCH_TOL else None
    rng = np.random.default_rng(seed)
    n = U.n
    starts = []
    if initial is not None:
        starts.append(coin_angles(initial))
    while len(starts) < max(restarts, 1):
        starts.append(np.concatenate([rng.uniform(0, np.pi, n), rng.uniform(0, 2 * np.pi, n)]))
    left = int(budget)
    for x0 in starts:
        if left <= 0:
            break
        per = max(1, left // max(1, len(starts)))
        sol = least_squares(_chiral_blocks, x0, args=(U,), max_nfev=per,
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        left -= max(int(sol.nfev), 1)
        G = _pauli(sol.x[:n], sol.x[n:])
        gamma = GaugeTransform(U.lo, G).to_dense()
        cert = ChiralCertificate.from_factors(gamma, gamma @ u, u)
        if cert.max_residual < SEARCH_TOL:
            return cert
    return None
