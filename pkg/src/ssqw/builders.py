"""
Constructors for walks and gauge transforms.

Every builder works on a finite window ``[lo, hi]`` with the two outer bonds
cut: nothing moves from ``hi`` to ``hi + 1`` and nothing arrives at ``lo``
from ``lo - 1``.  The bond ``(x, x+1)`` is labelled by its left site ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProfile, InvalidParams, WindowMismatch
from .operator import DEFAULT_TOL, WalkOperator

__all__ = [
    "TWO_PI",
    "SSQWParams",
    "KitagawaParams",
    "SuzukiParams",
    "GaugeTransform",
    "Profile",
    "build_canonical",
    "build_kitagawa",
    "build_suzuki",
    "suzuki_factors",
    "canonical_factors",
    "random_params",
    "random_suzuki",
    "random_admissible_walk",
    "apply_gauge",
    "random_gauge",
    "random_unitary",
]

TWO_PI = 2.0 * np.pi
_PARAM_TOL = 1e-12


def _circle_gap(a, b=0.0):
    d = np.mod(np.asarray(a) - b, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def _as_real(name, v, n=None):
    a = np.array(v, dtype=float).reshape(-1)
    if n is not None and a.shape[0] != n:
        raise InvalidParams(f"{name} has {a.shape[0]} entries, expected {n}")
    if not np.all(np.isfinite(a)):
        raise InvalidParams(f"{name} must be finite")
    return a


@dataclass(frozen=True, eq=False)
class SSQWParams:
    """
    Canonical parameters ``(p_x, r_x, theta_x, kappa_x)`` on ``[lo, hi]``.

    ``p_x`` and ``theta_x`` belong to the bond ``(x, x+1)``; ``r_x`` and
    ``kappa_x`` to the coin at site ``x``.  ``theta_left`` is the phase of the
    closed bond ``(lo-1, lo)`` (its ``p`` is 1), which a window has to carry
    when its left edge is not anchored.

    The bond ``(hi, hi+1)`` must be cut, i.e. ``p[-1] == 1``.  Any other bond
    with ``p_x == 1`` is an interior cut.
    """

    lo: int
    p: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    theta_left: float = 0.0

    def __post_init__(self):
        p = _as_real("p", self.p)
        n = p.shape[0]
        if n < 1:
            raise InvalidParams("window must contain at least one site")
        r = _as_real("r", self.r, n)
        theta = _as_real("theta", self.theta, n)
        kappa = _as_real("kappa", self.kappa, n)
        for name, a in (("p", p), ("r", r)):
            if np.any(a < -_PARAM_TOL) or np.any(a > 1 + _PARAM_TOL):
                raise InvalidParams(f"{name} must lie in [0, 1]")
        p = np.clip(p, 0.0, 1.0)
        r = np.clip(r, 0.0, 1.0)
        p[np.abs(p - 1.0) <= _PARAM_TOL] = 1.0
        r[np.abs(r - 1.0) <= _PARAM_TOL] = 1.0
        p[p <= _PARAM_TOL] = 0.0
        r[r <= _PARAM_TOL] = 0.0
        if p[-1] != 1.0:
            raise InvalidParams(
                f"bond ({self.lo + n - 1}, {self.lo + n}) leaves the window; p at the last site must be 1"
            )
        bad = np.nonzero((p == 0) & (_circle_gap(theta) > _PARAM_TOL))[0]
        if bad.size:
            raise InvalidParams(f"theta must be 0 where p = 0 (site {self.lo + int(bad[0])})")
        bad = np.nonzero((r == 0) & (_circle_gap(kappa) > _PARAM_TOL))[0]
        if bad.size:
            raise InvalidParams(f"kappa must be 0 where r = 0 (site {self.lo + int(bad[0])})")
        theta = np.where(p == 0, 0.0, np.mod(theta, TWO_PI))
        kappa = np.where(r == 0, 0.0, np.mod(kappa, TWO_PI))
        tl = float(np.mod(self.theta_left, TWO_PI))
        if not np.isfinite(tl):
            raise InvalidParams("theta_left must be finite")
        for a in (p, r, theta, kappa):
            a.setflags(write=False)
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "theta_left", tl)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.n - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def q(self) -> np.ndarray:
        return np.sqrt(np.clip(1.0 - self.p**2, 0.0, 1.0))

    @property
    def s(self) -> np.ndarray:
        return np.sqrt(np.clip(1.0 - self.r**2, 0.0, 1.0))

    @property
    def cut_after(self) -> np.ndarray:
        """True where bond ``(x, x+1)`` is closed (always at ``hi``)."""
        return self.p == 1.0

    @property
    def cuts(self) -> list[int]:
        """Interior cut bonds."""
        return [self.lo + int(k) for k in np.nonzero(self.cut_after[:-1])[0]]

    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def segment(self, lo: int, hi: int) -> "SSQWParams":
        """Parameters of the sub-window; ``hi`` must sit on a cut bond."""
        if not self.lo <= lo <= hi <= self.hi:
            raise WindowMismatch(f"[{lo}, {hi}] not inside {self.window}")
        a, b = lo - self.lo, hi - self.lo
        tl = self.theta_left if a == 0 else self.theta[a - 1]
        return SSQWParams(lo, self.p[a : b + 1], self.r[a : b + 1],
                          self.theta[a : b + 1], self.kappa[a : b + 1], tl)

    def replace(self, **kw) -> "SSQWParams":
        d = dict(lo=self.lo, p=self.p, r=self.r, theta=self.theta, kappa=self.kappa,
                 theta_left=self.theta_left)
        d.update(kw)
        return SSQWParams(**d)

    @classmethod
    def constant(cls, lo: int, hi: int, p: float, r: float, theta: float = 0.0,
                 kappa: float = 0.0, theta_left: float = 0.0) -> "SSQWParams":
        """Homogeneous walk with the forced boundary cut at ``hi``."""
        n = hi - lo + 1
        pp = np.full(n, float(p))
        tt = np.full(n, float(theta) if p else 0.0)
        pp[-1] = 1.0
        tt[-1] = 0.0
        return cls(lo, pp, np.full(n, float(r)), tt,
                   np.full(n, float(kappa) if r else 0.0), theta_left)


@dataclass(frozen=True)
class KitagawaParams:
    theta1: float
    theta2: float
    lo: int
    hi: int


@dataclass(frozen=True, eq=False)
class SuzukiParams:
    """
    Suzuki data per site: real ``p_x, a_x`` and complex ``q_x, b_x``.

    ``p_x, q_x`` define the shift on the bond ``(x, x+1)``; ``a_x, b_x`` the
    coin ``[[a, conj(b)], [b, -a]]`` at ``x``.  The last bond is closed, so
    ``q[-1]`` must vanish.
    """

    lo: int
    p: np.ndarray
    a: np.ndarray
    q: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        p = _as_real("p", self.p)
        n = p.shape[0]
        a = _as_real("a", self.a, n)
        q = np.array(self.q, dtype=np.complex128).reshape(-1)
        b = np.array(self.b, dtype=np.complex128).reshape(-1)
        if q.shape[0] != n or b.shape[0] != n:
            raise InvalidParams("q and b need one entry per site")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(b))):
            raise InvalidParams("q and b must be finite")
        err = np.abs(p**2 + np.abs(q) ** 2 - 1.0)
        if np.any(err > _PARAM_TOL):
            k = int(np.argmax(err))
            raise InvalidParams(f"p^2 + |q|^2 = 1 violated at site {self.lo + k} (error {err[k]:.2e})")
        err = np.abs(a**2 + np.abs(b) ** 2 - 1.0)
        if np.any(err > _PARAM_TOL):
            k = int(np.argmax(err))
            raise InvalidParams(f"a^2 + |b|^2 = 1 violated at site {self.lo + k} (error {err[k]:.2e})")
        if abs(q[-1]) > _PARAM_TOL:
            raise InvalidParams(
                f"bond ({self.lo + n - 1}, {self.lo + n}) leaves the window; q at the last site must be 0"
            )
        q[-1] = 0.0
        for arr in (p, a, q, b):
            arr.setflags(write=False)
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.n - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """Site-diagonal unitary ``W = (+)_x W_x`` on ``[lo, lo + n - 1]``."""

    lo: int
    mats: np.ndarray

    def __post_init__(self):
        m = np.array(self.mats, dtype=np.complex128)
        if m.ndim != 3 or m.shape[1:] != (2, 2):
            raise InvalidParams(f"gauge blocks must have shape (n, 2, 2), got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "mats", m)

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.n - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @classmethod
    def identity(cls, lo: int, hi: int) -> "GaugeTransform":
        return cls(lo, np.broadcast_to(np.eye(2), (hi - lo + 1, 2, 2)))

    @classmethod
    def diagonal(cls, lo: int, g, h) -> "GaugeTransform":
        """``W_x = diag(exp(i g_x), exp(i h_x))``."""
        g = np.asarray(g, dtype=float)
        h = np.asarray(h, dtype=float)
        m = np.zeros((g.shape[0], 2, 2), dtype=np.complex128)
        m[:, 0, 0] = np.exp(1j * g)
        m[:, 1, 1] = np.exp(1j * h)
        return cls(lo, m)

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all(self.mats[:, 0, 1] == 0) and np.all(self.mats[:, 1, 0] == 0))

    def phases(self) -> tuple[np.ndarray, np.ndarray]:
        """``(g, h)`` for a diagonal transform."""
        if not self.is_diagonal:
            raise ValueError("transform is not diagonal")
        return np.angle(self.mats[:, 0, 0]), np.angle(self.mats[:, 1, 1])

    def unitarity_residual(self) -> float:
        eye = np.eye(2)
        prod = np.conj(np.swapaxes(self.mats, 1, 2)) @ self.mats
        return float(np.max(np.linalg.norm(prod - eye, ord=2, axis=(1, 2)))) if self.n else 0.0

    def adjoint(self) -> "GaugeTransform":
        return GaugeTransform(self.lo, np.conj(np.swapaxes(self.mats, 1, 2)))

    def __matmul__(self, other: "GaugeTransform") -> "GaugeTransform":
        if self.window != other.window:
            raise WindowMismatch(f"{self.window} != {other.window}")
        return GaugeTransform(self.lo, self.mats @ other.mats)

    def restrict(self, lo: int, hi: int) -> "GaugeTransform":
        return GaugeTransform(lo, self.mats[lo - self.lo : hi - self.lo + 1])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((2 * self.n, 2 * self.n), dtype=np.complex128)
        for k in range(self.n):
            out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = self.mats[k]
        return out

    @staticmethod
    def concat(parts: list["GaugeTransform"]) -> "GaugeTransform":
        parts = sorted(parts, key=lambda t: t.lo)
        for a, b in zip(parts, parts[1:]):
            if b.lo != a.hi + 1:
                raise WindowMismatch("gauge pieces must tile a contiguous window")
        return GaugeTransform(parts[0].lo, np.concatenate([t.mats for t in parts]))


# --------------------------------------------------------------------------- #
# canonical family
# --------------------------------------------------------------------------- #

def _canonical_vectors(params: SSQWParams):
    """Kets/bras of the two dyads at every site, plus left-bond data."""
    p, r, q, s = params.p, params.r, params.q, params.s
    et = np.exp(1j * params.theta)
    ek = np.exp(1j * params.kappa)
    # bond x-1 data for sites lo..hi: the closed bond (lo-1, lo) has p = 1
    p_prev = np.concatenate([[1.0], p[:-1]])
    q_prev = np.concatenate([[0.0], q[:-1]])
    et_prev = np.concatenate([[np.exp(1j * params.theta_left)], et[:-1]])
    u1 = np.stack([ek * r, s.astype(complex)], axis=1)
    u2 = np.stack([s.astype(complex), -np.conj(ek) * r], axis=1)
    return p, q, et, p_prev, q_prev, et_prev, u1, u2


def build_canonical(params: SSQWParams, tol: float = DEFAULT_TOL) -> WalkOperator:
    """
    Assemble ``U_{p,r,theta,kappa}`` on the window.

    ``U = sum_x |e^{i theta_x} p_x e1^x + q_x e2^{x+1}><e^{i kappa_x} r_x e1^x + s_x e2^x|
        + |q_{x-1} e1^{x-1} - e^{-i theta_{x-1}} p_{x-1} e2^x><s_x e1^x - e^{-i kappa_x} r_x e2^x|``
    """
    p, q, et, p_prev, q_prev, et_prev, u1, u2 = _canonical_vectors(params)
    n = params.n
    b1 = np.conj(u1)
    b2 = np.conj(u2)
    diag = np.zeros((n, 2, 2), dtype=np.complex128)
    diag[:, 0, :] = (et * p)[:, None] * b1
    diag[:, 1, :] = (-np.conj(et_prev) * p_prev)[:, None] * b2
    up = np.zeros((n - 1, 2, 2), dtype=np.complex128)
    up[:, 1, :] = q[:-1, None] * b1[:-1]
    down = np.zeros((n - 1, 2, 2), dtype=np.complex128)
    down[:, 0, :] = q_prev[1:, None] * b2[1:]
    return WalkOperator(params.lo, diag, up, down, tol=tol)


def canonical_factors(params: SSQWParams) -> tuple[np.ndarray, np.ndarray]:
    """
    Dense ``S`` and ``C`` with ``U_{p,r,theta,kappa} = S C``.

    ``S`` acts on each pair ``(e1^x, e2^{x+1})`` as
    ``[[e^{i theta} p, q], [q, -e^{-i theta} p]]`` and ``C(x)`` is
    ``[[e^{-i kappa} r, s], [s, -e^{i kappa} r]]``.
    """
    n = params.n
    S = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    C = np.zeros_like(S)
    et = np.exp(1j * params.theta)
    ek = np.exp(1j * params.kappa)
    p, q, r, s = params.p, params.q, params.r, params.s
    S[1, 1] = -np.exp(-1j * params.theta_left)
    for k in range(n):
        i1 = 2 * k
        S[i1, i1] = et[k] * p[k]
        if k + 1 < n:
            i2 = 2 * (k + 1) + 1
            S[i1, i2] = q[k]
            S[i2, i1] = q[k]
            S[i2, i2] = -np.conj(et[k]) * p[k]
        C[i1 : i1 + 2, i1 : i1 + 2] = [[np.conj(ek[k]) * r[k], s[k]], [s[k], -ek[k] * r[k]]]
    return S, C


# --------------------------------------------------------------------------- #
# Suzuki and Kitagawa
# --------------------------------------------------------------------------- #

def suzuki_factors(sp: SuzukiParams) -> tuple[np.ndarray, np.ndarray]:
    """Dense shift ``S = [[p, qL], [L*q*, -L*pL]]`` and coin ``C = [[a, b*], [b, -a]]``."""
    n = sp.n
    S = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    C = np.zeros_like(S)
    S[1, 1] = -1.0
    for k in range(n):
        i1 = 2 * k
        S[i1, i1] = sp.p[k]
        if k + 1 < n:
            i2 = 2 * (k + 1) + 1
            S[i1, i2] = sp.q[k]
            S[i2, i1] = np.conj(sp.q[k])
            S[i2, i2] = -sp.p[k]
        C[i1 : i1 + 2, i1 : i1 + 2] = [[sp.a[k], np.conj(sp.b[k])], [sp.b[k], -sp.a[k]]]
    return S, C


def build_suzuki(sp: SuzukiParams, tol: float = DEFAULT_TOL) -> WalkOperator:
    """Banded assembly of Suzuki's ``U = S C`` (left edge closed with ``p = 1``)."""
    n = sp.n
    coin = np.zeros((n, 2, 2), dtype=np.complex128)
    coin[:, 0, 0] = sp.a
    coin[:, 0, 1] = np.conj(sp.b)
    coin[:, 1, 0] = sp.b
    coin[:, 1, 1] = -sp.a
    p_prev = np.concatenate([[1.0], sp.p[:-1]])
    q_prev = np.concatenate([[0.0], sp.q[:-1]])
    diag = np.zeros((n, 2, 2), dtype=np.complex128)
    diag[:, 0, :] = sp.p[:, None] * coin[:, 0, :]
    diag[:, 1, :] = -p_prev[:, None] * coin[:, 1, :]
    up = np.zeros((n - 1, 2, 2), dtype=np.complex128)
    up[:, 1, :] = np.conj(sp.q[:-1])[:, None] * coin[:-1, 0, :]
    down = np.zeros((n - 1, 2, 2), dtype=np.complex128)
    down[:, 0, :] = q_prev[1:, None] * coin[1:, 1, :]
    return WalkOperator(sp.lo, diag, up, down, tol=tol)


def kitagawa_as_suzuki(k: KitagawaParams) -> SuzukiParams:
    """Suzuki data of the sigma_x-conjugated Kitagawa walk, boundary bond closed."""
    n = k.hi - k.lo + 1
    p = np.full(n, np.sin(k.theta1))
    q = np.full(n, np.cos(k.theta1), dtype=complex)
    p[-1], q[-1] = 1.0, 0.0
    return SuzukiParams(k.lo, p, np.full(n, -np.sin(k.theta2)), q,
                        np.full(n, np.cos(k.theta2), dtype=complex))


def build_kitagawa(k: KitagawaParams, conjugated: bool = True,
                   tol: float = DEFAULT_TOL) -> WalkOperator:
    """
    Kitagawa's split-step walk truncated to the window.

    By default the sigma_x-conjugated form
    ``[[sin t1, cos t1 L], [cos t1 L*, -sin t1]] [[-sin t2, cos t2], [cos t2, sin t2]]``
    is returned.  ``conjugated=False`` gives the original ordering of the
    two components, which differs by the site-diagonal gauge ``sigma_x``.
    """
    U = build_suzuki(kitagawa_as_suzuki(k), tol=tol)
    if conjugated:
        return U
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return apply_gauge(U, GaugeTransform(k.lo, np.broadcast_to(sx, (U.n, 2, 2))))


# --------------------------------------------------------------------------- #
# gauges
# --------------------------------------------------------------------------- #

def apply_gauge(U: WalkOperator, W: GaugeTransform) -> WalkOperator:
    """``W U W*`` for a site-diagonal ``W``; the band is preserved."""
    if U.window != W.window:
        raise WindowMismatch(f"operator window {U.window} != gauge window {W.window}")
    m = W.mats
    mh = np.conj(np.swapaxes(m, 1, 2))
    diag = m @ U.diag @ mh
    up = m[1:] @ U.up @ mh[:-1]
    down = m[:-1] @ U.down @ mh[1:]
    return WalkOperator(U.lo, diag, up, down, tol=U.tol, validate=False)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(rng, size: int) -> np.ndarray:
    """``size`` Haar-distributed 2x2 unitaries (QR with the R-diagonal phases removed)."""
    z = (rng.standard_normal((size, 2, 2)) + 1j * rng.standard_normal((size, 2, 2))) / np.sqrt(2)
    qm, rm = np.linalg.qr(z)
    d = np.diagonal(rm, axis1=1, axis2=2)
    return qm * (d / np.abs(d))[:, None, :]


def random_gauge(seed, lo: int, hi: int, diagonal_only: bool = False) -> GaugeTransform:
    rng = _rng(seed)
    n = hi - lo + 1
    if diagonal_only:
        ph = rng.uniform(0.0, TWO_PI, size=(n, 2))
        return GaugeTransform.diagonal(lo, ph[:, 0], ph[:, 1])
    return GaugeTransform(lo, random_unitary(rng, n))


# --------------------------------------------------------------------------- #
# random admissible data
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Profile:
    """
    Degeneracies to inject into random walks.

    Explicit lists name sites (``p_zero``, ``r_zero``, ``r_one``) or interior
    bonds (``cuts``, bond ``x`` joining ``x`` and ``x+1``).  Rates add
    randomly placed degeneracies on top, skipping placements that would
    isolate a site.
    """

    p_zero: tuple[int, ...] = ()
    r_zero: tuple[int, ...] = ()
    r_one: tuple[int, ...] = ()
    cuts: tuple[int, ...] = ()
    p_zero_rate: float = 0.0
    r_zero_rate: float = 0.0
    r_one_rate: float = 0.0
    cut_rate: float = 0.0

    @classmethod
    def mixed(cls, rate: float = 0.15) -> "Profile":
        return cls(p_zero_rate=rate, r_zero_rate=rate, r_one_rate=rate / 2, cut_rate=rate / 2)


def _closed(lo: int, hi: int, cuts: set[int]) -> set[int]:
    """All closed bonds including the two window edges."""
    return cuts | {lo - 1, hi}


def _check_feasible(lo: int, hi: int, cuts: set[int], p_zero: set[int]):
    for c in sorted(cuts):
        if not lo <= c <= hi - 1:
            raise InfeasibleProfile(f"bond {c} is not an interior bond of [{lo}, {hi}]")
    closed = _closed(lo, hi, cuts)
    for x in range(lo, hi + 1):
        if x - 1 in closed and x in closed:
            raise InfeasibleProfile(
                f"site {x} would sit between two cut bonds ({x - 1},{x}) and ({x},{x + 1})"
            )
    clash = p_zero & closed
    if clash:
        raise InfeasibleProfile(f"p = 0 requested on closed bond(s) {sorted(clash)}")


def _degeneracies(rng, lo: int, hi: int, profile: Profile):
    cuts = set(profile.cuts)
    p_zero = set(profile.p_zero)
    _check_feasible(lo, hi, cuts, p_zero)
    if profile.cut_rate > 0:
        for x in range(lo, hi):
            if x in cuts or rng.random() >= profile.cut_rate:
                continue
            trial = cuts | {x}
            closed = _closed(lo, hi, trial)
            if x in p_zero or any(y - 1 in closed and y in closed for y in (x, x + 1)):
                continue
            cuts = trial
    closed = _closed(lo, hi, cuts)
    if profile.p_zero_rate > 0:
        for x in range(lo, hi):
            if x not in closed and rng.random() < profile.p_zero_rate:
                p_zero.add(x)
    r_zero = set(profile.r_zero)
    r_one = set(profile.r_one)
    if r_zero & r_one:
        raise InfeasibleProfile(f"r cannot be both 0 and 1 at {sorted(r_zero & r_one)}")
    for x in range(lo, hi + 1):
        if x in r_zero or x in r_one:
            continue
        u = rng.random()
        if u < profile.r_zero_rate:
            r_zero.add(x)
        elif u < profile.r_zero_rate + profile.r_one_rate:
            r_one.add(x)
    for name, sset in (("p_zero", p_zero), ("r_zero", r_zero), ("r_one", r_one)):
        if any(not lo <= x <= hi for x in sset):
            raise InfeasibleProfile(f"{name} names sites outside [{lo}, {hi}]")
    return cuts, p_zero, r_zero, r_one


def random_params(seed, lo: int, hi: int, profile: Profile | None = None,
                  phases: bool = True) -> SSQWParams:
    """Random canonical parameters satisfying Assumption B (no isolated site)."""
    rng = _rng(seed)
    profile = profile or Profile()
    n = hi - lo + 1
    cuts, p_zero, r_zero, r_one = _degeneracies(rng, lo, hi, profile)
    p = rng.uniform(0.05, 0.95, n)
    r = rng.uniform(0.05, 0.95, n)
    theta = rng.uniform(0, TWO_PI, n) if phases else np.zeros(n)
    kappa = rng.uniform(0, TWO_PI, n) if phases else np.zeros(n)
    theta_left = float(rng.uniform(0, TWO_PI)) if phases else 0.0
    for x in p_zero:
        p[x - lo] = 0.0
        theta[x - lo] = 0.0
    for x in cuts | {hi}:
        p[x - lo] = 1.0
    for x in r_zero:
        r[x - lo] = 0.0
        kappa[x - lo] = 0.0
    for x in r_one:
        r[x - lo] = 1.0
    return SSQWParams(lo, p, r, theta, kappa, theta_left)


def random_suzuki(seed, lo: int, hi: int, cut_rate: float = 0.0,
                  allow_isolated: bool = False, nonnegative: bool = True) -> SuzukiParams:
    """Random Suzuki data with complex ``q, b``; cut bonds get ``p = 1``."""
    rng = _rng(seed)
    n = hi - lo + 1
    p = rng.uniform(0.05, 0.95, n)
    a = rng.uniform(0.05, 0.95, n)
    if not nonnegative:
        p *= rng.choice([-1.0, 1.0], n)
        a *= rng.choice([-1.0, 1.0], n)
    closed = {lo - 1, hi}
    for x in range(lo, hi):
        if rng.random() >= cut_rate:
            continue
        if not allow_isolated and (x - 1 in closed or x + 1 in closed):
            continue
        closed.add(x)
    for x in closed - {lo - 1}:
        p[x - lo] = 1.0
    q = np.sqrt(1 - p**2) * np.exp(1j * rng.uniform(0, TWO_PI, n))
    b = np.sqrt(1 - a**2) * np.exp(1j * rng.uniform(0, TWO_PI, n))
    q[p == 1.0] = 0.0
    return SuzukiParams(lo, p, a, q, b)


def _phase_fixed_frames(rng, size: int) -> np.ndarray:
    """Random 2x2 unitaries whose first column starts with a real positive entry."""
    u = random_unitary(rng, size)
    lead = u[:, 0, 0]
    small = np.abs(lead) < 1e-300
    ph = np.where(small, u[:, 1, 0] / np.abs(u[:, 1, 0]), lead / np.where(small, 1, np.abs(lead)))
    u[:, :, 0] *= np.conj(ph)[:, None]
    return u


def _phased_pair(rng, mag: np.ndarray) -> np.ndarray:
    """Unitaries ``[[e^{i f1} m, e^{i f2} n], [e^{i f3} n, -e^{i(f2+f3-f1)} m]]`` with ``n = sqrt(1-m^2)``."""
    k = mag.shape[0]
    f = rng.uniform(0, TWO_PI, (k, 3))
    comp = np.sqrt(np.clip(1 - mag**2, 0, 1))
    out = np.empty((k, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = np.exp(1j * f[:, 0]) * mag
    out[:, 0, 1] = np.exp(1j * f[:, 1]) * comp
    out[:, 1, 0] = np.exp(1j * f[:, 2]) * comp
    out[:, 1, 1] = -np.exp(1j * (f[:, 1] + f[:, 2] - f[:, 0])) * mag
    return out


def random_admissible_walk(seed, lo: int, hi: int, profile: Profile | None = None,
                           return_params: bool = False):
    """
    Random walk assembled in structure-theorem form
    ``U = sum_x |xi1^x><zeta1^x| + |xi2^x><zeta2^x|``.

    Per site, a random orthonormal pair ``eta`` and a coin frame ``zeta``
    with ``|<eta1, zeta1>| = r_x``; per bond, an orthonormal pair
    ``(xi1^x, xi2^{x+1})`` inside ``C eta1^x + C eta2^{x+1}`` with
    ``|<eta1^x, xi1^x>| = p_x``.  The magnitudes come from
    :func:`random_params`, so the same profile rules apply.
    """
    rng = _rng(seed)
    params = random_params(rng, lo, hi, profile)
    n = params.n
    E = _phase_fixed_frames(rng, n)              # columns eta1, eta2
    R = _phased_pair(rng, params.r)              # zeta in eta coordinates
    Z = E @ R                                    # columns zeta1, zeta2
    B = _phased_pair(rng, params.p)              # bond x: columns xi1^x, xi2^{x+1}
    lead = np.exp(1j * rng.uniform(0, TWO_PI))   # xi2^lo on the closed left bond
    eta1, eta2 = E[:, :, 0], E[:, :, 1]
    z1h, z2h = np.conj(Z[:, :, 0]), np.conj(Z[:, :, 1])
    xi2_self = np.concatenate([[lead], B[:-1, 1, 1]])   # coefficient of eta2^x in xi2^x
    diag = (B[:, 0, 0, None, None] * eta1[:, :, None] * z1h[:, None, :]
            + xi2_self[:, None, None] * eta2[:, :, None] * z2h[:, None, :])
    up = B[:-1, 1, 0, None, None] * eta2[1:, :, None] * z1h[:-1, None, :]
    down = B[:-1, 0, 1, None, None] * eta1[:-1, :, None] * z2h[1:, None, :]
    U = WalkOperator(lo, diag, up, down)
    return (U, params) if return_params else U
