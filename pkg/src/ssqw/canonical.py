"""
Reduction of an admissible walk to the canonical family ``U_{p,r,theta,kappa}``.

The pipeline per segment (maximal run of sites between cut bonds):

1. ``W1`` rotates the ``eta`` frame onto the standard basis.
2. The ``xi`` and ``zeta`` expansions give magnitudes and raw phases; the
   common phase of each dyad is fixed so the ``e2`` coefficient of ``xi1^x``
   and the ``e1`` coefficient of ``xi2^{x+1}`` are real positive.
3. A diagonal gauge ``W2 = (+) diag(e^{i g_x}, e^{i h_x})`` with
   ``g_x - g_{x-1} = -gamma_x`` and ``h_{x+1} - h_x = beta_x`` removes the
   remaining phases, leaving ``theta_x = a_x + g_x - h_{x+1}`` and
   ``kappa_x = alpha_x + g_x - h_{x+1}``.
4. The one leftover constant (``h`` at the origin) is fixed by an anchor
   rule, which makes the parameters unique.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .builders import TWO_PI, GaugeTransform, SSQWParams, apply_gauge, build_canonical
from .errors import CanonicalizationError, NotAdmissible
from .operator import RANK_TOL, WalkOperator, operator_distance
from .structure import AdmissibilityReport, LocalBases, check_admissibility, local_bases

__all__ = [
    "GEOMETRIES",
    "SNAP_TOL",
    "CERT_TOL",
    "RawPhaseData",
    "Anchor",
    "CanonicalSegment",
    "CanonicalForm",
    "build_w1",
    "extract_raw_phases",
    "telescope_phases",
    "choose_anchor",
    "anchor_for_params",
    "segment_walk",
    "segment_tags",
    "canonicalize",
    "canonicalize_segment",
    "reanchor",
    "circle_distance",
    "assemble_segments",
]

GEOMETRIES = ("line", "half-left", "half-right", "finite")
SNAP_TOL = 1e-12
CERT_TOL = 1e-9
_CERT_FAIL = 1e-8


def circle_distance(a, b) -> np.ndarray:
    """Distance on the circle ``R / 2 pi Z``."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def _arg(z) -> np.ndarray:
    return np.angle(z)


def _unit(z) -> np.ndarray:
    m = np.abs(z)
    return np.where(m > 0, z / np.where(m > 0, m, 1.0), 1.0)


@dataclass(frozen=True, eq=False)
class RawPhaseData:
    """
    Magnitudes and phases of one segment ``[lo, hi]`` after ``W1``.

    With the dyad phases fixed, ``W1 xi1^x = e^{i a_x} p_x e1^x + e^{i b_x} q_x e2^{x+1}``,
    ``W1 xi2^{x+1} = e^{i c_x} q_x e1^x + e^{i d_x} p_x e2^{x+1}``,
    ``W1 zeta1^x = e^{i alpha_x} r_x e1^x + e^{i beta_x} s_x e2^x`` and
    ``W1 zeta2^x = e^{i gamma_x} s_x e1^x + e^{i delta_x} r_x e2^x``.
    The reduction leaves ``b = c = 0`` and ``a_x + d_x = pi``.  ``a_left`` is
    the ``a`` of the closed bond ``(lo-1, lo)``.
    """

    lo: int
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    s: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    a_left: float

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.n - 1

    def ampli_residuals(self) -> tuple[float, float]:
        """
        Worst violation of ``a - b = c - d + pi`` (where ``p q != 0``) and of
        ``alpha - beta = gamma - delta + pi`` (where ``r s != 0``).
        """
        m1 = (self.p > 0) & (self.q > 0)
        m2 = (self.r > 0) & (self.s > 0)
        e1 = circle_distance(self.a - self.b, self.c - self.d + np.pi)[m1]
        e2 = circle_distance(self.alpha - self.beta, self.gamma - self.delta + np.pi)[m2]
        return (float(e1.max()) if e1.size else 0.0, float(e2.max()) if e2.size else 0.0)


@dataclass(frozen=True)
class Anchor:
    """Site (or closed bond) ``w``, rule label and the resulting ``ell = h_origin``."""

    w: int
    rule: str
    ell: float
    origin: int


@dataclass(frozen=True, eq=False)
class CanonicalSegment:
    lo: int
    hi: int
    tag: int
    params: SSQWParams
    anchor: Anchor
    gauge: GaugeTransform
    raw: RawPhaseData
    residual: float

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    window: tuple[int, int]
    geometry: str
    segments: list[CanonicalSegment]
    report: AdmissibilityReport | None = None

    @property
    def gauge(self) -> GaugeTransform:
        """Full-window ``W2 W1`` mapping the input onto :meth:`operator`."""
        return GaugeTransform.concat([s.gauge for s in self.segments])

    @property
    def residual(self) -> float:
        return max(s.residual for s in self.segments)

    @property
    def cuts(self) -> list[int]:
        return [s.hi for s in self.segments[:-1]]

    def operator(self) -> WalkOperator:
        return assemble_segments([s.params for s in self.segments])

    def segment_at(self, x: int) -> CanonicalSegment:
        for s in self.segments:
            if s.lo <= x <= s.hi:
                return s
        raise KeyError(x)


def assemble_segments(parts: list[SSQWParams]) -> WalkOperator:
    """Direct sum of canonical walks on adjacent windows."""
    ops = [build_canonical(p) for p in parts]
    lo = ops[0].lo
    diag = np.concatenate([o.diag for o in ops])
    n = diag.shape[0]
    up = np.zeros((n - 1, 2, 2), dtype=np.complex128)
    down = np.zeros_like(up)
    for o in ops:
        k = o.lo - lo
        up[k : k + o.n - 1] = o.up
        down[k : k + o.n - 1] = o.down
    return WalkOperator(lo, diag, up, down, validate=False)


# --------------------------------------------------------------------------- #
# pipeline pieces
# --------------------------------------------------------------------------- #

def build_w1(bases: LocalBases) -> GaugeTransform:
    """``W1 = (+)_x |e1^x><eta1^x| + |e2^x><eta2^x|``."""
    return GaugeTransform(bases.lo, np.conj(np.swapaxes(bases.eta, 1, 2)))


def _magnitudes(u, v) -> tuple[np.ndarray, np.ndarray]:
    """``(|u|, |v|)`` normalized, with values below ``SNAP_TOL`` snapped to 0 and the mate to 1."""
    mu, mv = np.abs(u), np.abs(v)
    nrm = np.hypot(mu, mv)
    mu, mv = mu / nrm, mv / nrm
    zero_u = mu < SNAP_TOL
    zero_v = mv < SNAP_TOL
    mu = np.where(zero_u, 0.0, np.where(zero_v, 1.0, mu))
    mv = np.where(zero_v, 0.0, np.where(zero_u, 1.0, mv))
    return mu, mv


def extract_raw_phases(bases: LocalBases, lo: int | None = None,
                       hi: int | None = None) -> RawPhaseData:
    """
    Raw magnitudes and phases on the segment ``[lo, hi]`` (default: whole window).

    Both outer bonds of the segment are treated as closed.  Free phases
    follow these conventions: ``a_x = 0`` where ``p_x = 0``; where ``s_x = 0``,
    ``gamma_x = 0`` and ``beta_x = alpha_x + delta_x - pi``; where
    ``r_x = 0``, ``alpha_x = 0`` and ``delta_x = gamma_x + beta_x + pi``.
    """
    lo = bases.lo if lo is None else lo
    hi = bases.hi if hi is None else hi
    i0, i1 = lo - bases.lo, hi - bases.lo + 1
    xi1 = bases.xi1[i0:i1]
    xi2 = bases.xi2[i0:i1]
    # zeta in the eta frame, i.e. W1 zeta
    zf = np.conj(np.swapaxes(bases.eta[i0:i1], 1, 2)) @ bases.zeta[i0:i1]
    z1, z2 = zf[:, :, 0], zf[:, :, 1]
    n = i1 - i0

    u, v = xi1[:, 0], xi1[:, 1].copy()
    v[-1] = 0.0
    p, q = _magnitudes(u, v)
    rho1 = np.where(q > 0, _unit(v), 1.0)
    a = np.where(p > 0, _arg(u / rho1), 0.0)

    # xi2^{x+1} for x = lo .. hi-1, and the closed left bond for xi2^lo
    c0, c1 = xi2[1:, 0], xi2[1:, 1]
    rho2_next = np.where(q[:-1] > 0, _unit(c0), c1 / (-np.exp(-1j * a[:-1])))
    c1_lo = xi2[0, 1]
    a_left = float(-_arg(-c1_lo))
    rho2 = np.concatenate([[1.0 + 0j], rho2_next])

    r, s = _magnitudes(z1[:, 0], z1[:, 1])
    w1 = z1 / rho1[:, None]
    w2 = z2 / rho2[:, None]
    alpha = _arg(w1[:, 0])
    beta = _arg(w1[:, 1])
    gamma = _arg(w2[:, 0])
    delta = _arg(w2[:, 1])
    s0 = s == 0
    r0 = r == 0
    gamma = np.where(s0, 0.0, gamma)
    beta = np.where(s0, alpha + delta - np.pi, beta)
    alpha = np.where(r0, 0.0, alpha)
    delta = np.where(r0, gamma + beta + np.pi, delta)

    # d of xi2^{x+1} on bond x; the last bond is closed inside the segment
    d = np.mod(np.pi - a, TWO_PI)
    d[:-1] = np.where(p[:-1] > 0, _arg(c1 / rho2_next), d[:-1])
    b = np.zeros(n)
    c = np.zeros(n)
    return RawPhaseData(lo, p, q, r, s, a, b, c, d, alpha, beta, gamma, delta, a_left)


def _telescope_raw(raw: RawPhaseData, ell: float, origin: int):
    """``g`` on ``lo-1 .. hi`` and ``h`` on ``lo .. hi+1``."""
    o = origin - raw.lo
    if not 0 <= o < raw.n:
        raise ValueError(f"origin {origin} outside [{raw.lo}, {raw.hi}]")
    # g'_{lo} = 0, g'_x - g'_{x-1} = -gamma_x; g'_{lo-1} = gamma_lo
    gp = np.concatenate([[raw.gamma[0]], np.concatenate([[0.0], -np.cumsum(raw.gamma[1:])])])
    g = gp - gp[o + 1]
    hp = np.concatenate([[0.0], np.cumsum(raw.beta)])
    h = hp - hp[o] + ell
    return g, h


def telescope_phases(raw: RawPhaseData, ell: float = 0.0,
                     origin: int | None = None) -> GaugeTransform:
    """
    Diagonal ``W2`` with ``g_origin = 0``, ``h_origin = ell``,
    ``g_x - g_{x-1} = -gamma_x`` and ``h_{x+1} - h_x = beta_x``.
    """
    origin = raw.lo if origin is None else origin
    g, h = _telescope_raw(raw, ell, origin)
    return GaugeTransform.diagonal(raw.lo, g[1:], h[:-1])


def _phases_from(raw: RawPhaseData, g: np.ndarray, h: np.ndarray):
    theta = raw.a + g[1:] - h[1:]
    kappa = raw.alpha + g[1:] - h[1:]
    theta_left = raw.a_left + g[0] - h[0]
    return theta, kappa, theta_left


def _default_origin(lo: int, hi: int) -> int:
    return 0 if lo <= 0 <= hi else lo


def _scan(p: np.ndarray, r: np.ndarray, lo: int, tag: int, origin: int) -> tuple[int, str]:
    """Anchor site and rule from the magnitudes alone."""
    hi = lo + p.shape[0] - 1
    if tag in (2, 4):
        return lo - 1, "cut-left"
    if tag == 3:
        return hi, "cut-right"
    o = origin - lo
    nz_r = np.nonzero(r != 0)[0]
    nz_p = np.nonzero(p != 0)[0]
    for vals, rules in ((nz_r, ("i", "ii")), (nz_p, ("iii", "iv"))):
        right = vals[vals >= o]
        if right.size:
            return lo + int(right[0]), rules[0]
        left = vals[vals < o]
        if left.size:
            return lo + int(left[-1]), rules[1]
    return origin, "v"


def _anchor_value(theta, kappa, theta_left, lo, w, rule) -> float:
    if rule == "cut-left":
        return float(theta_left)
    if rule in ("i", "ii"):
        return float(kappa[w - lo])
    if rule in ("iii", "iv", "cut-right"):
        return float(theta[w - lo])
    return 0.0


def choose_anchor(raw: RawPhaseData, tag: int, origin: int | None = None) -> Anchor:
    """
    Anchor rule for one segment.

    Tag 1 (full line) scans in order: (i) first ``x >= origin`` with
    ``r_x != 0``; (ii) last ``x < origin`` with ``r_x != 0``; (iii), (iv) the
    same for ``p``; (v) ``w = origin``, ``ell = 0``.  Rules i/ii make
    ``kappa_w = 0``, iii/iv make ``theta_w = 0``.  Tags 2 and 4 make the phase
    of the closed left bond vanish ("cut-left"), tag 3 the phase of the
    closed right bond ("cut-right").
    """
    origin = _default_origin(raw.lo, raw.hi) if origin is None else origin
    w, rule = _scan(raw.p, raw.r, raw.lo, tag, origin)
    g, h = _telescope_raw(raw, 0.0, origin)
    theta, kappa, tl = _phases_from(raw, g, h)
    return Anchor(w, rule, _anchor_value(theta, kappa, tl, raw.lo, w, rule), origin)


def anchor_for_params(params: SSQWParams, tag: int, origin: int | None = None) -> tuple[int, str]:
    origin = _default_origin(params.lo, params.hi) if origin is None else origin
    return _scan(params.p, params.r, params.lo, tag, origin)


def reanchor(params: SSQWParams, tag: int, origin: int | None = None) -> SSQWParams:
    """
    Remove the one free constant from ``params`` by the anchor rule of ``tag``.

    Shifting every ``h_x`` by ``c`` turns ``theta_x``, ``kappa_x`` and
    ``theta_left`` into ``theta_x - c`` etc., so this is the fixed point that
    :func:`canonicalize` returns for any walk equivalent to
    ``build_canonical(params)``.
    """
    w, rule = anchor_for_params(params, tag, origin)
    c = _anchor_value(params.theta, params.kappa, params.theta_left, params.lo, w, rule)
    theta = np.where(params.p > 0, params.theta - c, 0.0)
    kappa = np.where(params.r > 0, params.kappa - c, 0.0)
    return params.replace(theta=theta, kappa=kappa, theta_left=params.theta_left - c)


def segment_tags(n_segments: int, geometry: str) -> list[int]:
    if geometry not in GEOMETRIES:
        raise ValueError(f"unknown geometry {geometry!r}; expected one of {GEOMETRIES}")
    tags = [4] * n_segments
    if geometry == "line":
        if n_segments == 1:
            return [1]
        tags[0], tags[-1] = 3, 2
    elif geometry == "half-right":
        tags[-1] = 2
    elif geometry == "half-left":
        tags[0] = 3
    return tags


def segment_walk(U: WalkOperator, report: AdmissibilityReport | None = None,
                 geometry: str = "finite") -> list[tuple[int, int, int]]:
    """
    Maximal runs of sites between cut bonds as ``(lo, hi, tag)``.

    The window edges are closed at desk scale; ``geometry`` declares whether
    the outer segments stand for half-lines (tags 2, 3) or the whole line
    (tag 1).
    """
    report = report or check_admissibility(U)
    bounds = [U.lo - 1] + list(report.cuts) + [U.hi]
    spans = [(a + 1, b) for a, b in zip(bounds, bounds[1:])]
    tags = segment_tags(len(spans), geometry)
    return [(a, b, t) for (a, b), t in zip(spans, tags)]


# --------------------------------------------------------------------------- #
# driver
# --------------------------------------------------------------------------- #

def _canonical_segment(U: WalkOperator, bases: LocalBases, w1: GaugeTransform,
                       lo: int, hi: int, tag: int, origin: int | None) -> CanonicalSegment:
    raw = extract_raw_phases(bases, lo, hi)
    origin = _default_origin(lo, hi) if origin is None or not lo <= origin <= hi else origin
    anchor = choose_anchor(raw, tag, origin)
    g, h = _telescope_raw(raw, anchor.ell, origin)
    theta, kappa, tl = _phases_from(raw, g, h)
    params = SSQWParams(lo, raw.p, raw.r,
                        np.where(raw.p > 0, theta, 0.0),
                        np.where(raw.r > 0, kappa, 0.0), tl)
    gauge = GaugeTransform.diagonal(lo, g[1:], h[:-1]) @ w1.restrict(lo, hi)
    sub = U.restrict(lo, hi, validate=False)
    res = operator_distance(apply_gauge(sub, gauge), build_canonical(params))
    if res > _CERT_FAIL:
        raise CanonicalizationError(
            f"gauge certificate failed on segment [{lo}, {hi}] (residual {res:.2e})"
        )
    return CanonicalSegment(lo, hi, tag, params, anchor, gauge, raw, float(res))


def canonicalize(U: WalkOperator, geometry: str = "finite",
                 origin: int | None = None,
                 report: AdmissibilityReport | None = None) -> CanonicalForm:
    """
    Canonical form of an admissible walk.

    Parameters
    ----------
    U : WalkOperator
        Band-1 unitary with rank <= 1 off-diagonal blocks satisfying
        Assumptions A and B.
    geometry : {"line", "half-left", "half-right", "finite"}
        What the window stands for; decides the case tags and anchors.
    origin : int, optional
        Reference site for the tag-1 anchor scan.  Defaults to 0 when it
        lies in the segment, else the segment's left end.

    Returns
    -------
    CanonicalForm
        One :class:`CanonicalSegment` per segment, each carrying parameters,
        anchor, gauge ``W2 W1`` and the certificate residual
        ``||W U W* - U_{p,r,theta,kappa}||``.

    Raises
    ------
    NotAdmissible
        If any admissibility check fails.
    """
    segment_tags(1, geometry)
    report = report or check_admissibility(U)
    if not report.ok:
        raise NotAdmissible(report)
    bases = local_bases(U, report.ranks.rank_tol if report.ranks else RANK_TOL)
    w1 = build_w1(bases)
    segs = [_canonical_segment(U, bases, w1, lo, hi, tag, origin)
            for lo, hi, tag in segment_walk(U, report, geometry)]
    return CanonicalForm(U.window, geometry, segs, report)


def canonicalize_segment(U: WalkOperator, tag: int, origin: int | None = None) -> CanonicalSegment:
    """
    Canonical data for an operator whose window is a single segment.

    Used when the tag comes from a larger context (e.g. the segment is one
    piece of a walk declared on the line).
    """
    report = check_admissibility(U)
    if not report.ok:
        raise NotAdmissible(report)
    if report.cuts:
        raise CanonicalizationError(f"window {U.window} has interior cuts {report.cuts}")
    bases = local_bases(U, report.ranks.rank_tol)
    return _canonical_segment(U, bases, build_w1(bases), U.lo, U.hi, tag, origin)
