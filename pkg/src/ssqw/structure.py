"""
Admissibility checks and the local bases of the structure theorem.

For an admissible walk every cell carries two orthonormal pairs: ``eta``
(where the off-diagonal blocks land) and ``zeta`` (the coin frame), and

    U = sum_x |xi1^x><zeta1^x| + |xi2^x><zeta2^x|

with ``xi1^x`` in ``C eta1^x + C eta2^{x+1}`` and ``xi2^x`` in
``C eta1^{x-1} + C eta2^x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrame, OrthogonalityFailure, RankViolation
from .operator import RANK_TOL, RankProfile, WalkOperator, check_unitary, rank_profile

__all__ = [
    "ASSUMPTION_A_TOL",
    "ORTHO_TOL",
    "LocalBases",
    "AdmissibilityReport",
    "check_admissibility",
    "extract_eta",
    "extract_zeta_xi",
    "local_bases",
    "reconstruct",
    "phase_normalize",
    "complement",
]

ASSUMPTION_A_TOL = 1e-8
ORTHO_TOL = 1e-8
_LEAD_TOL = 1e-12


def phase_normalize(v: np.ndarray) -> np.ndarray:
    """Rotate each row vector so its first nonzero component is real positive."""
    v = np.asarray(v, dtype=np.complex128)
    lead = np.where(np.abs(v[..., 0]) > _LEAD_TOL, v[..., 0], v[..., 1])
    mag = np.abs(lead)
    ph = np.where(mag > 0, np.conj(lead) / np.where(mag > 0, mag, 1.0), 1.0)
    return v * ph[..., None]


def complement(v: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to each row of ``v`` (phase-normalized)."""
    v = np.asarray(v, dtype=np.complex128)
    return phase_normalize(np.stack([-np.conj(v[..., 1]), np.conj(v[..., 0])], axis=-1))


@dataclass(frozen=True, eq=False)
class LocalBases:
    """
    Per-site frames on ``[lo, lo + n - 1]``.

    ``eta[k]`` and ``zeta[k]`` hold the pair as columns.  ``xi1[k]`` gives
    ``xi1^x`` as coefficients on ``(eta1^x, eta2^{x+1})`` and ``xi2[k]`` gives
    ``xi2^x`` on ``(eta1^{x-1}, eta2^x)``.
    """

    lo: int
    eta: np.ndarray
    zeta: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray

    @property
    def n(self) -> int:
        return self.eta.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.n - 1

    def gram_residual(self) -> float:
        """Largest deviation from orthonormality over all pairs and xi norms."""
        eye = np.eye(2)
        res = 0.0
        for m in (self.eta, self.zeta):
            g = np.conj(np.swapaxes(m, 1, 2)) @ m
            res = max(res, float(np.max(np.abs(g - eye))))
        for c in (self.xi1, self.xi2):
            res = max(res, float(np.max(np.abs(np.linalg.norm(c, axis=1) - 1.0))))
        return res

    def reconstruct(self) -> WalkOperator:
        return reconstruct(self)


def reconstruct(b: LocalBases) -> WalkOperator:
    """Assemble ``sum_x |xi1^x><zeta1^x| + |xi2^x><zeta2^x|`` as a banded operator."""
    e1, e2 = b.eta[:, :, 0], b.eta[:, :, 1]
    z1h, z2h = np.conj(b.zeta[:, :, 0]), np.conj(b.zeta[:, :, 1])
    diag = (b.xi1[:, 0, None, None] * e1[:, :, None] * z1h[:, None, :]
            + b.xi2[:, 1, None, None] * e2[:, :, None] * z2h[:, None, :])
    up = b.xi1[:-1, 1, None, None] * e2[1:, :, None] * z1h[:-1, None, :]
    down = b.xi2[1:, 0, None, None] * e1[:-1, :, None] * z2h[1:, None, :]
    return WalkOperator(b.lo, diag, up, down, validate=False)


@dataclass
class AdmissibilityReport:
    """Outcome of :func:`check_admissibility`; never raises."""

    window: tuple[int, int]
    band_ok: bool
    rank_ok: bool
    unitary_ok: bool
    unitary_residual: float
    assumption_a_ok: bool | None
    assumption_b_ok: bool
    cuts: list[int]
    assumption_a_offenders: list[int] = field(default_factory=list)
    assumption_b_offenders: list[int] = field(default_factory=list)
    rank2_bonds: list[int] = field(default_factory=list)
    ranks: RankProfile | None = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return bool(self.band_ok and self.rank_ok and self.unitary_ok
                     and self.assumption_a_ok and self.assumption_b_ok)

    @property
    def offenders(self) -> dict[str, list[int]]:
        return {
            "rank2_bonds": list(self.rank2_bonds),
            "assumption_a": list(self.assumption_a_offenders),
            "assumption_b": list(self.assumption_b_offenders),
        }

    def summary(self) -> str:
        bits = []
        if not self.band_ok:
            bits.append("band violated")
        if not self.unitary_ok:
            bits.append(f"not unitary (residual {self.unitary_residual:.2e})")
        if not self.rank_ok:
            bits.append(f"rank-2 bonds {self.rank2_bonds}")
        if self.assumption_a_ok is None:
            bits.append("assumption A not evaluated")
        elif not self.assumption_a_ok:
            bits.append(f"assumption A fails at {self.assumption_a_offenders}")
        if not self.assumption_b_ok:
            bits.append(f"assumption B fails at {self.assumption_b_offenders}")
        if self.note:
            bits.append(self.note)
        return "; ".join(bits) if bits else "admissible"

    def as_dict(self) -> dict:
        return {
            "window": list(self.window),
            "band_ok": self.band_ok,
            "rank_ok": self.rank_ok,
            "unitary_ok": self.unitary_ok,
            "unitary_residual": self.unitary_residual,
            "assumption_a_ok": self.assumption_a_ok,
            "assumption_b_ok": self.assumption_b_ok,
            "cuts": list(self.cuts),
            "offenders": self.offenders,
        }


def _closed_bonds(U: WalkOperator, ranks: RankProfile) -> np.ndarray:
    """Boolean per bond ``lo-1 .. hi``: True where nothing crosses."""
    inner = (np.array(ranks.up_rank, dtype=int) == 0) & (np.array(ranks.down_rank, dtype=int) == 0)
    return np.concatenate([[True], inner, [True]])


def _eta_from_ranks(U: WalkOperator, ranks: RankProfile) -> np.ndarray:
    n = U.n
    eta1 = np.zeros((n, 2), dtype=np.complex128)
    eta2 = np.zeros((n, 2), dtype=np.complex128)
    have1 = np.zeros(n, dtype=bool)
    have2 = np.zeros(n, dtype=bool)
    if n > 1:
        # Ran P_x U P_{x+1} (down blocks) and Ran P_{x+1} U P_x (up blocks)
        ud, _, _ = np.linalg.svd(U.down)
        uu, _, _ = np.linalg.svd(U.up)
        have1[:-1] = np.array(ranks.down_rank) == 1
        have2[1:] = np.array(ranks.up_rank) == 1
        eta1[:-1] = ud[:, :, 0]
        eta2[1:] = uu[:, :, 0]
    eta1 = phase_normalize(eta1)
    eta2 = phase_normalize(eta2)
    only2 = ~have1 & have2
    only1 = have1 & ~have2
    neither = ~have1 & ~have2
    eta1[only2] = complement(eta2[only2])
    eta2[only1] = complement(eta1[only1])
    # isolated cells carry no structure; any frame will do
    eta1[neither] = [1.0, 0.0]
    eta2[neither] = [0.0, 1.0]
    return np.stack([eta1, eta2], axis=2)


def extract_eta(U: WalkOperator, rank_tol: float = RANK_TOL) -> np.ndarray:
    """
    Per-site ``eta`` pairs, shape ``(n, 2, 2)`` with the pair as columns.

    ``eta1^x`` spans ``Ran P_x U P_{x+1}`` and ``eta2^x`` spans
    ``Ran P_x U P_{x-1}``; a missing one is the orthogonal complement of the
    other.
    """
    ranks = rank_profile(U, rank_tol)
    if ranks.rank2_bonds:
        raise RankViolation(f"rank-2 off-diagonal block at bond(s) {ranks.rank2_bonds}")
    eta = _eta_from_ranks(U, ranks)
    ov = np.abs(np.sum(np.conj(eta[:, :, 0]) * eta[:, :, 1], axis=1))
    if ov.size and ov.max() > ORTHO_TOL:
        k = int(np.argmax(ov))
        raise OrthogonalityFailure(
            f"eta pair at site {U.lo + k} not orthogonal (overlap {ov[k]:.2e})"
        )
    return eta


def _coefficient_maps(U: WalkOperator, eta: np.ndarray):
    """
    ``A1[k]`` maps cell x to its components on ``(eta1^x, eta2^{x+1})`` and
    ``A2[k]`` to ``(eta1^{x-1}, eta2^x)``.
    """
    n = U.n
    e1h = np.conj(eta[:, :, 0])
    e2h = np.conj(eta[:, :, 1])
    A1 = np.zeros((n, 2, 2), dtype=np.complex128)
    A2 = np.zeros((n, 2, 2), dtype=np.complex128)
    A1[:, 0, :] = np.einsum("ki,kij->kj", e1h, U.diag)
    A2[:, 1, :] = np.einsum("ki,kij->kj", e2h, U.diag)
    if n > 1:
        A1[:-1, 1, :] = np.einsum("ki,kij->kj", e2h[1:], U.up)
        A2[1:, 0, :] = np.einsum("ki,kij->kj", e1h[:-1], U.down)
    return A1, A2


def _assumption_a(U: WalkOperator, eta: np.ndarray) -> list[int]:
    A1, A2 = _coefficient_maps(U, eta)
    s1 = np.linalg.norm(A1, ord=2, axis=(1, 2))
    s2 = np.linalg.norm(A2, ord=2, axis=(1, 2))
    bad = (s1 < ASSUMPTION_A_TOL) | (s2 < ASSUMPTION_A_TOL)
    return [U.lo + int(k) for k in np.nonzero(bad)[0]]


def check_admissibility(U: WalkOperator, rank_tol: float = RANK_TOL) -> AdmissibilityReport:
    """
    Band, rank, unitarity, and Assumptions A and B.

    Assumption B fails at ``x`` when both bonds ``(x-1, x)`` and ``(x, x+1)``
    are cuts; the outer bonds of the window always count as cuts.  Assumption
    A fails at ``x`` when the image of cell ``x`` has no component along one of
    ``C eta1^x + C eta2^{x+1}`` or ``C eta1^{x-1} + C eta2^x`` (the excluded
    one-sided shift forms).  It is left as ``None`` when the eta frames cannot
    be built.
    """
    ranks = rank_profile(U, rank_tol)
    uok, ures = check_unitary(U)
    closed = _closed_bonds(U, ranks)
    b_off = [U.lo + k for k in range(U.n) if closed[k] and closed[k + 1]]
    rep = AdmissibilityReport(
        window=U.window,
        band_ok=True,
        rank_ok=not ranks.rank2_bonds,
        unitary_ok=uok,
        unitary_residual=ures,
        assumption_a_ok=None,
        assumption_b_ok=not b_off,
        cuts=ranks.cuts,
        assumption_b_offenders=b_off,
        rank2_bonds=ranks.rank2_bonds,
        ranks=ranks,
    )
    if ranks.rank2_bonds:
        return rep
    eta = _eta_from_ranks(U, ranks)
    ov = np.abs(np.sum(np.conj(eta[:, :, 0]) * eta[:, :, 1], axis=1))
    if ov.size and ov.max() > ORTHO_TOL:
        rep.note = f"eta frames not orthogonal at site {U.lo + int(np.argmax(ov))}"
        return rep
    a_off = _assumption_a(U, eta)
    rep.assumption_a_ok = not a_off
    rep.assumption_a_offenders = a_off
    return rep


def extract_zeta_xi(U: WalkOperator, eta: np.ndarray) -> LocalBases:
    """
    Coin frames ``zeta`` and the ``xi`` coefficients for given ``eta``.

    ``zeta1^x`` is the unit vector that ``U`` sends into
    ``C eta1^x + C eta2^{x+1}``, ``zeta2^x`` the one sent into
    ``C eta1^{x-1} + C eta2^x``.
    """
    A1, A2 = _coefficient_maps(U, eta)
    _, s1, vh1 = np.linalg.svd(A1)
    _, s2, vh2 = np.linalg.svd(A2)
    if np.any(s1[:, 0] < ASSUMPTION_A_TOL) or np.any(s2[:, 0] < ASSUMPTION_A_TOL):
        bad = np.nonzero((s1[:, 0] < ASSUMPTION_A_TOL) | (s2[:, 0] < ASSUMPTION_A_TOL))[0]
        raise DegenerateFrame(f"no coin direction at site(s) {[U.lo + int(k) for k in bad]}")
    z1 = phase_normalize(np.conj(vh1[:, 0, :]))
    z2 = phase_normalize(np.conj(vh2[:, 0, :]))
    ov = np.abs(np.sum(np.conj(z1) * z2, axis=1))
    if ov.max() > ORTHO_TOL:
        k = int(np.argmax(ov))
        raise DegenerateFrame(f"zeta pair at site {U.lo + k} not orthogonal (overlap {ov[k]:.2e})")
    xi1 = np.einsum("kij,kj->ki", A1, z1)
    xi2 = np.einsum("kij,kj->ki", A2, z2)
    return LocalBases(U.lo, eta, np.stack([z1, z2], axis=2), xi1, xi2)


def local_bases(U: WalkOperator, rank_tol: float = RANK_TOL) -> LocalBases:
    return extract_zeta_xi(U, extract_eta(U, rank_tol))
