"""
Banded block-tridiagonal unitaries on a finite window of the lattice.

A window ``[lo, hi]`` carries one two-dimensional cell per site.  The dense
index of component ``i`` (0 or 1) of site ``x`` is ``2 * (x - lo) + i``.
Amplitudes never leave the window: the two boundary bonds carry zero blocks,
so a window is a closed segment in its own right.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from numpy.typing import NDArray

from .errors import BandViolation, NotUnitary, ShapeMismatch, WindowMismatch

__all__ = [
    "DEFAULT_TOL",
    "RANK_TOL",
    "MAX_SITES",
    "StateVector",
    "WalkOperator",
    "RankProfile",
    "apply",
    "adjoint",
    "compose",
    "operator_distance",
    "check_unitary",
    "rank_profile",
    "block_ranks",
]

DEFAULT_TOL = 1e-10
RANK_TOL = 1e-10
MAX_SITES = 4096

ComplexArray = NDArray[np.complex128]


def _frozen(a, shape=None) -> ComplexArray:
    a = np.array(a, dtype=np.complex128)
    if shape is not None and a.shape != shape:
        raise ShapeMismatch(f"expected shape {shape}, got {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Per-site amplitude pairs ``(c1, c2)`` on the window starting at ``lo``."""

    lo: int
    amps: ComplexArray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128)
        if amps.ndim != 2 or amps.shape[1] != 2:
            raise ShapeMismatch(f"amplitudes must have shape (n, 2), got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def n(self) -> int:
        return self.amps.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.n - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def to_vector(self) -> ComplexArray:
        return self.amps.reshape(-1).copy()

    @classmethod
    def from_vector(cls, lo: int, v) -> "StateVector":
        return cls(lo, np.asarray(v, dtype=np.complex128).reshape(-1, 2))

    @classmethod
    def basis(cls, lo: int, hi: int, site: int, component: int) -> "StateVector":
        """The unit vector e_{component+1}^{site}."""
        amps = np.zeros((hi - lo + 1, 2), dtype=np.complex128)
        amps[site - lo, component] = 1.0
        return cls(lo, amps)

    @classmethod
    def zeros(cls, lo: int, hi: int) -> "StateVector":
        return cls(lo, np.zeros((hi - lo + 1, 2), dtype=np.complex128))

    def support(self) -> tuple[int, int] | None:
        """Smallest and largest site carrying a nonzero amplitude."""
        nz = np.nonzero(np.any(self.amps != 0, axis=1))[0]
        if nz.size == 0:
            return None
        return (self.lo + int(nz[0]), self.lo + int(nz[-1]))

    def padded(self, lo: int, hi: int) -> "StateVector":
        if lo > self.lo or hi < self.hi:
            raise WindowMismatch("padding cannot shrink the window")
        amps = np.zeros((hi - lo + 1, 2), dtype=np.complex128)
        amps[self.lo - lo : self.lo - lo + self.n] = self.amps
        return StateVector(lo, amps)


@dataclass(frozen=True, eq=False)
class WalkOperator:
    """
    Block-tridiagonal operator on the window ``[lo, lo + n - 1]``.

    Parameters
    ----------
    lo : int
        First site of the window.
    diag : array (n, 2, 2)
        ``diag[k] = P_x U P_x`` with ``x = lo + k``.
    up : array (n-1, 2, 2)
        ``up[k] = P_{x+1} U P_x`` (amplitude moving right).
    down : array (n-1, 2, 2)
        ``down[k] = P_x U P_{x+1}`` (amplitude moving left).
    tol : float
        Unitarity tolerance.
    validate : bool
        Check unitarity on construction and raise ``NotUnitary`` on failure.
        Pass ``False`` to hold deliberately broken operators for diagnostics.

    The band condition holds by construction: there is no storage for
    blocks farther than one site from the diagonal.
    """

    lo: int
    diag: ComplexArray
    up: ComplexArray
    down: ComplexArray
    tol: float = DEFAULT_TOL
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        diag = np.array(self.diag, dtype=np.complex128)
        if diag.ndim != 3 or diag.shape[1:] != (2, 2) or diag.shape[0] < 1:
            raise ShapeMismatch(f"diag must have shape (n, 2, 2), got {diag.shape}")
        n = diag.shape[0]
        if n > MAX_SITES:
            raise ShapeMismatch(f"window of {n} sites exceeds the {MAX_SITES}-site cap")
        up = _frozen(self.up, (n - 1, 2, 2))
        down = _frozen(self.down, (n - 1, 2, 2))
        diag.setflags(write=False)
        for a in (diag, up, down):
            if not np.all(np.isfinite(a)):
                raise ValueError("operator blocks must be finite")
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)
        if self.validate:
            ok, res = check_unitary(self, exact=False)
            if not ok:
                raise NotUnitary(f"unitarity residual {res:.3e} exceeds tol {self.tol:.1e}")

    # -- geometry -----------------------------------------------------------
    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def hi(self) -> int:
        return self.lo + self.n - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def block(self, target: int, source: int) -> ComplexArray:
        """``P_target U P_source`` as a 2x2 array (zero outside the band)."""
        for s in (target, source):
            if not self.lo <= s <= self.hi:
                raise WindowMismatch(f"site {s} outside window {self.window}")
        k = source - self.lo
        d = target - source
        if d == 0:
            return self.diag[k].copy()
        if d == 1:
            return self.up[k].copy()
        if d == -1:
            return self.down[k - 1].copy()
        return np.zeros((2, 2), dtype=np.complex128)

    @property
    def blocks(self) -> dict[tuple[int, int], ComplexArray]:
        """Mapping ``(target, source) -> block`` over all stored blocks."""
        out = {}
        for k in range(self.n):
            x = self.lo + k
            out[(x, x)] = self.diag[k]
            if k < self.n - 1:
                out[(x + 1, x)] = self.up[k]
                out[(x, x + 1)] = self.down[k]
        return out

    # -- conversions --------------------------------------------------------
    def to_dense(self) -> ComplexArray:
        n = self.n
        m = np.zeros((2 * n, 2 * n), dtype=np.complex128)
        for k in range(n):
            m[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = self.diag[k]
        for k in range(n - 1):
            m[2 * k + 2 : 2 * k + 4, 2 * k : 2 * k + 2] = self.up[k]
            m[2 * k : 2 * k + 2, 2 * k + 2 : 2 * k + 4] = self.down[k]
        return m

    def to_sparse(self) -> sp.csr_matrix:
        n = self.n
        rows, cols, vals = [], [], []
        base = 2 * np.arange(n)
        ii, jj = np.meshgrid([0, 1], [0, 1], indexing="ij")
        for arr, dt, ds, count in (
            (self.diag, 0, 0, n),
            (self.up, 2, 0, n - 1),
            (self.down, 0, 2, n - 1),
        ):
            if count == 0:
                continue
            b = base[:count]
            r = b[:, None, None] + dt + ii[None]
            c = b[:, None, None] + ds + jj[None]
            rows.append(r.ravel())
            cols.append(c.ravel())
            vals.append(arr.ravel())
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(2 * n, 2 * n),
        )

    @classmethod
    def from_dense(cls, m, lo: int = 0, tol: float = DEFAULT_TOL,
                   band_tol: float = 1e-12, validate: bool = True) -> "WalkOperator":
        """Re-ingest a dense window matrix; entries outside the band must vanish."""
        m = np.asarray(m, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ShapeMismatch(f"expected a square matrix of even size, got {m.shape}")
        n = m.shape[0] // 2
        blocks = m.reshape(n, 2, n, 2).transpose(0, 2, 1, 3)  # [target, source]
        t, s = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        outside = np.abs(t - s) > 1
        if np.any(outside):
            worst = float(np.max(np.abs(blocks[outside])))
            if worst > band_tol * max(1.0, float(np.max(np.abs(m)))):
                bad = np.argwhere(outside & (np.max(np.abs(blocks), axis=(2, 3)) > band_tol))
                tt, ss = bad[0]
                raise BandViolation(
                    f"nonzero block at (target={lo + tt}, source={lo + ss}), |entry| = {worst:.3e}"
                )
        k = np.arange(n)
        return cls(
            lo,
            blocks[k, k],
            blocks[k[1:], k[:-1]],
            blocks[k[:-1], k[1:]],
            tol=tol,
            validate=validate,
        )

    @classmethod
    def from_blocks(cls, blocks: dict, lo: int, hi: int, tol: float = DEFAULT_TOL,
                    validate: bool = True) -> "WalkOperator":
        n = hi - lo + 1
        diag = np.zeros((n, 2, 2), dtype=np.complex128)
        up = np.zeros((max(n - 1, 0), 2, 2), dtype=np.complex128)
        down = np.zeros_like(up)
        for (t, s), b in blocks.items():
            if not (lo <= t <= hi and lo <= s <= hi):
                raise BandViolation(f"block ({t}, {s}) outside window [{lo}, {hi}]")
            d = t - s
            if d == 0:
                diag[s - lo] = b
            elif d == 1:
                up[s - lo] = b
            elif d == -1:
                down[t - lo] = b
            else:
                if np.any(np.asarray(b) != 0):
                    raise BandViolation(f"block ({t}, {s}) violates the band condition")
        return cls(lo, diag, up, down, tol=tol, validate=validate)

    @classmethod
    def identity(cls, lo: int, hi: int) -> "WalkOperator":
        n = hi - lo + 1
        z = np.zeros((n - 1, 2, 2))
        return cls(lo, np.broadcast_to(np.eye(2), (n, 2, 2)), z, z)

    def restrict(self, lo: int, hi: int, validate: bool = True) -> "WalkOperator":
        """``P U P`` for the sub-window; unitary only when both outer bonds are cuts."""
        if not (self.lo <= lo <= hi <= self.hi):
            raise WindowMismatch(f"[{lo}, {hi}] not inside {self.window}")
        a, b = lo - self.lo, hi - self.lo
        return WalkOperator(lo, self.diag[a : b + 1], self.up[a:b], self.down[a:b],
                            tol=self.tol, validate=validate)

    def with_blocks(self, diag=None, up=None, down=None, validate: bool = True) -> "WalkOperator":
        return WalkOperator(
            self.lo,
            self.diag if diag is None else diag,
            self.up if up is None else up,
            self.down if down is None else down,
            tol=self.tol,
            validate=validate,
        )

    def apply(self, psi: StateVector) -> StateVector:
        return apply(self, psi)

    def adjoint(self) -> "WalkOperator":
        return adjoint(self)


def _hc(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def apply(U: WalkOperator, psi: StateVector) -> StateVector:
    """Return ``U psi``."""
    if psi.window != U.window:
        raise WindowMismatch(f"state window {psi.window} != operator window {U.window}")
    c = psi.amps
    out = np.einsum("kij,kj->ki", U.diag, c)
    if U.n > 1:
        out[1:] += np.einsum("kij,kj->ki", U.up, c[:-1])
        out[:-1] += np.einsum("kij,kj->ki", U.down, c[1:])
    return StateVector(U.lo, out)


def adjoint(U: WalkOperator) -> WalkOperator:
    """Conjugate transpose; the up and down bands trade places."""
    return WalkOperator(U.lo, _hc(U.diag), _hc(U.down), _hc(U.up), tol=U.tol, validate=False)


def compose(A, B: WalkOperator) -> ComplexArray:
    """
    Dense product ``A B`` on the window.

    The product of two band-1 operators is band-2 in general, so the result
    is a dense matrix rather than a ``WalkOperator``.
    """
    if isinstance(A, WalkOperator):
        if A.window != B.window:
            raise WindowMismatch(f"{A.window} != {B.window}")
        return (A.to_sparse() @ B.to_sparse()).toarray()
    A = np.asarray(A, dtype=np.complex128)
    if A.shape != (B.dim, B.dim):
        raise WindowMismatch(f"matrix of shape {A.shape} does not act on window {B.window}")
    return A @ B.to_dense()


def _gram_norm(diag, up, down, minus_identity: bool = False,
               bound_below: float | None = None) -> float:
    """
    Spectral norm of ``A*A`` (or ``A*A - I``) for banded blocks, without
    leaving block form: ``A*A`` is Hermitian with scalar bandwidth 5.

    With ``bound_below`` set, a row-sum upper bound is returned instead
    whenever it already lies below that value.
    """
    n = diag.shape[0]
    dh = _hc(diag)
    g0 = dh @ diag
    g1 = np.zeros((max(n - 1, 0), 2, 2), dtype=np.complex128)
    g2 = np.zeros((max(n - 2, 0), 2, 2), dtype=np.complex128)
    if n > 1:
        g0[1:] += _hc(down) @ down
        g0[:-1] += _hc(up) @ up
        # block (s+1, s) and (s+2, s) of A*A
        g1 = _hc(down) @ diag[:-1] + dh[1:] @ up
        g2 = _hc(down[1:]) @ up[:-1]
    if minus_identity:
        g0 = g0 - np.eye(2)
    ab = np.zeros((6, 2 * n), dtype=np.complex128)
    for k, g in ((0, g0), (1, g1), (2, g2)):
        m = g.shape[0]
        if m == 0:
            continue
        for i in (0, 1):
            for j in (0, 1):
                off = 2 * k + i - j
                if off < 0:
                    continue
                ab[off, 2 * np.arange(m) + j] = g[:, i, j]
    ab = ab[: min(6, 2 * n)]
    if not np.any(ab):
        return 0.0
    if bound_below is not None:
        # the max row sum bounds the spectral norm of a Hermitian matrix
        mag = np.abs(ab)
        rows = mag[0].copy()
        for off in range(1, ab.shape[0]):
            rows[off:] += mag[off, : ab.shape[1] - off]
            rows += mag[off]
        bound = float(rows.max())
        if bound <= bound_below:
            return bound
    ev = scipy.linalg.eigvals_banded(ab, lower=True)
    return float(np.max(np.abs(ev)))


def operator_distance(A, B) -> float:
    """
    Spectral norm (largest singular value) of ``A - B``.

    Accepts two dense matrices of equal shape, or two ``WalkOperator``s on
    the same window (computed without densifying).
    """
    if isinstance(A, WalkOperator) and isinstance(B, WalkOperator):
        if A.window != B.window:
            raise WindowMismatch(f"{A.window} != {B.window}")
        return float(np.sqrt(max(_gram_norm(A.diag - B.diag, A.up - B.up, A.down - B.down), 0.0)))
    if isinstance(A, WalkOperator):
        A = A.to_dense()
    if isinstance(B, WalkOperator):
        B = B.to_dense()
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    if A.shape != B.shape:
        raise ShapeMismatch(f"{A.shape} != {B.shape}")
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A - B, 2))


def check_unitary(U: WalkOperator, exact: bool = True) -> tuple[bool, float]:
    """
    Return ``(ok, residual)`` with ``residual = ||U*U - I||``.

    With ``exact=False`` the residual may be replaced by a cheaper upper
    bound when that bound already passes.
    """
    r = _gram_norm(U.diag, U.up, U.down, minus_identity=True,
                   bound_below=None if exact else U.tol)
    return r <= U.tol, r


def block_ranks(blocks: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Numerical rank of each 2x2 block: singular values above ``rank_tol * max(1, ||block||)``."""
    if blocks.shape[0] == 0:
        return np.zeros(0, dtype=int)
    sv = np.linalg.svd(blocks, compute_uv=False)
    thresh = rank_tol * np.maximum(1.0, sv[:, 0])
    return np.sum(sv > thresh[:, None], axis=1).astype(int)


@dataclass(frozen=True)
class RankProfile:
    """
    Ranks of the off-diagonal blocks per bond ``(x, x+1)``, ``x = lo .. hi-1``.

    ``up_rank[k] = rank P_{x+1} U P_x`` and ``down_rank[k] = rank P_x U P_{x+1}``.
    """

    lo: int
    up_rank: tuple[int, ...]
    down_rank: tuple[int, ...]
    rank_tol: float = RANK_TOL

    @property
    def bonds(self) -> list[int]:
        return [self.lo + k for k in range(len(self.up_rank))]

    @property
    def cuts(self) -> list[int]:
        """Bonds ``x`` (meaning ``(x, x+1)``) where both ranks vanish."""
        return [self.lo + k for k, (u, d) in enumerate(zip(self.up_rank, self.down_rank))
                if u == 0 and d == 0]

    @property
    def rank2_bonds(self) -> list[int]:
        return [self.lo + k for k, (u, d) in enumerate(zip(self.up_rank, self.down_rank))
                if u > 1 or d > 1]

    @property
    def ok(self) -> bool:
        return not self.rank2_bonds

    def same_ranks(self, other: "RankProfile") -> bool:
        return (self.lo, self.up_rank, self.down_rank) == (other.lo, other.up_rank, other.down_rank)


def rank_profile(U: WalkOperator, rank_tol: float = RANK_TOL) -> RankProfile:
    return RankProfile(
        U.lo,
        tuple(int(v) for v in block_ranks(U.up, rank_tol)),
        tuple(int(v) for v in block_ranks(U.down, rank_tol)),
        rank_tol,
    )
