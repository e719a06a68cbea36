"""
Unitary equivalence of walks under site-diagonal gauges.

Two deciders are provided.  :func:`decide_equivalence` compares canonical
parameters segment by segment; :func:`phase_propagation_oracle` rotates both
walks into their ``eta`` frames and solves for the remaining diagonal phases
directly from the matrix entries, without touching the canonicalizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components, minimum_spanning_tree

from .builders import GaugeTransform, apply_gauge
from .canonical import GEOMETRIES, canonicalize_segment, circle_distance, segment_tags
from .errors import GeometryMismatch, InvariantViolation
from .operator import WalkOperator, operator_distance
from .structure import check_admissibility, extract_eta

__all__ = [
    "MAG_TOL",
    "PHASE_TOL",
    "WITNESS_TOL",
    "Discrepancy",
    "EquivalenceVerdict",
    "decide_equivalence",
    "phase_propagation_oracle",
    "window_spectrum",
    "spectra_match",
]

MAG_TOL = 1e-9
PHASE_TOL = 1e-9
WITNESS_TOL = 1e-8
SPECTRUM_TOL = 1e-8
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Discrepancy:
    """First parameter found to differ; ``site`` is a bond label for cuts."""

    site: int
    parameter: str
    value: float
    other: float

    def __str__(self) -> str:
        return f"site={self.site} parameter={self.parameter} values={self.value!r},{self.other!r}"


@dataclass(frozen=True, eq=False)
class EquivalenceVerdict:
    status: str
    witness: GaugeTransform | None = None
    discrepancy: Discrepancy | None = None
    reason: str = ""
    stage: str = ""
    witness_residual: float | None = None

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"


def window_spectrum(U) -> np.ndarray:
    """Eigenvalues of the dense window matrix sorted by argument in ``[0, 2 pi)``."""
    m = U.to_dense() if isinstance(U, WalkOperator) else np.asarray(U, dtype=np.complex128)
    ev = np.linalg.eigvals(m)
    return ev[np.argsort(np.mod(np.angle(ev), 2 * np.pi), kind="stable")]


def spectra_match(e1: np.ndarray, e2: np.ndarray) -> float:
    """Largest gap of the best one-to-one pairing of two eigenvalue multisets."""
    e1, e2 = np.asarray(e1), np.asarray(e2)
    if e1.shape != e2.shape:
        return float("inf")
    if e1.size == 0:
        return 0.0
    cost = np.abs(e1[:, None] - e2[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def _segments(U: WalkOperator, cuts: list[int]) -> list[tuple[int, int]]:
    bounds = [U.lo - 1] + list(cuts) + [U.hi]
    return [(a + 1, b) for a, b in zip(bounds, bounds[1:])]


def _isolated_witness(A: np.ndarray, B: np.ndarray):
    """
    ``W`` with ``W A W* = B`` for 2x2 unitaries of equal spectrum, else None.
    """
    ea, va = np.linalg.eig(A)
    eb, vb = np.linalg.eig(B)
    cost = np.abs(ea[:, None] - eb[None, :])
    r, c = linear_sum_assignment(cost)
    if cost[r, c].max() > MAG_TOL:
        return None
    if abs(ea[0] - ea[1]) < 1e-7:
        # scalar block: anything commutes
        return np.eye(2, dtype=np.complex128)
    # eigenvectors of a normal matrix with distinct eigenvalues are orthogonal
    va, _ = np.linalg.qr(va)
    vb, _ = np.linalg.qr(vb[:, c[np.argsort(r)]])
    return vb @ np.conj(va.T)


def _compare_segment(s1, s2) -> Discrepancy | None:
    """Largest phase discrepancy between two canonical segments, if any."""
    p1, p2 = s1.params, s2.params
    worst = None
    for name, a, b, mask in (
        ("theta", p1.theta, p2.theta, p1.p > 0),
        ("kappa", p1.kappa, p2.kappa, p1.r > 0),
    ):
        d = np.where(mask, circle_distance(a, b), 0.0)
        k = int(np.argmax(d))
        if d[k] > PHASE_TOL and (worst is None or d[k] > worst[0]):
            worst = (float(d[k]), Discrepancy(p1.lo + k, name, float(a[k]), float(b[k])))
    d = float(circle_distance(p1.theta_left, p2.theta_left))
    if d > PHASE_TOL and (worst is None or d > worst[0]):
        worst = (d, Discrepancy(p1.lo - 1, "theta", p1.theta_left, p2.theta_left))
    return None if worst is None else worst[1]


def _magnitude_gap(s1, s2) -> Discrepancy | None:
    worst = None
    for name in ("p", "r"):
        a, b = getattr(s1.params, name), getattr(s2.params, name)
        d = np.abs(a - b)
        k = int(np.argmax(d))
        if d[k] > MAG_TOL and (worst is None or d[k] > worst[0]):
            worst = (float(d[k]), Discrepancy(s1.lo + k, name, float(a[k]), float(b[k])))
    return None if worst is None else worst[1]


def decide_equivalence(U: WalkOperator, V: WalkOperator, geometry: str = "finite",
                       geometry_other: str | None = None,
                       origin: int | None = None) -> EquivalenceVerdict:
    """
    Decide whether ``V = W U W*`` for a site-diagonal unitary ``W``.

    Parameters
    ----------
    U, V : WalkOperator
        Walks on the same window.
    geometry : str
        Declared geometry of ``U`` (line, half-left, half-right, finite).
    geometry_other : str, optional
        Declared geometry of ``V``; must agree with ``geometry``.

    Returns
    -------
    EquivalenceVerdict
        ``equivalent`` with a verified witness, ``not_equivalent`` with the
        discrepancy found first (cut pattern, then ``p``/``r``, then phases),
        or ``incomparable`` when an input is not admissible.

    Notes
    -----
    Sites isolated between two cuts are single 2x2 blocks and are compared
    through their eigenvalues.
    """
    if geometry_other is not None and geometry_other != geometry:
        raise GeometryMismatch(f"declared geometries differ: {geometry} vs {geometry_other}")
    if geometry not in GEOMETRIES:
        raise GeometryMismatch(f"unknown geometry {geometry!r}")
    if U.window != V.window:
        return EquivalenceVerdict("incomparable", reason=f"windows differ: {U.window} vs {V.window}")
    reps = [check_admissibility(U), check_admissibility(V)]
    for label, rep in zip(("first", "second"), reps):
        if not (rep.band_ok and rep.rank_ok and rep.unitary_ok and rep.assumption_a_ok):
            return EquivalenceVerdict("incomparable", reason=f"{label} operator: {rep.summary()}")
    c1, c2 = set(reps[0].cuts), set(reps[1].cuts)
    if c1 != c2:
        bond = min(c1 ^ c2)
        return EquivalenceVerdict(
            "not_equivalent",
            discrepancy=Discrepancy(bond, "cut", float(bond in c1), float(bond in c2)),
            stage="cuts",
        )
    spans = _segments(U, sorted(c1))
    tags = segment_tags(len(spans), geometry)

    canon = []
    mats = np.zeros((U.n, 2, 2), dtype=np.complex128)
    for (lo, hi), tag in zip(spans, tags):
        if lo == hi:
            A, B = U.block(lo, lo), V.block(lo, lo)
            w = _isolated_witness(A, B)
            if w is None:
                ea, eb = np.sort_complex(np.linalg.eigvals(A)), np.sort_complex(np.linalg.eigvals(B))
                return EquivalenceVerdict(
                    "not_equivalent",
                    discrepancy=Discrepancy(lo, "eigenvalues", float(np.angle(ea[0])), float(np.angle(eb[0]))),
                    stage="magnitudes",
                    reason="isolated block spectra differ",
                )
            mats[lo - U.lo] = w
            continue
        s1 = canonicalize_segment(U.restrict(lo, hi, validate=False), tag, origin)
        s2 = canonicalize_segment(V.restrict(lo, hi, validate=False), tag, origin)
        canon.append((s1, s2))

    # magnitudes first: p and r alone already separate the classes they differ on
    for s1, s2 in canon:
        d = _magnitude_gap(s1, s2)
        if d is not None:
            return EquivalenceVerdict("not_equivalent", discrepancy=d, stage="magnitudes")
    for s1, s2 in canon:
        d = _compare_segment(s1, s2)
        if d is not None:
            return EquivalenceVerdict("not_equivalent", discrepancy=d, stage="phases")
        k0 = s1.lo - U.lo
        mats[k0 : k0 + (s1.hi - s1.lo + 1)] = s2.gauge.adjoint().mats @ s1.gauge.mats

    witness = GaugeTransform(U.lo, mats)
    res = operator_distance(apply_gauge(U, witness), V)
    if res >= WITNESS_TOL:
        raise InvariantViolation(f"witness check failed (residual {res:.2e})")
    gap = spectra_match(window_spectrum(U), window_spectrum(V))
    if gap >= SPECTRUM_TOL:
        raise InvariantViolation(f"equivalent walks with different spectra (gap {gap:.2e})")
    return EquivalenceVerdict("equivalent", witness=witness, stage="phases", witness_residual=res)


def _frame_rotated(U: WalkOperator) -> tuple[WalkOperator, GaugeTransform]:
    eta = extract_eta(U)
    w1 = GaugeTransform(U.lo, np.conj(np.swapaxes(eta, 1, 2)))
    return apply_gauge(U, w1), w1


def phase_propagation_oracle(U: WalkOperator, V: WalkOperator) -> GaugeTransform | None:
    """
    Independent decider: a gauge ``W`` with ``W U W* = V``, or None.

    Both walks are first rotated into their ``eta`` frames, after which any
    equivalence is a diagonal phase gauge ``diag(e^{i phi})``.  Every nonzero
    entry then gives ``phi_i - phi_j = arg V_ij - arg U_ij``.  Phases are
    propagated along a maximum-weight spanning forest of the entry graph (one
    free phase per component, set to 0) and every entry is checked.
    Returns None for inadmissible inputs, mismatched moduli or inconsistent
    constraints.
    """
    if U.window != V.window:
        return None
    for rep in (check_admissibility(U), check_admissibility(V)):
        if not rep.ok:
            return None
    U1, w1 = _frame_rotated(U)
    V1, v1 = _frame_rotated(V)
    a = U1.to_sparse().tocoo()
    b = V1.to_sparse().tocsr()
    dim = U.dim
    bv = np.asarray(b[a.row, a.col]).ravel()
    if np.max(np.abs(np.abs(a.data) - np.abs(bv)), initial=0.0) > MAG_TOL:
        return None
    if abs(np.sum(np.abs(a.data) ** 2) - np.sum(np.abs(b.data) ** 2)) > MAG_TOL:
        return None
    strong = np.abs(a.data) > _EDGE_TOL
    rows, cols = a.row[strong], a.col[strong]
    rel = np.angle(bv[strong]) - np.angle(a.data[strong])
    # heavier entries carry more reliable phases: prefer them in the tree
    wgt = 2.0 - np.abs(a.data[strong])
    off = rows != cols
    graph = coo_matrix((wgt[off], (rows[off], cols[off])), shape=(dim, dim)).tocsr()
    tree = minimum_spanning_tree(graph + graph.T)
    tree = tree + tree.T
    rel_lookup = dict(zip(zip(rows[off].tolist(), cols[off].tolist()), rel[off].tolist()))
    phi = np.zeros(dim)
    _, labels = connected_components(tree, directed=False)
    for comp in np.unique(labels):
        root = int(np.nonzero(labels == comp)[0][0])
        order, pred = breadth_first_order(tree, root, directed=False)
        for node in order[1:]:
            par = pred[node]
            # phi_node - phi_par = rel(node, par) or -(rel(par, node))
            if (node, par) in rel_lookup:
                phi[node] = phi[par] + rel_lookup[node, par]
            else:
                phi[node] = phi[par] - rel_lookup[par, node]
    D = GaugeTransform.diagonal(U.lo, phi[0::2], phi[1::2])
    W = v1.adjoint() @ D @ w1
    if operator_distance(apply_gauge(U, W), V) >= WITNESS_TOL:
        return None
    return W
