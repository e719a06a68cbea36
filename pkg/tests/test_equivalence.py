import numpy as np
import pytest

from ssqw.builders import (
    KitagawaParams,
    Profile,
    SSQWParams,
    apply_gauge,
    build_canonical,
    build_kitagawa,
    random_admissible_walk,
    random_gauge,
    random_params,
)
from ssqw.canonical import anchor_for_params
from ssqw.equivalence import (
    decide_equivalence,
    phase_propagation_oracle,
    spectra_match,
    window_spectrum,
)
from ssqw.errors import GeometryMismatch
from ssqw.operator import WalkOperator, operator_distance


def _perturb_phase(pr: SSQWParams, rng, which: str, tag: int = 4):
    """Shift one theta or kappa by 0.1 at an eligible site other than the anchor."""
    w, _ = anchor_for_params(pr, tag)
    mags = pr.p if which == "theta" else pr.r
    ok = np.nonzero(mags > 0)[0]
    if which == "theta":
        ok = ok[ok < pr.n - 1]
    ok = ok[pr.lo + ok != w]
    k = int(rng.choice(ok))
    vals = getattr(pr, which).copy()
    vals[k] += 0.1
    return pr.replace(**{which: vals}), pr.lo + k


@pytest.mark.parametrize("seed", range(10))
def test_gauge_conjugate_is_equivalent(seed):
    pr = random_params(seed, -4, 12, Profile.mixed(0.2))
    U = build_canonical(pr)
    W = random_gauge(seed, -4, 12)
    V = apply_gauge(U, W)
    verdict = decide_equivalence(U, V, ["line", "finite"][seed % 2])
    assert verdict.equivalent and verdict.witness_residual < 1e-8
    assert operator_distance(apply_gauge(U, verdict.witness), V) < 1e-8


@pytest.mark.parametrize("which", ["theta", "kappa"])
def test_single_phase_shift_detected(which):
    rng = np.random.default_rng(7)
    for trial in range(20):
        pr = random_params(trial, 0, 11)
        pr2, site = _perturb_phase(pr, rng, which)
        V = apply_gauge(build_canonical(pr2), random_gauge(trial, 0, 11))
        verdict = decide_equivalence(build_canonical(pr), V, "finite")
        assert verdict.status == "not_equivalent"
        assert (verdict.discrepancy.site, verdict.discrepancy.parameter) == (site, which)
        assert verdict.stage == "phases"


def test_magnitude_difference_found_first():
    pr = random_params(3, 0, 9)
    p = pr.p.copy()
    p[4] += 0.05
    kappa = pr.kappa.copy()
    kappa[2] += 1.0
    verdict = decide_equivalence(build_canonical(pr), build_canonical(pr.replace(p=p, kappa=kappa)), "finite")
    assert verdict.stage == "magnitudes" and verdict.discrepancy.parameter == "p"
    assert verdict.discrepancy.site == 4


def test_cut_pattern_mismatch():
    a = random_params(1, 0, 9, Profile(cuts=(3,)))
    b = random_params(1, 0, 9, Profile(cuts=(5,)))
    verdict = decide_equivalence(build_canonical(a), build_canonical(b), "finite")
    assert verdict.status == "not_equivalent" and verdict.stage == "cuts"
    assert verdict.discrepancy.parameter == "cut" and verdict.discrepancy.site == 3


def test_incomparable_inputs():
    U = build_canonical(random_params(0, 0, 5))
    # excluded one-sided shift: fails Assumption A (and unitarity on a window)
    diag = np.tile(np.diag([0, 1]).astype(complex), (6, 1, 1))
    down = np.tile(np.diag([1, 0]).astype(complex), (5, 1, 1))
    X = WalkOperator(0, diag, np.zeros((5, 2, 2)), down, validate=False)
    verdict = decide_equivalence(X, U, "finite")
    assert verdict.status == "incomparable" and "first" in verdict.reason
    assert phase_propagation_oracle(X, U) is None
    # all-cut Kitagawa is comparable (isolated cells) and differs in its cuts
    K = build_kitagawa(KitagawaParams(np.pi / 2, 0.3, 0, 5))
    assert decide_equivalence(K, U, "finite").stage == "cuts"
    V = build_canonical(random_params(0, 0, 6))
    assert decide_equivalence(U, V, "finite").status == "incomparable"
    with pytest.raises(GeometryMismatch):
        decide_equivalence(U, U, "line", geometry_other="finite")


def test_isolated_blocks_compared_by_spectrum():
    # a walk that is a direct sum of 2x2 cells: equivalence is spectral per cell
    rng = np.random.default_rng(2)
    n = 4
    diag = np.stack([np.diag(np.exp(1j * rng.uniform(0, 6, 2))) for _ in range(n)])
    z = np.zeros((n - 1, 2, 2), dtype=complex)
    U = WalkOperator(0, diag, z, z)
    V = apply_gauge(U, random_gauge(3, 0, n - 1))
    # Assumption B fails everywhere but every cell is an isolated block
    verdict = decide_equivalence(U, V, "finite")
    assert verdict.equivalent
    diag2 = diag.copy()
    diag2[2] = np.diag([diag[2, 0, 0], -diag[2, 1, 1]])
    verdict = decide_equivalence(U, WalkOperator(0, diag2, z, z), "finite")
    assert verdict.status == "not_equivalent" and verdict.discrepancy.site == 2


# --- independent oracle -------------------------------------------------------

def test_oracle_diagonal_gauge():
    U = build_canonical(random_params(4, 0, 13, Profile.mixed()))
    W0 = random_gauge(5, 0, 13, diagonal_only=True)
    V = apply_gauge(U, W0)
    W = phase_propagation_oracle(U, V)
    assert W is not None and operator_distance(apply_gauge(U, W), V) < 1e-8


def test_oracle_identity():
    U = random_admissible_walk(1, -3, 8)
    W = phase_propagation_oracle(U, U)
    assert W is not None and operator_distance(apply_gauge(U, W), U) < 1e-8


def test_oracle_agrees_with_decider():
    rng = np.random.default_rng(11)
    for trial in range(60):
        pr = random_params(trial, -3, 9, Profile.mixed(0.15))
        U = build_canonical(pr)
        if trial % 2:
            pr2, _ = _perturb_phase(pr, rng, "kappa")
            V = apply_gauge(build_canonical(pr2), random_gauge(trial, -3, 9))
        else:
            V = apply_gauge(U, random_gauge(trial, -3, 9))
        verdict = decide_equivalence(U, V, "finite")
        oracle = phase_propagation_oracle(U, V)
        assert verdict.equivalent == (oracle is not None)


# --- spectra -------------------------------------------------------------------

def test_spectrum_identity_and_reflection():
    n = 5
    ev = window_spectrum(WalkOperator.identity(0, n - 1))
    assert np.allclose(ev, 1) and ev.shape == (2 * n,)
    z = np.zeros((n - 1, 2, 2))
    R = WalkOperator(0, np.tile(np.diag([1.0, -1.0]), (n, 1, 1)), z, z)
    ev = window_spectrum(R)
    assert np.sum(np.isclose(ev, 1)) == n and np.sum(np.isclose(ev, -1)) == n


@pytest.mark.parametrize("seed", range(5))
def test_spectrum_gauge_invariant(seed):
    U = random_admissible_walk(seed, 0, 15, Profile.mixed())
    V = apply_gauge(U, random_gauge(seed, 0, 15))
    assert spectra_match(window_spectrum(U), window_spectrum(V)) < 1e-10
