import numpy as np
import pytest

from ssqw.builders import (
    Profile,
    SSQWParams,
    apply_gauge,
    build_canonical,
    random_admissible_walk,
    random_gauge,
    random_params,
)
from ssqw.errors import DegenerateFrame, RankViolation
from ssqw.operator import WalkOperator, operator_distance
from ssqw.structure import (
    check_admissibility,
    complement,
    extract_eta,
    extract_zeta_xi,
    local_bases,
    phase_normalize,
    reconstruct,
)


def _overlap(a, b):
    """``|<a, b>|`` row by row."""
    return np.abs(np.sum(np.conj(a) * b, axis=-1))


def _generic_params():
    return SSQWParams(-3, [0.4, 0.7, 0.2, 0.9, 0.5, 1.0], [0.3, 0.6, 0.8, 0.1, 0.5, 0.7],
                      [0.2, 1.4, 3.0, 5.5, 0.8, 0.0], [2.0, 0.3, 1.0, 4.0, 2.2, 6.0], 0.9)


def test_admissible_canonical_walk():
    rep = check_admissibility(build_canonical(_generic_params()))
    assert rep.ok and rep.cuts == [] and rep.assumption_a_ok is True


def test_excluded_one_sided_shift_fails_assumption_a():
    # |e1^{x-1}><e1^x| + |e2^x><e2^x| on every site; not unitary on a window
    n = 6
    diag = np.tile(np.diag([0, 1]).astype(complex), (n, 1, 1))
    down = np.tile(np.diag([1, 0]).astype(complex), (n - 1, 1, 1))
    up = np.zeros((n - 1, 2, 2), dtype=complex)
    U = WalkOperator(0, diag, up, down, validate=False)
    rep = check_admissibility(U)
    assert rep.assumption_a_ok is False
    assert set(range(1, n - 1)) <= set(rep.assumption_a_offenders)


def test_adjacent_cuts_fail_assumption_b():
    p = np.array([0.5, 0.6, 1.0, 1.0, 0.3, 0.4, 1.0])
    pr = SSQWParams(-2, p, np.full(7, 0.5), np.zeros(7), np.zeros(7))
    rep = check_admissibility(build_canonical(pr))
    assert rep.cuts == [0, 1]
    assert not rep.assumption_b_ok and rep.assumption_b_offenders == [1]


def test_rank_two_bond_reported():
    m = np.zeros((4, 4))
    m[0:2, 2:4] = np.eye(2)
    m[2:4, 0:2] = np.eye(2)
    U = WalkOperator.from_dense(m, 0)
    rep = check_admissibility(U)
    assert not rep.rank_ok and rep.rank2_bonds == [0] and rep.assumption_a_ok is None
    with pytest.raises(RankViolation):
        extract_eta(U)


def test_eta_of_canonical_walk_is_e_frame():
    eta = extract_eta(build_canonical(_generic_params()))
    assert np.allclose(eta, np.eye(2)[None], atol=1e-12)
    assert _overlap(eta[:, :, 0], eta[:, :, 1]).max() < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_eta_covariant_under_gauge(seed):
    U = random_admissible_walk(seed, 0, 11, Profile.mixed())
    W = random_gauge(seed + 100, 0, 11)
    e0 = extract_eta(U)
    e1 = extract_eta(apply_gauge(U, W))
    moved = W.mats @ e0
    for j in range(2):
        assert np.abs(_overlap(moved[:, :, j], e1[:, :, j]) - 1).max() < 1e-10
    # both carry the fixed phase convention
    assert np.allclose(phase_normalize(e1[:, :, 0]), e1[:, :, 0])


def test_eta_convention_on_closed_bond():
    p = np.array([0.5, 1.0, 0.4, 0.7, 1.0])
    pr = SSQWParams(0, p, np.full(5, 0.6), np.zeros(5), np.zeros(5))
    W = random_gauge(3, 0, 4)
    eta = extract_eta(apply_gauge(build_canonical(pr), W))
    # bond (1, 2) is cut, so eta1^1 is forced to the complement of eta2^1
    assert np.allclose(eta[1, :, 0], complement(eta[1, :, 1]), atol=1e-12)
    lead = eta[1, 0, 0] if abs(eta[1, 0, 0]) > 1e-12 else eta[1, 1, 0]
    assert abs(lead.imag) < 1e-15 and lead.real > 0


def test_zeta_matches_canonical_coin():
    pr = _generic_params()
    b = local_bases(build_canonical(pr))
    z1 = np.stack([np.exp(1j * pr.kappa) * pr.r, pr.s], axis=1)
    z2 = np.stack([pr.s, -np.exp(-1j * pr.kappa) * pr.r], axis=1)
    assert np.abs(_overlap(b.zeta[:, :, 0], z1) - 1).max() < 1e-12
    assert np.abs(_overlap(b.zeta[:, :, 1], z2) - 1).max() < 1e-12
    assert b.gram_residual() < 1e-12


def test_zeta_degenerate_frame():
    n = 6
    diag = np.tile(np.diag([0, 1]).astype(complex), (n, 1, 1))
    down = np.tile(np.diag([1, 0]).astype(complex), (n - 1, 1, 1))
    U = WalkOperator(0, diag, np.zeros((n - 1, 2, 2)), down, validate=False)
    with pytest.raises(DegenerateFrame):
        extract_zeta_xi(U, extract_eta(U))


@pytest.mark.parametrize("seed", range(20))
def test_reconstruction(seed):
    U = random_admissible_walk(seed, 0, 31, Profile.mixed())
    assert operator_distance(U, reconstruct(local_bases(U))) < 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_reconstruction_after_gauge(seed):
    U = apply_gauge(build_canonical(random_params(seed, -5, 10, Profile.mixed(0.25))),
                    random_gauge(seed, -5, 10))
    assert operator_distance(U, local_bases(U).reconstruct()) < 1e-9
