import numpy as np
import pytest

from conftest import canonical_dyad_oracle, kitagawa_ring, suzuki_dyad_oracle
from ssqw.builders import (
    GaugeTransform,
    KitagawaParams,
    Profile,
    SSQWParams,
    SuzukiParams,
    apply_gauge,
    build_canonical,
    build_kitagawa,
    build_suzuki,
    canonical_factors,
    random_admissible_walk,
    random_gauge,
    random_params,
    random_suzuki,
    suzuki_factors,
)
from ssqw.canonical import canonicalize
from ssqw.equivalence import decide_equivalence
from ssqw.errors import InfeasibleProfile, InvalidParams
from ssqw.operator import check_unitary, operator_distance, rank_profile
from ssqw.structure import check_admissibility


# --- SSQWParams validation ---------------------------------------------------

def test_params_validation():
    with pytest.raises(InvalidParams):
        SSQWParams(0, [0.5, 0.5], [0.1, 0.1], [0, 0], [0, 0])  # last bond must be closed
    with pytest.raises(InvalidParams):
        SSQWParams(0, [1.2, 1.0], [0.1, 0.1], [0, 0], [0, 0])
    with pytest.raises(InvalidParams):
        SSQWParams(0, [0.0, 1.0], [0.1, 0.1], [0.3, 0], [0, 0])  # theta on p = 0
    with pytest.raises(InvalidParams):
        SSQWParams(0, [0.5, 1.0], [0.0, 0.1], [0, 0], [0.3, 0])  # kappa on r = 0


def test_params_phases_reduced():
    pr = SSQWParams(0, [0.5, 1.0], [0.5, 0.5], [7.0, -1.0], [0.0, 2 * np.pi])
    assert np.all((pr.theta >= 0) & (pr.theta < 2 * np.pi))
    assert abs(pr.theta[0] - (7.0 - 2 * np.pi)) < 1e-15


# --- canonical family ---------------------------------------------------------

def test_canonical_p1_r1_block():
    # both dyads collapse: |e1><e1| + |-e2><-e2| is the identity on each cell
    pr = SSQWParams.constant(0, 3, 1.0, 1.0)
    U = build_canonical(pr)
    oracle = canonical_dyad_oracle(0, pr.p, pr.r, pr.theta, pr.kappa)
    for x in range(4):
        assert np.allclose(U.block(x, x), np.eye(2), atol=0)
    assert np.all(U.up == 0) and np.all(U.down == 0)
    assert np.array_equal(U.to_dense(), oracle)
    S, C = canonical_factors(pr)
    assert np.allclose(np.diag(S), np.tile([1, -1], 4)) and np.allclose(np.diag(C), np.tile([1, -1], 4))


def test_canonical_p0_r0_two_way_shift():
    n = 6
    p = np.zeros(n)
    p[-1] = 1.0
    U = build_canonical(SSQWParams(0, p, np.zeros(n), np.zeros(n), np.zeros(n)))
    for x in range(1, n - 1):
        # e2^x -> e2^{x+1} and e1^x -> e1^{x-1}
        assert np.allclose(U.block(x + 1, x), [[0, 0], [0, 1]], atol=0)
        assert np.allclose(U.block(x - 1, x), [[1, 0], [0, 0]], atol=0)
        assert np.allclose(U.block(x, x), 0, atol=0)


def test_canonical_three_site_example_matches_dyad_oracle():
    pr = SSQWParams(0, [0.0, 0.6, 1.0], [1.0, 0.8, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0])
    oracle = canonical_dyad_oracle(0, pr.p, pr.r, pr.theta, pr.kappa)
    assert np.allclose(build_canonical(pr).to_dense(), oracle, atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_canonical_random_matches_dyad_oracle(seed):
    pr = random_params(seed, -4, 7, Profile.mixed(0.2))
    oracle = canonical_dyad_oracle(pr.lo, pr.p, pr.r, pr.theta, pr.kappa, pr.theta_left)
    assert np.abs(build_canonical(pr).to_dense() - oracle).max() < 1e-14


@pytest.mark.parametrize("seed", range(5))
def test_canonical_factors_product(seed):
    pr = random_params(seed, 0, 9, Profile.mixed(0.2))
    S, C = canonical_factors(pr)
    assert np.abs(S @ C - build_canonical(pr).to_dense()).max() < 1e-14


# --- Suzuki and Kitagawa ------------------------------------------------------

def test_suzuki_trivial_coin_matches_factor_product():
    n = 4
    sp = SuzukiParams(0, np.ones(n), np.ones(n), np.zeros(n), np.zeros(n))
    S, C = suzuki_factors(sp)
    assert np.allclose(build_suzuki(sp).to_dense(), S @ C, atol=0)


def test_suzuki_real_q_b_matches_dyad_oracle():
    p = np.array([0.3, 0.8, 0.5, 1.0])
    a = np.array([0.6, 0.2, 0.9, 0.4])
    sp = SuzukiParams(2, p, a, np.sqrt(1 - p**2), np.sqrt(1 - a**2))
    assert np.abs(build_suzuki(sp).to_dense() - suzuki_dyad_oracle(2, p, a, sp.q, sp.b)).max() < 1e-15


@pytest.mark.parametrize("seed", range(5))
def test_suzuki_complex_matches_dyad_oracle(seed):
    sp = random_suzuki(seed, -3, 6, cut_rate=0.2)
    oracle = suzuki_dyad_oracle(sp.lo, sp.p, sp.a, sp.q, sp.b)
    assert np.abs(build_suzuki(sp).to_dense() - oracle).max() < 1e-15
    S, C = suzuki_factors(sp)
    assert np.abs(S @ C - oracle).max() < 1e-15


def test_suzuki_pure_shift_antidiagonal_coin_unitary():
    n = 5
    p = np.zeros(n)
    p[-1] = 1.0
    q = np.ones(n, dtype=complex)
    q[-1] = 0
    sp = SuzukiParams(0, p, np.zeros(n), q, np.exp(1j * np.arange(n)))
    ok, res = check_unitary(build_suzuki(sp))
    assert ok and res < 1e-12


def test_suzuki_norm_violation():
    with pytest.raises(InvalidParams):
        SuzukiParams(0, [0.5, 1.0], [0.5, 0.5], [0.5, 0.0], [np.sqrt(0.75), np.sqrt(0.75)])


def test_kitagawa_interior_matches_ring():
    n = 9
    t1, t2 = 0.7, -1.3
    U = build_kitagawa(KitagawaParams(t1, t2, 0, n - 1)).to_dense()
    ring = kitagawa_ring(t1, t2, n)
    # columns of sites 1 .. n-2 do not see the truncated edge bonds
    cols = slice(2, 2 * (n - 1))
    assert np.abs(U[:, cols] - ring[:, cols]).max() < 1e-15


def test_kitagawa_theta1_zero_ranks():
    U = build_kitagawa(KitagawaParams(0.0, 0.4, 0, 7))
    rp = rank_profile(U)
    assert set(rp.up_rank) == {1} and set(rp.down_rank) == {1}


def test_kitagawa_theta1_half_pi_all_cut():
    U = build_kitagawa(KitagawaParams(np.pi / 2, 0.4, 0, 7))
    rep = check_admissibility(U)
    assert rep.cuts == list(range(0, 7))
    assert not rep.assumption_b_ok and rep.assumption_b_offenders == list(range(8))


def test_kitagawa_pi4_canonical_constants():
    t = np.pi / 4
    form = canonicalize(build_kitagawa(KitagawaParams(t, t, 0, 7)), "finite")
    pr = form.segments[0].params
    assert np.abs(pr.p[:-1] - np.sin(t)).max() < 1e-12 and pr.p[-1] == 1.0
    assert np.abs(pr.r - np.sin(t)).max() < 1e-12


def test_kitagawa_unconjugated_is_sigma_x_gauge():
    k = KitagawaParams(0.3, 1.1, -2, 5)
    verdict = decide_equivalence(build_kitagawa(k), build_kitagawa(k, conjugated=False), "finite")
    assert verdict.equivalent


# --- random admissible walks ---------------------------------------------------

def test_random_walk_passes_structure_checks():
    rep = check_admissibility(random_admissible_walk(7, 0, 15))
    assert rep.ok


def test_random_profile_adjacent_cuts_infeasible():
    with pytest.raises(InfeasibleProfile):
        random_params(0, 0, 9, Profile(cuts=(3, 4)))
    with pytest.raises(InfeasibleProfile):
        random_admissible_walk(0, 0, 9, Profile(cuts=(0,)))  # isolates the left edge site


def test_random_walk_deterministic():
    a = random_admissible_walk(42, -5, 10, Profile.mixed())
    b = random_admissible_walk(42, -5, 10, Profile.mixed())
    assert np.array_equal(a.to_dense(), b.to_dense())


# --- gauges -------------------------------------------------------------------

def test_apply_gauge_identity_and_global_phase():
    U = random_admissible_walk(3, 0, 7)
    assert np.array_equal(apply_gauge(U, GaugeTransform.identity(0, 7)).to_dense(), U.to_dense())
    W = GaugeTransform.diagonal(0, np.full(8, 0.7), np.full(8, 0.7))
    assert np.abs(apply_gauge(U, W).to_dense() - U.to_dense()).max() < 1e-15


def test_apply_gauge_diagonal_is_equivalent():
    U = build_canonical(random_params(2, 0, 11, Profile.mixed()))
    V = apply_gauge(U, random_gauge(5, 0, 11, diagonal_only=True))
    assert decide_equivalence(U, V, "finite").equivalent
    assert operator_distance(U, V) > 1e-3


def test_random_gauge_properties():
    D = random_gauge(1, 0, 9, diagonal_only=True)
    assert np.all(D.mats[:, 0, 1] == 0) and np.all(D.mats[:, 1, 0] == 0)
    assert np.allclose(np.abs(D.mats[:, [0, 1], [0, 1]]), 1, atol=1e-15)
    F = random_gauge(1, 0, 9)
    assert F.unitarity_residual() < 1e-12
    assert not np.allclose(random_gauge(2, 0, 9).mats, F.mats)
