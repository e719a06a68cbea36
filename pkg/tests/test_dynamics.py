import numpy as np
import pytest

from ssqw.builders import GaugeTransform, SSQWParams, build_canonical, random_gauge, random_params
from ssqw.dynamics import Distribution, distribution, evolve, grow_params, moments, trajectory
from ssqw.errors import InvalidParams, SupportOverflow
from ssqw.operator import StateVector, WalkOperator, apply


def _bulk(lo=-20, hi=20):
    return SSQWParams.constant(lo, hi, 0.6, 0.7, theta=0.4, kappa=1.3)


def test_evolve_zero_and_identity(rng):
    psi = StateVector(0, rng.normal(size=(6, 2)) + 0j)
    U = build_canonical(random_params(0, 0, 5))
    assert np.array_equal(evolve(U, psi, 0, confined=True).amps, psi.amps)
    I = WalkOperator.identity(0, 5)
    assert np.array_equal(evolve(I, psi, 7, confined=True).amps, psi.amps)


def test_evolve_one_step_is_apply():
    U = build_canonical(_bulk())
    psi = StateVector.basis(-20, 20, 0, 1)
    assert np.array_equal(evolve(U, psi, 1).amps, apply(U, psi).amps)


def test_distribution_examples():
    d = distribution(StateVector.basis(-3, 3, 0, 0))
    assert d.at(0) == 1.0 and d.total() == 1.0
    amps = np.zeros((8, 2), dtype=complex)
    amps[0, 0] = amps[5, 1] = 1 / np.sqrt(2)
    d = distribution(StateVector(0, amps))
    assert abs(d.at(0) - 0.5) < 1e-15 and abs(d.at(5) - 0.5) < 1e-15


def test_distribution_gauge_invariant(rng):
    psi = StateVector(0, rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2)))
    W = random_gauge(1, 0, 5)
    moved = StateVector(0, np.einsum("kij,kj->ki", W.mats, psi.amps))
    assert np.allclose(distribution(moved).prob, distribution(psi).prob, atol=1e-14)


def test_moments():
    assert moments(Distribution(-2, np.array([0, 0, 1.0, 0, 0])), 1) == 0.0
    sym = Distribution(-2, np.array([0.1, 0.2, 0.4, 0.2, 0.1]))
    assert abs(moments(sym, 1)) < 1e-10
    d = Distribution(-1, np.array([0.5, 0.0, 0.5]))
    assert moments(d, 2) == 1.0
    with pytest.raises(ValueError):
        moments(d, 3)


def test_support_overflow():
    U = build_canonical(_bulk(-5, 5))
    with pytest.raises(SupportOverflow):
        evolve(U, StateVector.basis(-5, 5, 0, 0), 10)


def test_auto_grow_needs_params():
    U = build_canonical(_bulk(-5, 5))
    with pytest.raises(InvalidParams):
        evolve(U, StateVector.basis(-5, 5, 0, 0), 3, auto_grow=True)


def test_grow_params_constant_tails():
    pr = _bulk(-2, 2)
    g = grow_params(pr, 3, 4)
    assert g.window == (-5, 6)
    assert np.allclose(g.p[:-1], 0.6) and g.p[-1] == 1.0
    assert np.allclose(g.r, 0.7) and np.allclose(g.kappa, 1.3)


def test_auto_grow_matches_large_window():
    t = 40
    small = _bulk(-3, 3)
    psi = StateVector.basis(-3, 3, 0, 0)
    big = _bulk(-t - 10, t + 10)
    out_small = evolve(small, psi, t, auto_grow=True)
    out_big = evolve(build_canonical(big), psi.padded(-t - 10, t + 10), t)
    lo = max(out_small.lo, out_big.lo)
    hi = min(out_small.hi, out_big.hi)
    ds, db = distribution(out_small), distribution(out_big)
    for x in range(lo, hi + 1):
        assert abs(ds.at(x) - db.at(x)) < 1e-12
    assert abs(ds.total() - 1) < 1e-12


def test_probability_conserved_with_auto_grow():
    psi = StateVector(0, np.array([[1, 1j]]) / np.sqrt(2)).padded(-1, 1)
    pr = SSQWParams.constant(-1, 1, 0.5, 0.5)
    last = None
    for step, state in trajectory(pr, psi, 300, auto_grow=True):
        assert abs(distribution(state).total() - 1) < 1e-10
        last = state
    # ballistic spreading: the second moment grows like t^2
    assert moments(distribution(last), 2) > 1000


def test_confined_reflects():
    U = build_canonical(random_params(3, 0, 4))
    psi = StateVector.basis(0, 4, 2, 0)
    out = evolve(U, psi, 50, confined=True)
    assert abs(out.norm() - 1) < 1e-12


def test_gauge_transform_of_state_helper():
    # GaugeTransform acts cell by cell; norms stay equal
    W = GaugeTransform.diagonal(0, np.arange(3.0), -np.arange(3.0))
    psi = StateVector.basis(0, 2, 1, 1)
    moved = StateVector(0, np.einsum("kij,kj->ki", W.mats, psi.amps))
    assert abs(moved.norm() - 1) < 1e-15
