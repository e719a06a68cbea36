"""Time evolution, position distributions and moments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .builders import SSQWParams, build_canonical
from .errors import InvalidParams, SupportOverflow, WindowMismatch
from .operator import StateVector, apply

__all__ = [
    "Distribution",
    "evolve",
    "trajectory",
    "distribution",
    "moments",
    "grow_params",
]

_GROW_CHUNK = 16


@dataclass(frozen=True, eq=False)
class Distribution:
    """``P(x) = |c1(x)|^2 + |c2(x)|^2`` on ``[lo, lo + n - 1]``."""

    lo: int
    prob: np.ndarray

    @property
    def hi(self) -> int:
        return self.lo + self.prob.shape[0] - 1

    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def total(self) -> float:
        return float(np.sum(self.prob))

    def at(self, x: int) -> float:
        k = x - self.lo
        return float(self.prob[k]) if 0 <= k < self.prob.shape[0] else 0.0


def distribution(psi: StateVector) -> Distribution:
    return Distribution(psi.lo, np.sum(np.abs(psi.amps) ** 2, axis=1))


def moments(d: Distribution, k: int = 1) -> float:
    """``sum_x x^k P(x)`` for ``k`` in {1, 2}."""
    if k not in (1, 2):
        raise ValueError("only the first two moments are supported")
    x = d.sites().astype(float)
    return float(np.sum(x**k * d.prob))


def grow_params(params: SSQWParams, left: int = 0, right: int = 0) -> SSQWParams:
    """
    Extend a window by constant tails.

    The window's outer bonds are taken to be truncation artefacts.  On the
    right, bond ``hi`` and all new bonds copy ``(p, theta)`` of bond
    ``hi - 1`` and new coins copy ``(r, kappa)`` of site ``hi``; the new last
    bond is closed.  On the left, new bonds copy bond ``lo`` and new coins copy
    site ``lo``; ``theta_left`` stays on the new closed left bond.
    """
    if params.n < 2 and (left or right):
        raise InvalidParams("constant tails need at least two sites")
    p, r = params.p.copy(), params.r.copy()
    th, ka = params.theta.copy(), params.kappa.copy()
    if right:
        pb, tb = p[-2], th[-2]
        p[-1], th[-1] = pb, tb
        p = np.concatenate([p, np.full(right, pb)])
        th = np.concatenate([th, np.full(right, tb)])
        r = np.concatenate([r, np.full(right, r[-1])])
        ka = np.concatenate([ka, np.full(right, ka[-1])])
        p[-1], th[-1] = 1.0, 0.0
    if left:
        p = np.concatenate([np.full(left, p[0]), p])
        th = np.concatenate([np.full(left, th[0]), th])
        r = np.concatenate([np.full(left, r[0]), r])
        ka = np.concatenate([np.full(left, ka[0]), ka])
    return SSQWParams(params.lo - left, p, r, th, ka, params.theta_left)


def trajectory(walk, psi0: StateVector, t: int, auto_grow: bool = False,
               confined: bool = False) -> Iterator[tuple[int, StateVector]]:
    """
    Yield ``(step, U^step psi0)`` for ``step = 0 .. t``.

    Parameters
    ----------
    walk : WalkOperator or SSQWParams
        The one-step unitary, or canonical parameters (needed for
        ``auto_grow``).
    auto_grow : bool
        Treat the window as a piece of the line and extend it with constant
        tails (see :func:`grow_params`) whenever the support comes within one
        site of an edge, so the closed outer bonds never act on amplitude.
    confined : bool
        Treat the window itself as the physical system; amplitude reaching
        the edges is reflected by the closed bonds.

    Raises
    ------
    SupportOverflow
        Without ``auto_grow`` or ``confined``, if the support of ``psi0`` is
        closer than ``t`` sites to an edge.
    """
    if t < 0:
        raise ValueError("number of steps must be nonnegative")
    params = walk if isinstance(walk, SSQWParams) else None
    if auto_grow and params is None:
        raise InvalidParams("auto_grow needs canonical parameters to extend the window")
    U = build_canonical(params) if params is not None else walk
    if psi0.window != U.window:
        raise WindowMismatch(f"state window {psi0.window} != walk window {U.window}")
    psi = psi0
    sup = psi.support()
    if not (auto_grow or confined) and sup is not None:
        if sup[0] - U.lo < t or U.hi - sup[1] < t:
            raise SupportOverflow(
                f"support {sup} comes within {t} steps of the window edges {U.window}"
            )
    yield 0, psi
    for step in range(1, t + 1):
        if auto_grow:
            sup = psi.support()
            if sup is not None:
                # columns lo and hi touch the artificial closed bonds
                left = _GROW_CHUNK if sup[0] < U.lo + 1 else 0
                right = _GROW_CHUNK if sup[1] > U.hi - 1 else 0
                if left or right:
                    params = grow_params(params, left, right)
                    U = build_canonical(params)
                    psi = psi.padded(U.lo, U.hi)
        psi = apply(U, psi)
        yield step, psi


def evolve(walk, psi0: StateVector, t: int, auto_grow: bool = False,
           confined: bool = False) -> StateVector:
    """``U^t psi0``; see :func:`trajectory` for the options."""
    psi = psi0
    for _, psi in trajectory(walk, psi0, t, auto_grow=auto_grow, confined=confined):
        pass
    return psi
