"""Decay-versus-trapping classification of the boundary impurity.

A boundary excitation dissipates fully iff the impurity parameters create
no normalizable state outside the energy band [-2B, 2B].  Everything here
is closed-form in the dimensionless ratios mu_B = mu/B and C_B = C/B:

* ``decay_condition`` is the fast analytic screen;
* ``find_bound_states`` solves the boundary-matching quadratic exactly and
  is the ground truth the screen is tested against;
* ``trapped_weight`` predicts the late-time plateau of the boundary
  occupation from the bound-state overlaps;
* ``phase_diagram`` evaluates all of the above on a parameter grid.

Points exactly on the phase boundary (a marginal |x| = 1 state) are
classified as trapped; they form a measure-zero set that no finite
numerical resolution can decide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import InvalidSpecError

BRANCH_GENERAL = "general"
BRANCH_C_EQUALS_B = "c_equals_b"
BRANCH_MU_ZERO = "mu_zero"

_C_EQ_B_TOL = 1e-12


@dataclass(frozen=True)
class BoundState:
    """Normalizable impurity state outside the band.

    ``x`` is the geometric amplitude ratio in the bulk (|x| < 1), so the
    eigenvector profile is psi_0 = A/C_B, psi_j = A x**j for j >= 1.
    ``energy`` is the eigenvalue B*(x + 1/x), strictly outside [-2B, 2B].
    ``overlap_sq`` is |<bound state|e_0>|**2 after normalizing the profile.
    """

    x: float
    energy: float
    overlap_sq: float


@dataclass(frozen=True)
class DecayVerdict:
    decays: bool
    bound_states: tuple[BoundState, ...]
    criterion_branch: str


def _check_ratios(mu_B: float, C_B: float) -> None:
    if not (math.isfinite(mu_B) and math.isfinite(C_B)):
        raise InvalidSpecError(f"mu_B and C_B must be finite, got {mu_B!r}, {C_B!r}")
    if C_B <= 0:
        raise InvalidSpecError(f"C_B must be > 0, got {C_B!r}")


def decay_condition(mu_B: float, C_B: float) -> bool:
    """True iff the spectrum is purely the band, so the boundary state decays.

    Branches: C_B = 1 reduces to |mu_B| < 1; mu_B = 0 reduces to
    C_B < sqrt(2); a negative radicand mu_B^2 + 4 C_B^2 - 4 means the
    matching quadratic has a complex root pair with |x| > 1, so nothing is
    normalizable and the state decays.  The general inequality
    2|1 - C_B^2| < ||mu_B| - sqrt(mu_B^2 + 4 C_B^2 - 4)| factors exactly
    into |mu_B| < 2 - C_B^2 (square the rearranged inequality separately
    for C_B above and below 1); that cancellation-free form is evaluated
    here because the literal one loses all precision near C_B = 1.
    """
    _check_ratios(mu_B, C_B)
    if abs(C_B - 1.0) < _C_EQ_B_TOL:
        return abs(mu_B) < 1.0
    if mu_B == 0.0:
        return C_B < math.sqrt(2.0)
    radicand = mu_B * mu_B + 4.0 * C_B * C_B - 4.0
    if radicand < 0.0:
        return True
    return abs(mu_B) < 2.0 - C_B * C_B


def _overlap_sq(x: float, C_B: float) -> float:
    # |psi_0|^2 / (|psi_0|^2 + sum_{j>=1} x^{2j}) with psi_0 = 1/C_B
    w0 = 1.0 / (C_B * C_B)
    tail = x * x / (1.0 - x * x)
    return w0 / (w0 + tail)


def find_bound_states(mu_B: float, C_B: float, B: float = 1.0) -> list[BoundState]:
    """All bound states of the impurity chain, exactly.

    Solves (C_B^2 - 1) x^2 + mu_B x - 1 = 0 (the C_B = 1 case degenerates
    to the linear equation with root x = 1/mu_B) and keeps real roots with
    |x| strictly below 1.  Returned states are sorted by energy; the list
    is empty exactly when :func:`decay_condition` holds, boundary ties
    excepted.
    """
    _check_ratios(mu_B, C_B)
    if not (math.isfinite(B) and B > 0):
        raise InvalidSpecError(f"B must be finite and > 0, got {B!r}")
    a = C_B * C_B - 1.0
    roots: list[float] = []
    if a == 0.0:
        if mu_B != 0.0:
            roots.append(1.0 / mu_B)
    else:
        disc = mu_B * mu_B + 4.0 * a
        if disc >= 0.0:
            # citardauq form keeps the small root accurate for tiny a;
            # q = 0 would need mu_B = 0 and disc = 0, impossible for a != 0
            q = -0.5 * (mu_B + math.copysign(math.sqrt(disc), mu_B))
            roots.extend([q / a, -1.0 / q])
    states = [
        BoundState(x=x, energy=B * (x + 1.0 / x), overlap_sq=_overlap_sq(x, C_B))
        for x in roots
        if 0.0 < abs(x) < 1.0
    ]
    states.sort(key=lambda s: s.energy)
    return states


def trapped_weight(mu_B: float, C_B: float) -> float:
    """Late-time plateau of the boundary occupation started from e_0.

    The continuum part disperses, cross terms dephase away, and what
    survives is sum_b |<b|e_0>|^4 over bound states b; zero if none exist.
    """
    return float(sum(s.overlap_sq**2 for s in find_bound_states(mu_B, C_B)))


def decay_verdict(mu_B: float, C_B: float) -> DecayVerdict:
    """Combined verdict: analytic screen, exact bound states, branch label."""
    _check_ratios(mu_B, C_B)
    if abs(C_B - 1.0) < _C_EQ_B_TOL:
        branch = BRANCH_C_EQUALS_B
    elif mu_B == 0.0:
        branch = BRANCH_MU_ZERO
    else:
        branch = BRANCH_GENERAL
    return DecayVerdict(
        decays=decay_condition(mu_B, C_B),
        bound_states=tuple(find_bound_states(mu_B, C_B)),
        criterion_branch=branch,
    )


@dataclass(frozen=True)
class PhaseDiagramGrid:
    """Vectorized verdicts on a (mu_B, C_B) grid.

    Arrays are indexed [i_mu, i_c]; :meth:`rows` iterates row-major with
    mu_B as the outer loop, matching the CSV layout.
    """

    mu_values: np.ndarray
    c_values: np.ndarray
    decays: np.ndarray
    n_bound: np.ndarray
    trapped_weight: np.ndarray

    def rows(self) -> Iterator[tuple[float, float, bool, int, float]]:
        for i, mu in enumerate(self.mu_values):
            for k, c in enumerate(self.c_values):
                yield (
                    float(mu),
                    float(c),
                    bool(self.decays[i, k]),
                    int(self.n_bound[i, k]),
                    float(self.trapped_weight[i, k]),
                )


def phase_diagram(mu_values, c_values) -> PhaseDiagramGrid:
    """Classify every (mu_B, C_B) cell; fully vectorized closed forms."""
    mu = np.atleast_1d(np.asarray(mu_values, dtype=float))
    c = np.atleast_1d(np.asarray(c_values, dtype=float))
    if mu.size == 0 or c.size == 0:
        raise InvalidSpecError("empty parameter grid")
    if not (np.isfinite(mu).all() and np.isfinite(c).all()):
        raise InvalidSpecError("grid values must be finite")
    if (c <= 0).any():
        raise InvalidSpecError("C_B grid values must be > 0")

    MU = mu[:, None]
    CB = c[None, :]
    a = CB * CB - 1.0
    degenerate = a == 0.0
    disc = MU * MU + 4.0 * a

    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.where(disc >= 0.0, disc, np.nan))
        q = -0.5 * (MU + np.where(MU >= 0.0, sq, -sq))
        root1 = np.where(q != 0.0, -1.0 / q, np.nan)
        root2 = q / np.where(degenerate, np.nan, a)
        lin = np.where(MU != 0.0, 1.0 / np.where(MU != 0.0, MU, np.nan), np.nan)
        root1 = np.where(degenerate, lin, root1)
        root2 = np.where(degenerate, np.nan, root2)

    roots = np.stack([root1, root2], axis=-1)
    bound = np.isfinite(roots) & (np.abs(roots) < 1.0) & (np.abs(roots) > 0.0)
    n_bound = bound.sum(axis=-1).astype(int)

    with np.errstate(divide="ignore", invalid="ignore"):
        w0 = 1.0 / (CB * CB)
        tail = roots**2 / (1.0 - roots**2)
        overlap = w0[..., None] / (w0[..., None] + tail)
    tw = np.where(bound, overlap**2, 0.0).sum(axis=-1)

    # same branch structure as decay_condition, with the stable factored
    # form of the general inequality
    general = np.where(disc < 0.0, True, np.abs(MU) < 2.0 - CB * CB)
    decays = np.where(
        np.abs(CB - 1.0) < _C_EQ_B_TOL,
        np.abs(MU) < 1.0,
        np.where(MU == 0.0, CB < math.sqrt(2.0), general),
    )

    return PhaseDiagramGrid(
        mu_values=mu,
        c_values=c,
        decays=decays.astype(bool),
        n_bound=n_bound,
        trapped_weight=tw,
    )
