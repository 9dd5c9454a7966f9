"""Reduction of chain amplitudes to the target subsystem's density matrix.

Every chain site carries a fixed target state; the ancilla sites are
orthonormal, so tracing them out of a pure chain state leaves the mixture
of those target states weighted by the site occupations:

    rho_T = sum_j |psi_j|^2 |phi_a(j)><phi_a(j)|.

Target states are explicit vectors in an orthonormal computational basis,
which handles non-orthogonal assignments without any Gram-matrix
reconstruction.  Classical mixtures of one evolving chain branch with
inert (never-acted-upon) target branches are covered by ``mix_reduce``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .chain import BlockSpec, ChainSpec, build_chain, decompose_block
from .errors import InvalidSpecError, NumericsError
from .propagate import ObservableSeries, basis_state, propagate, time_grid

TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
_STATE_NORM_TOL = 1e-12
_WEIGHT_SUM_TOL = 1e-12


def _as_state(vec, name: str = "state") -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    if vec.ndim != 1 or vec.size == 0:
        raise InvalidSpecError(f"{name} must be a non-empty 1-d vector")
    if not np.isfinite(vec).all():
        raise InvalidSpecError(f"{name} must be finite")
    if abs(np.linalg.norm(vec) - 1.0) > _STATE_NORM_TOL:
        raise InvalidSpecError(f"{name} must be normalized, |norm - 1| > {_STATE_NORM_TOL}")
    return vec


@dataclass(frozen=True)
class TargetMap:
    """Assignment of a target state to every chain site.

    ``states`` holds the distinct target vectors (dimension M each, unit
    norm); ``assign`` maps a site index j >= 0 to an index into ``states``.
    """

    states: tuple[np.ndarray, ...]
    assign: Callable[[int], int]

    def __post_init__(self):
        if not self.states:
            raise InvalidSpecError("need at least one target state")
        states = tuple(_as_state(s, "target state") for s in self.states)
        dims = {s.shape[0] for s in states}
        if len(dims) != 1:
            raise InvalidSpecError("all target states must share one dimension")
        for s in states:
            s.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def labels(self, n_sites: int) -> np.ndarray:
        """State index for each of the first n_sites sites, validated."""
        lab = np.fromiter((self.assign(j) for j in range(n_sites)), dtype=int, count=n_sites)
        if lab.min(initial=0) < 0 or lab.max(initial=0) >= len(self.states):
            raise InvalidSpecError("site assignment points outside the state list")
        return lab

    def gram(self) -> np.ndarray:
        """Hermitian PSD matrix of inner products among the distinct states."""
        n = len(self.states)
        g = np.empty((n, n), dtype=complex)
        for i, a in enumerate(self.states):
            for k, b in enumerate(self.states):
                g[i, k] = np.vdot(a, b)
        return g

    @classmethod
    def impurity(cls, boundary_state, bulk_state) -> "TargetMap":
        """Site 0 carries ``boundary_state``; every later site ``bulk_state``."""
        return cls(states=(boundary_state, bulk_state), assign=lambda j: 0 if j == 0 else 1)

    @classmethod
    def alternating(cls, even_state, odd_state) -> "TargetMap":
        """Even sites carry ``even_state``; odd sites ``odd_state``."""
        return cls(states=(even_state, odd_state), assign=lambda j: j % 2)

    @classmethod
    def uniform(cls, state) -> "TargetMap":
        return cls(states=(state,), assign=lambda j: 0)


def check_density_matrix(
    rho: np.ndarray,
    trace_tol: float = TRACE_TOL,
    herm_tol: float = HERMITICITY_TOL,
    psd_tol: float = PSD_TOL,
) -> np.ndarray:
    """Assert trace-1, hermiticity and positivity; returns rho unchanged."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidSpecError("density matrix must be square")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise NumericsError(f"density matrix not hermitian: asymmetry {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise NumericsError(f"density matrix trace {tr!r} differs from 1 beyond {trace_tol}")
    lowest = np.linalg.eigvalsh(rho).min()
    if lowest < -psd_tol:
        raise NumericsError(f"density matrix not positive: lowest eigenvalue {lowest:.3e}")
    return rho


def _projector_stack(tmap: TargetMap) -> np.ndarray:
    return np.stack([np.outer(s, s.conj()) for s in tmap.states])


def reduce(psi, tmap: TargetMap) -> np.ndarray:
    """Trace out the ancilla of a pure chain state: occupation-weighted mixture."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise InvalidSpecError("chain state must be a 1-d amplitude vector")
    labels = tmap.labels(psi.shape[0])
    occ = np.abs(psi) ** 2
    weights = np.bincount(labels, weights=occ, minlength=len(tmap.states))
    rho = np.einsum("l,lij->ij", weights, _projector_stack(tmap))
    return check_density_matrix(rho)


def reduce_trajectory(states: np.ndarray, tmap: TargetMap) -> np.ndarray:
    """Vectorized :func:`reduce` over the rows of a (n_times, n_sites) array."""
    states = np.asarray(states, dtype=complex)
    labels = tmap.labels(states.shape[1])
    occ = np.abs(states) ** 2
    weights = np.stack(
        [occ[:, labels == l].sum(axis=1) for l in range(len(tmap.states))], axis=1
    )
    return np.einsum("tl,lij->tij", weights, _projector_stack(tmap))


@dataclass(frozen=True)
class ChainBranch:
    """Weighted chain state that evolves under the Hamiltonian."""

    weight: float
    psi: np.ndarray


@dataclass(frozen=True)
class InertBranch:
    """Weighted target state the Hamiltonian never touches."""

    weight: float
    state: np.ndarray


def mix_reduce(
    branches: Sequence[Union[ChainBranch, InertBranch]], tmap: TargetMap
) -> np.ndarray:
    """Convex combination of per-branch reductions.

    Chain branches are reduced through ``tmap``; inert branches contribute
    their fixed projector.  Weights must be non-negative and sum to 1.
    """
    if not branches:
        raise InvalidSpecError("need at least one branch")
    weights = [b.weight for b in branches]
    if any(w < 0 or not math.isfinite(w) for w in weights):
        raise InvalidSpecError("branch weights must be finite and >= 0")
    total = sum(weights)
    if abs(total - 1.0) > _WEIGHT_SUM_TOL:
        raise InvalidSpecError(f"branch weights must sum to 1, got {total!r}")

    rho = np.zeros((tmap.dim, tmap.dim), dtype=complex)
    for branch in branches:
        if isinstance(branch, ChainBranch):
            rho += branch.weight * reduce(branch.psi, tmap)
        elif isinstance(branch, InertBranch):
            s = _as_state(branch.state, "inert target state")
            if s.shape[0] != tmap.dim:
                raise InvalidSpecError("inert state dimension does not match the target map")
            rho += branch.weight * np.outer(s, s.conj())
        else:
            raise InvalidSpecError(f"unsupported branch type {type(branch).__name__}")
    return check_density_matrix(rho)


def parity_mix_state(parity: float, a, b) -> np.ndarray:
    """((1+p)/2)|a><a| + ((1-p)/2)|b><b| for an even-odd imbalance p.

    At p = 0 the eigenvalues are (1 +- |<a|b>|)/2, which spans every
    binary mixture as the overlap of the two target states varies.
    """
    if not (math.isfinite(parity) and -1.0 <= parity <= 1.0):
        raise InvalidSpecError(f"parity must lie in [-1, 1], got {parity!r}")
    a = _as_state(a, "target state a")
    b = _as_state(b, "target state b")
    if a.shape != b.shape:
        raise InvalidSpecError("target states must share one dimension")
    rho = 0.5 * (1.0 + parity) * np.outer(a, a.conj()) + 0.5 * (1.0 - parity) * np.outer(
        b, b.conj()
    )
    return check_density_matrix(rho)


def purity(rho) -> float:
    """tr(rho^2); 1 for pure states, 1/M for the maximally mixed state."""
    rho = np.asarray(rho)
    return float(np.trace(rho @ rho).real)


def trace_distance(rho_a, rho_b) -> float:
    """Half the trace norm of the difference of two hermitian matrices."""
    diff = np.asarray(rho_a) - np.asarray(rho_b)
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


@dataclass(frozen=True)
class ReducedTrajectory:
    """Target density matrices sampled along one propagation."""

    times: np.ndarray
    rhos: np.ndarray

    def diagonal(self, k: int) -> np.ndarray:
        return self.rhos[:, k, k].real

    def purities(self) -> np.ndarray:
        return np.einsum("tij,tji->t", self.rhos, self.rhos).real

    def eigenvalues(self) -> np.ndarray:
        """Spectra along the trajectory, ascending per sample."""
        return np.linalg.eigvalsh(self.rhos)


def _qubit(k: int) -> np.ndarray:
    e = np.zeros(2, dtype=complex)
    e[k] = 1.0
    return e


def run_example1(
    spec: ChainSpec | None = None, t_max: float = 160.0, dt: float | None = None
) -> ReducedTrajectory:
    """Reset protocol: mixed qubit purifies to |0> through the chain.

    The initial target mixture (|0><0| + |1><1|)/2 is an equal-weight
    combination of an inert |0> branch and an evolving branch whose chain
    boundary carries |1| while the bulk carries |0>.  As the boundary
    occupation drains, the reduced state converges to |0><0|.
    """
    if spec is None:
        spec = ChainSpec(B=1.0, C=1.0, mu=0.0, n_sites=400)
    hamiltonian = build_chain(spec)
    times = time_grid(t_max, dt, spec.B)
    states = propagate(hamiltonian, basis_state(spec.n_sites), times)
    tmap = TargetMap.impurity(boundary_state=_qubit(1), bulk_state=_qubit(0))
    evolving = reduce_trajectory(states, tmap)
    inert = np.outer(_qubit(0), _qubit(0).conj())
    rhos = 0.5 * evolving + 0.5 * inert[None, :, :]
    for rho in rhos[:: max(1, len(rhos) // 8)]:
        check_density_matrix(rho)
    return ReducedTrajectory(times=times, rhos=rhos)


def run_example2(
    spec: ChainSpec | None = None,
    t_max: float = 160.0,
    dt: float | None = None,
    overlap: float = 0.0,
) -> ReducedTrajectory:
    """Mixing protocol: pure qubit relaxes to the even two-state mixture.

    Even chain sites carry target state a, odd sites b with
    <a|b> = overlap.  The even-odd occupation difference vanishes for a
    band-dominated chain, leaving (|a><a| + |b><b|)/2 whose eigenvalues
    (1 +- overlap)/2 interpolate between the balanced and an arbitrarily
    skewed mixture.
    """
    if not 0.0 <= overlap < 1.0:
        raise InvalidSpecError(f"overlap must lie in [0, 1), got {overlap!r}")
    if spec is None:
        spec = ChainSpec(B=1.0, C=1.0, mu=0.0, n_sites=400)
    a = np.array([1.0, 0.0], dtype=complex)
    b = np.array([overlap, math.sqrt(1.0 - overlap * overlap)], dtype=complex)
    hamiltonian = build_chain(spec)
    times = time_grid(t_max, dt, spec.B)
    states = propagate(hamiltonian, basis_state(spec.n_sites), times)
    tmap = TargetMap.alternating(even_state=a, odd_state=b)
    rhos = reduce_trajectory(states, tmap)
    for rho in rhos[:: max(1, len(rhos) // 8)]:
        check_density_matrix(rho)
    return ReducedTrajectory(times=times, rhos=rhos)


def run_example4(
    block: BlockSpec,
    initial_m: int,
    t_max: float,
    dt: float | None = None,
    method: str = "auto",
) -> ObservableSeries:
    """Occupation of the lowest target level when the bath funnels into it.

    Starting from |site 0> x |E_m>, only the m-th chain of the decomposed
    block model is populated; its boundary carries |E_m> and the bulk
    |E_0>, so the reported value is <E_0| rho_T |E_0> over time.
    """
    if not 0 <= initial_m < block.block_dim:
        raise InvalidSpecError(
            f"initial level {initial_m} out of range for {block.block_dim} levels"
        )
    spec = decompose_block(block)[initial_m]
    times = time_grid(t_max, dt, spec.B)
    if initial_m == 0:
        # every site carries the lowest level, so the occupation is exactly 1
        # for all times regardless of how the amplitudes spread
        return ObservableSeries(times=times, values=np.ones_like(times))
    states = propagate(build_chain(spec), basis_state(spec.n_sites), times, method=method)

    level = np.zeros(block.block_dim, dtype=complex)
    level[initial_m] = 1.0
    ground = np.zeros(block.block_dim, dtype=complex)
    ground[0] = 1.0
    tmap = TargetMap.impurity(boundary_state=level, bulk_state=ground)
    rhos = reduce_trajectory(states, tmap)
    return ObservableSeries(times=times, values=rhos[:, 0, 0].real)
