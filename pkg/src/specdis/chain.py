"""Nearest-neighbour chain Hamiltonians with a boundary impurity.

The basic object is a semi-infinite chain with site energies
(mu, 0, 0, ...) and hoppings (C, B, B, ...), truncated to ``n_sites``
sites with an open (hard-wall) boundary.  The block variant couples M
target levels to identical copies of that bath profile; because the
couplings are level-independent it splits exactly into M independent
single chains, one per target energy.

Only the two tridiagonal bands are stored; dense assembly is a small-size
test/diagnostic path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one truncated chain.

    B is the bulk hopping (must be positive), C the boundary hopping onto
    site 0, mu the site energy of site 0 and n_sites the truncation
    length.  All energies share the units of B; hbar = 1 throughout.
    """

    B: float
    C: float
    mu: float
    n_sites: int

    def __post_init__(self):
        if not (math.isfinite(self.B) and self.B > 0):
            raise InvalidSpecError(f"bulk hopping B must be finite and > 0, got {self.B!r}")
        if not (math.isfinite(self.C) and self.C >= 0):
            raise InvalidSpecError(f"boundary hopping C must be finite and >= 0, got {self.C!r}")
        if not math.isfinite(self.mu):
            raise InvalidSpecError(f"impurity energy mu must be finite, got {self.mu!r}")
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise InvalidSpecError(f"n_sites must be an integer >= 2, got {self.n_sites!r}")

    @property
    def mu_B(self) -> float:
        """Impurity energy in units of the bulk hopping."""
        return self.mu / self.B

    @property
    def C_B(self) -> float:
        """Boundary hopping in units of the bulk hopping."""
        return self.C / self.B

    @property
    def valid_horizon(self) -> float:
        """Time up to which the truncation is invisible from the boundary.

        Excitations spread at most at speed 2B, so the open end cannot
        influence site 0 physics before roughly n_sites / (2B).
        """
        return self.n_sites / (2.0 * self.B)


@dataclass(frozen=True)
class ChainHamiltonian:
    """Real symmetric tridiagonal matrix stored as its two bands."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float)
        off = np.array(self.offdiag, dtype=float)
        if diag.ndim != 1 or off.ndim != 1 or off.shape[0] != diag.shape[0] - 1:
            raise InvalidSpecError("offdiag must be one entry shorter than diag")
        if diag.shape[0] < 2:
            raise InvalidSpecError("need at least 2 sites")
        if not (np.isfinite(diag).all() and np.isfinite(off).all()):
            raise InvalidSpecError("Hamiltonian entries must be finite")
        # shared immutably between threads
        diag.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def n_sites(self) -> int:
        return self.diag.shape[0]

    def to_dense(self) -> np.ndarray:
        """Dense matrix; intended for tests and small diagnostics only."""
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def build_chain(spec: ChainSpec) -> ChainHamiltonian:
    """Tridiagonal matrix with diagonal (mu, 0, ...) and bands (C, B, B, ...)."""
    diag = np.zeros(spec.n_sites)
    diag[0] = spec.mu
    off = np.full(spec.n_sites - 1, float(spec.B))
    off[0] = spec.C
    return ChainHamiltonian(diag, off)


@dataclass(frozen=True)
class BlockSpec:
    """Uniformly coupled block model: M target levels sharing one bath profile.

    ``energies`` are the target eigenvalues; level m sees the bath exactly
    like a single chain whose impurity energy equals energies[m].
    """

    B: float
    C: float
    energies: tuple[float, ...]
    n_sites: int

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(E) for E in self.energies))
        if len(self.energies) < 1:
            raise InvalidSpecError("energies must contain at least one level")
        if not all(math.isfinite(E) for E in self.energies):
            raise InvalidSpecError("target energies must be finite")
        # delegate the shared parameter checks
        ChainSpec(B=self.B, C=self.C, mu=self.energies[0], n_sites=self.n_sites)

    @property
    def block_dim(self) -> int:
        return len(self.energies)


def decompose_block(spec: BlockSpec) -> list[ChainSpec]:
    """Split the block model into independent chains, one per target level.

    The m-th chain keeps the shared B, C and n_sites and gets
    mu = energies[m]; the direct sum of the chain Hamiltonians equals the
    block matrix up to the interleaving reindexing of :func:`basis_index`.
    """
    return [ChainSpec(B=spec.B, C=spec.C, mu=E, n_sites=spec.n_sites) for E in spec.energies]


def basis_index(m: int, j: int, block_dim: int) -> int:
    """Flatten (target level m, chain site j) to the interleaved index m + M*j."""
    if block_dim < 1:
        raise InvalidSpecError(f"block_dim must be >= 1, got {block_dim}")
    if not 0 <= m < block_dim:
        raise InvalidSpecError(f"target index m={m} out of range for block_dim={block_dim}")
    if j < 0:
        raise InvalidSpecError(f"site index j={j} must be >= 0")
    return m + block_dim * j


def assemble_block_dense(spec: BlockSpec) -> np.ndarray:
    """Dense block matrix in the interleaved basis; test-only, keep M*N small."""
    M, N = spec.block_dim, spec.n_sites
    H = np.zeros((M * N, M * N))
    for m, E in enumerate(spec.energies):
        H[basis_index(m, 0, M), basis_index(m, 0, M)] = E
        for j in range(N - 1):
            hop = spec.C if j == 0 else spec.B
            a, b = basis_index(m, j, M), basis_index(m, j + 1, M)
            H[a, b] = H[b, a] = hop
    return H
