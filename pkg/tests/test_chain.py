import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from specdis import (
    BlockSpec,
    ChainSpec,
    InvalidSpecError,
    assemble_block_dense,
    basis_index,
    build_chain,
    decompose_block,
)


def test_free_chain_entries():
    h = build_chain(ChainSpec(B=1, C=1, mu=0, n_sites=4))
    assert np.array_equal(h.diag, np.zeros(4))
    assert np.array_equal(h.offdiag, np.ones(3))


def test_boundary_impurity_entries():
    h = build_chain(ChainSpec(B=1, C=0.5, mu=0.5, n_sites=3))
    assert np.array_equal(h.diag, [0.5, 0.0, 0.0])
    assert np.array_equal(h.offdiag, [0.5, 1.0])


def test_stronger_bulk_entries():
    h = build_chain(ChainSpec(B=2, C=1, mu=0, n_sites=5))
    assert np.array_equal(h.offdiag, [1.0, 2.0, 2.0, 2.0])
    assert np.array_equal(h.diag, np.zeros(5))


def test_dense_form_is_symmetric_tridiagonal():
    dense = build_chain(ChainSpec(B=1.3, C=0.4, mu=-0.7, n_sites=6)).to_dense()
    assert np.array_equal(dense, dense.T)
    assert np.all(dense[np.abs(np.subtract.outer(range(6), range(6))) > 1] == 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(B=0.0, C=1, mu=0, n_sites=4),
        dict(B=-1.0, C=1, mu=0, n_sites=4),
        dict(B=1.0, C=-0.1, mu=0, n_sites=4),
        dict(B=1.0, C=1, mu=float("nan"), n_sites=4),
        dict(B=1.0, C=1, mu=0, n_sites=1),
        dict(B=float("inf"), C=1, mu=0, n_sites=4),
    ],
)
def test_invalid_chain_specs_rejected(kwargs):
    with pytest.raises(InvalidSpecError):
        ChainSpec(**kwargs)


def test_dimensionless_ratios():
    spec = ChainSpec(B=2.0, C=1.0, mu=3.0, n_sites=10)
    assert spec.mu_B == 1.5
    assert spec.C_B == 0.5
    assert spec.valid_horizon == 2.5


@given(n=st.integers(2, 90), b=st.floats(0.05, 5.0))
@settings(max_examples=50, deadline=None)
def test_free_chain_spectrum_stays_inside_band(n, b):
    h = build_chain(ChainSpec(B=b, C=b, mu=0.0, n_sites=n))
    w = eigh_tridiagonal(h.diag, h.offdiag, eigvals_only=True)
    assert w.max() <= 2 * b + 1e-12
    assert w.min() >= -2 * b - 1e-12


def test_block_decomposition_assigns_one_energy_per_chain():
    block = BlockSpec(B=1.0, C=0.5, energies=(0.0, 1.0, 2.0, 3.0), n_sites=5)
    chains = decompose_block(block)
    assert [c.mu for c in chains] == [0.0, 1.0, 2.0, 3.0]
    assert all(c.B == 1.0 and c.C == 0.5 and c.n_sites == 5 for c in chains)


def test_single_level_block_is_a_plain_chain():
    block = BlockSpec(B=1.0, C=1.0, energies=(0.0,), n_sites=7)
    (only,) = decompose_block(block)
    direct = build_chain(ChainSpec(B=1.0, C=1.0, mu=0.0, n_sites=7))
    via_block = build_chain(only)
    assert np.array_equal(direct.diag, via_block.diag)
    assert np.array_equal(direct.offdiag, via_block.offdiag)


def test_block_spectrum_is_union_of_chain_spectra():
    block = BlockSpec(B=1.0, C=1.0, energies=(0.3, -0.3), n_sites=6)
    w_block = np.linalg.eigvalsh(assemble_block_dense(block))
    w_chains = np.sort(
        np.concatenate(
            [np.linalg.eigvalsh(build_chain(c).to_dense()) for c in decompose_block(block)]
        )
    )
    assert np.allclose(w_block, w_chains, atol=1e-12, rtol=0)


def test_block_matrix_is_interleaved_direct_sum():
    block = BlockSpec(B=1.0, C=0.5, energies=(0.0, 1.0, -2.0), n_sites=4)
    M, N = block.block_dim, block.n_sites
    direct_sum = np.zeros((M * N, M * N))
    for m, chain in enumerate(decompose_block(block)):
        direct_sum[m * N : (m + 1) * N, m * N : (m + 1) * N] = build_chain(chain).to_dense()
    perm = np.zeros((M * N, M * N))
    for m in range(M):
        for j in range(N):
            perm[basis_index(m, j, M), m * N + j] = 1.0
    assert np.array_equal(perm @ direct_sum @ perm.T, assemble_block_dense(block))


def test_empty_energy_list_rejected():
    with pytest.raises(InvalidSpecError):
        BlockSpec(B=1.0, C=1.0, energies=(), n_sites=4)


@pytest.mark.parametrize("m,j,block_dim,expected", [(0, 0, 4, 0), (2, 3, 4, 14), (3, 1, 4, 7)])
def test_basis_index_examples(m, j, block_dim, expected):
    assert basis_index(m, j, block_dim) == expected


@given(m=st.integers(0, 63), j=st.integers(0, 1000), extra=st.integers(1, 8))
@settings(max_examples=200, deadline=None)
def test_basis_index_is_invertible(m, j, extra):
    block_dim = m + extra
    flat = basis_index(m, j, block_dim)
    assert flat % block_dim == m
    assert flat // block_dim == j


@pytest.mark.parametrize("m,j,block_dim", [(-1, 0, 4), (4, 0, 4), (0, -1, 4), (0, 0, 0)])
def test_basis_index_rejects_out_of_range(m, j, block_dim):
    with pytest.raises(InvalidSpecError):
        basis_index(m, j, block_dim)
