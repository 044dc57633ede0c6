import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jqfsim.hilbert import (InvalidDimensionError, annihilation, basis_state, embed, expectation,
                            ground_state, hermiticity_error, min_eigenvalue, number, projector)


def test_annihilation_entries():
    a = annihilation(4)
    assert np.allclose(np.diag(a, 1), np.sqrt([1, 2, 3]))
    assert np.count_nonzero(a) == 3


def test_annihilation_rejects_single_level():
    with pytest.raises(InvalidDimensionError):
        annihilation(1)


@given(st.integers(2, 8))
def test_commutator_truncated(n):
    a = annihilation(n)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(n)
    expected[-1, -1] = 1 - n  # truncation artefact in the top level
    assert np.allclose(comm, expected)


@given(st.integers(2, 8))
def test_number_is_adag_a(n):
    a = annihilation(n)
    assert np.allclose(number(n), a.conj().T @ a)


def test_projector_bounds():
    assert projector(1, 3)[1, 1] == 1
    with pytest.raises(ValueError):
        projector(3, 3)


def test_embed_order_dq_first():
    c1 = embed(annihilation(4), 0, [4, 2])
    c2 = embed(annihilation(2), 1, [4, 2])
    assert c1.shape == (8, 8)
    assert np.allclose(c1, np.kron(annihilation(4), np.eye(2)))
    assert np.allclose(c2, np.kron(np.eye(4), annihilation(2)))
    # different subsystems commute
    assert np.allclose(c1 @ c2, c2 @ c1)


def test_embed_dim_mismatch():
    with pytest.raises(InvalidDimensionError):
        embed(annihilation(3), 0, [4, 2])


def test_expectation_and_states():
    rho = basis_state([1, 0], [4, 2])
    n1 = embed(number(4), 0, [4, 2])
    assert expectation(rho, n1) == pytest.approx(1.0)
    g = ground_state([4, 2])
    assert g[0, 0] == 1 and np.trace(g) == 1
    with pytest.raises(InvalidDimensionError):
        expectation(rho, np.eye(3))


@settings(max_examples=30)
@given(st.integers(0, 2**31 - 1))
def test_checks_on_random_density(seed):
    from conftest import random_density
    rho = random_density(np.random.default_rng(seed), 6)
    assert hermiticity_error(rho) < 1e-12
    assert min_eigenvalue(rho) > -1e-12
