from itertools import combinations, permutations
from math import comb

import numpy as np
import pytest

from src.errors import DomainError
from src.exterior_algebra import (
    MultiIndex,
    basis_size,
    basis_vector,
    enumerate_basis,
    form_inner,
    interior_substitute,
    permutation_sign,
    wedge_rank,
)


@pytest.mark.parametrize('m', range(0, 8))
def test_basis_sizes_are_binomial(m):
    for k in range(m + 1):
        assert basis_size(m, k) == comb(m, k)
        assert len(enumerate_basis(m, k)) == comb(m, k)


def test_bivectors_of_four_space_in_lexicographic_order():
    basis = [idx.indices for idx in enumerate_basis(4, 2)]
    assert basis == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


@pytest.mark.parametrize('m', [3, 5, 7])
def test_wedge_rank_inverts_enumeration(m):
    for k in range(m + 1):
        for position, idx in enumerate(enumerate_basis(m, k)):
            assert wedge_rank(idx) == position


def test_wedge_rank_known_values():
    assert wedge_rank(MultiIndex((0, 1), 4)) == 0
    assert wedge_rank(MultiIndex((2, 3), 4)) == 5
    assert wedge_rank(MultiIndex((1, 2, 4), 5)) == 7


@pytest.mark.parametrize('bad', [(1, 1), (2, 1), (0, 5)])
def test_invalid_multi_indices_rejected(bad):
    with pytest.raises(DomainError):
        MultiIndex(bad, 4)


def test_degree_out_of_range():
    with pytest.raises(DomainError):
        enumerate_basis(3, 4)
    with pytest.raises(DomainError):
        basis_size(3, -1)


def test_permutation_sign_matches_transposition_count():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((2, 0, 1)) == 1
    assert permutation_sign((0, 0, 1)) == 0
    # the sign is multiplicative under composition
    for p in permutations(range(4)):
        for q in permutations(range(4)):
            composed = tuple(p[q[i]] for i in range(4))
            assert permutation_sign(composed) == permutation_sign(p) * permutation_sign(q)


def test_interior_substitute_known_values():
    idx = MultiIndex((0, 2), 4)
    assert interior_substitute(idx, 0, 0) == (1, idx)
    assert interior_substitute(idx, 0, 3) == (-1, MultiIndex((2, 3), 4))
    assert interior_substitute(idx, 1, 0) == (0, None)
    assert interior_substitute(idx, 1, 1) == (1, MultiIndex((0, 1), 4))


def test_interior_substitute_agrees_with_brute_force():
    m = 5
    for k in range(1, m + 1):
        for tup in combinations(range(m), k):
            idx = MultiIndex(tup, m)
            for slot in range(k):
                for j in range(m):
                    replaced = list(tup)
                    replaced[slot] = j
                    sign, target = interior_substitute(idx, slot, j)
                    assert sign == permutation_sign(replaced)
                    if sign:
                        assert target.indices == tuple(sorted(replaced))


def test_interior_substitute_rejects_bad_slot():
    with pytest.raises(DomainError):
        interior_substitute(MultiIndex((0, 1), 3), 2, 0)
    with pytest.raises(DomainError):
        interior_substitute(MultiIndex((0, 1), 3), 0, 3)


def test_basis_vectors_are_orthonormal():
    m, k = 5, 2
    vectors = [basis_vector(m, k, idx) for idx in enumerate_basis(m, k)]
    gram = np.array([[form_inner(a, b) for b in vectors] for a in vectors])
    np.testing.assert_array_equal(gram, np.eye(comb(m, k)))


def test_form_inner_shape_mismatch():
    with pytest.raises(DomainError):
        form_inner(np.zeros(3), np.zeros(4))
