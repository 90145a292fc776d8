"""Multi-index machinery for alternating k-forms in an orthonormal frame.

Basis vectors e_I of Λ^k are indexed by strictly increasing tuples I and
ordered lexicographically. The inner product is the determinant one, so the
e_I are orthonormal and coefficient vectors use the plain dot product.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class MultiIndex:
    indices: Tuple[int, ...]
    m: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, 'indices', idx)
        if self.m < 0:
            raise DomainError(f"ambient dimension must be nonnegative, got {self.m}")
        if len(idx) > self.m:
            raise DomainError(f"degree {len(idx)} exceeds dimension {self.m}")
        if any(i < 0 or i >= self.m for i in idx):
            raise DomainError(f"indices {idx} out of range [0, {self.m})")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise DomainError(f"indices {idx} are not strictly increasing")

    @property
    def k(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


def _check_degree(m: int, k: int) -> None:
    if m < 0 or k < 0 or k > m:
        raise DomainError(f"degree k={k} is not in [0, {m}]")


@lru_cache(maxsize=None)
def _basis_tuples(m: int, k: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(combinations(range(m), k))


def enumerate_basis(m: int, k: int) -> List[MultiIndex]:
    _check_degree(m, k)
    return [MultiIndex(t, m) for t in _basis_tuples(m, k)]


def basis_size(m: int, k: int) -> int:
    _check_degree(m, k)
    return comb(m, k)


def wedge_rank(idx: MultiIndex) -> int:
    """Position of idx in the lexicographic enumeration of k-subsets of range(m)."""
    if not isinstance(idx, MultiIndex):
        raise DomainError(f"expected a MultiIndex, got {type(idx).__name__}")
    m, k = idx.m, idx.k
    rank = 0
    prev = -1
    for s, i in enumerate(idx.indices):
        # subsets that agree on the first s entries and have a smaller s-th entry
        for j in range(prev + 1, i):
            rank += comb(m - 1 - j, k - 1 - s)
        prev = i
    return rank


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a sequence of distinct integers relative to its sorted order."""
    perm = list(perm)
    if len(set(perm)) != len(perm):
        return 0
    inversions = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                inversions += 1
    return -1 if inversions % 2 else 1


def interior_substitute(idx: MultiIndex, slot: int, j: int) -> Tuple[int, Optional[MultiIndex]]:
    """Put frame index j into position `slot` of idx and re-sort.

    Returns (0, None) when j already occurs elsewhere, otherwise the sign of
    the sorting permutation and the sorted multi-index.
    """
    if slot < 0 or slot >= idx.k:
        raise DomainError(f"slot {slot} out of range for degree {idx.k}")
    if j < 0 or j >= idx.m:
        raise DomainError(f"frame index {j} out of range [0, {idx.m})")
    replaced = list(idx.indices)
    replaced[slot] = j
    if len(set(replaced)) != len(replaced):
        return 0, None
    return permutation_sign(replaced), MultiIndex(tuple(sorted(replaced)), idx.m)


def basis_vector(m: int, k: int, idx: MultiIndex) -> np.ndarray:
    if idx.m != m or idx.k != k:
        raise DomainError(f"multi-index {idx.indices} does not live in Λ^{k} of dimension {m}")
    vec = np.zeros(basis_size(m, k))
    vec[wedge_rank(idx)] = 1.0
    return vec


def form_inner(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"coefficient vectors have shapes {a.shape} and {b.shape}")
    return float(a @ b)
