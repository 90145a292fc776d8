"""Curvature term Ric(·) of the Hodge Laplacian on k-forms at a single point.

Forms are coefficient vectors over the lexicographic orthonormal wedge basis.
The engine stores R with R(e_a, e_b) e_c = sum_d R_{abdc} e_d; the
Weitzenböck term uses the reversed-order curvature R(e_b, e_a), so Ric on
1-forms equals the Ricci endomorphism.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np

from .config import get_settings
from .curvature_engine import CurvaturePoint, assemble_curv_op, partial_eig_sum
from .errors import DomainError
from .exterior_algebra import basis_size, enumerate_basis, interior_substitute, wedge_rank

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FormVector:
    k: int
    m: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, 'coeffs', coeffs)
        if coeffs.shape != (basis_size(self.m, self.k),):
            raise DomainError(
                f"a {self.k}-form in dimension {self.m} needs {basis_size(self.m, self.k)} coefficients, got {coeffs.shape}"
            )

    def norm_squared(self) -> float:
        return float(self.coeffs @ self.coeffs)

    @classmethod
    def zeros(cls, m: int, k: int) -> 'FormVector':
        return cls(k=k, m=m, coeffs=np.zeros(basis_size(m, k)))

    @classmethod
    def basis(cls, m: int, k: int, rank: int) -> 'FormVector':
        coeffs = np.zeros(basis_size(m, k))
        coeffs[rank] = 1.0
        return cls(k=k, m=m, coeffs=coeffs)


@lru_cache(maxsize=None)
def _substitution_table(m: int, k: int):
    """For each basis rank, slot and frame index: (sign, rank of re-sorted index) or None."""
    table = []
    for idx in enumerate_basis(m, k):
        per_slot = []
        for slot in range(k):
            row = []
            for j in range(m):
                sign, target = interior_substitute(idx, slot, j)
                row.append(None if target is None else (sign, wedge_rank(target)))
            per_slot.append(row)
        table.append((idx.indices, per_slot))
    return table


def _check_form(cp: CurvaturePoint, alpha: FormVector) -> None:
    if alpha.m != cp.m:
        raise DomainError(f"form lives in dimension {alpha.m}, curvature in dimension {cp.m}")


def curvature_action(cp: CurvaturePoint, a: int, b: int, alpha: FormVector) -> FormVector:
    """(R(e_a, e_b) α)(X_1..X_k) = -sum_s α(X_1, .., R(e_a, e_b) X_s, .., X_k)."""
    if not (0 <= a < cp.m and 0 <= b < cp.m):
        raise DomainError(f"frame indices ({a}, {b}) out of range [0, {cp.m})")
    _check_form(cp, alpha)
    out = np.zeros_like(alpha.coeffs)
    block = cp.riemann[a, b]  # block[d, c]: component of R(e_a, e_b) e_c along e_d
    for rank, (indices, per_slot) in enumerate(_substitution_table(cp.m, alpha.k)):
        total = 0.0
        for slot, row in enumerate(per_slot):
            c = indices[slot]
            for d, hit in enumerate(row):
                if hit is None or block[d, c] == 0.0:
                    continue
                sign, target = hit
                total -= block[d, c] * sign * alpha.coeffs[target]
        out[rank] = total
    return FormVector(k=alpha.k, m=alpha.m, coeffs=out)


def weitzenbock_ric(cp: CurvaturePoint, alpha: FormVector) -> FormVector:
    _check_form(cp, alpha)
    k, m = alpha.k, alpha.m
    if k == 0 or k == m:
        return FormVector.zeros(m, k)
    out = np.zeros_like(alpha.coeffs)
    actions = {}
    for rank, (indices, per_slot) in enumerate(_substitution_table(m, k)):
        total = 0.0
        for slot, row in enumerate(per_slot):
            i = indices[slot]
            for j, hit in enumerate(row):
                if hit is None:
                    continue
                sign, target = hit
                key = (j, i)
                if key not in actions:
                    actions[key] = curvature_action(cp, j, i, alpha).coeffs
                total += sign * actions[key][target]
        out[rank] = total
    return FormVector(k=k, m=m, coeffs=out)


def weitzenbock_matrix(cp: CurvaturePoint, k: int) -> np.ndarray:
    n = basis_size(cp.m, k)
    columns = [weitzenbock_ric(cp, FormVector.basis(cp.m, k, r)).coeffs for r in range(n)]
    return np.array(columns).T if columns else np.zeros((0, 0))


def self_adjoint_residual(cp: CurvaturePoint, k: int) -> float:
    matrix = weitzenbock_matrix(cp, k)
    return float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0


def ricci_agreement(cp: CurvaturePoint) -> float:
    return float(np.max(np.abs(weitzenbock_matrix(cp, 1) - cp.ricci)))


def admissible_degrees(m: int, p: int) -> List[int]:
    return [k for k in range(1, m) if k <= p or k >= m - p]


def _kappa(cp: CurvaturePoint, p: int) -> float:
    count = cp.m - p
    return min(0.0, partial_eig_sum(assemble_curv_op(cp), count) / count)


def _unit_samples(n: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    draws = rng.standard_normal((samples, n))
    return draws / np.linalg.norm(draws, axis=1, keepdims=True)


def pw_bound_check(cp: CurvaturePoint, p: int, samples: int, seed: int,
                   tolerance: Optional[float] = None, details: Optional[Dict] = None):
    """Sampled check of <Ric(α), α> >= κ k(m-k) |α|^2 on admissible degrees.

    κ is the average of the m-p smallest curvature-operator eigenvalues,
    clamped at 0. When `details` is given it is filled per degree with the
    sampled minimum and the exact minimum eigen-slack.
    """
    m = cp.m
    if p < 1 or p > m // 2:
        raise DomainError(f"p must lie in [1, {m // 2}] for dimension {m}, got {p}")
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    if tolerance is None:
        tolerance = get_settings().tolerances.pw_slack
    kappa = _kappa(cp, p)
    rng = np.random.default_rng(seed)
    min_slack = np.inf
    for k in admissible_degrees(m, p):
        matrix = weitzenbock_matrix(cp, k)
        matrix = 0.5 * (matrix + matrix.T)
        floor = kappa * k * (m - k)
        forms = _unit_samples(matrix.shape[0], samples, rng)
        quadratic = np.einsum('si,ij,sj->s', forms, matrix, forms)
        sampled = float(np.min(quadratic) - floor)
        min_slack = min(min_slack, sampled)
        if details is not None:
            details[k] = {
                'kappa': kappa,
                'floor': floor,
                'sampled_min_slack': sampled,
                'eigen_min_slack': float(np.linalg.eigvalsh(matrix)[0] - floor),
            }
    logger.debug(f"pw check p={p}: kappa={kappa:.6g}, min slack {min_slack:.3e}")
    return float(min_slack), bool(min_slack >= -tolerance)


def weitzenbock_constant(n: int) -> int:
    """C(n) = max_{1<=k<=2n} k(2n-k), attained at k = n."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return n * n


def uniform_weitzenbock_floor(cp: CurvaturePoint, index: int, tolerance: Optional[float] = None) -> Dict[str, float]:
    """Check <Ric(α), α> >= -C(n)/i |α|^2 on every degree of a 2n-dimensional point.

    Only meaningful for a point whose κ = (λ1 + .. + λn)/n is at least -1/i,
    which the caller is expected to have established.
    """
    m = cp.m
    if m % 2:
        raise DomainError(f"the uniform floor needs even dimension, got {m}")
    if index < 1:
        raise DomainError(f"member index must be positive, got {index}")
    if tolerance is None:
        tolerance = get_settings().tolerances.pw_slack
    n = m // 2
    floor = -weitzenbock_constant(n) / index
    worst = np.inf
    for k in range(1, m):
        matrix = weitzenbock_matrix(cp, k)
        worst = min(worst, float(np.linalg.eigvalsh(0.5 * (matrix + matrix.T))[0]))
    return {'floor': floor, 'min_eigenvalue': float(worst), 'holds': bool(worst >= floor - tolerance)}
