"""Curvature tensors, the curvature operator on Λ², and the spectral toolkit.

Sign convention: R_{ijkl} = g(R(e_i, e_j) e_l, e_k) with
R(X, Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y], so the unit round sphere has R_{ijij} = +1
and sectional curvatures are K(e_i, e_j) = R_{ijij}. `convention_self_test`
pins this once per process.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from .config import get_settings
from .errors import ConsistencyError, DomainError, NumericalError
from .exterior_algebra import enumerate_basis, wedge_rank
from .metric_catalog import (
    ChartSpec,
    HomogeneousSpec,
    ManifoldSpec,
    ProductSpec,
    catalog_get,
    metric_derivatives,
    validate_spd,
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
# slack on the running-error bound for the einsum reductions
ROUNDING_FACTOR = 4.0


@dataclass(frozen=True, eq=False)
class CurvaturePoint:
    m: int
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    frame: Optional[np.ndarray] = None
    point: Optional[np.ndarray] = None
    # absolute rounding-error bound on the entries of riemann
    rounding: float = 0.0

    def sectional(self, i: int, j: int) -> float:
        return float(self.riemann[i, j, i, j])


@dataclass(frozen=True, eq=False)
class CurvOpMatrix:
    N: int
    entries: np.ndarray
    spectrum: np.ndarray
    op_norm: float
    frob_norm: float

    @property
    def lambda_min(self) -> float:
        return float(self.spectrum[0]) if self.N else 0.0

    @property
    def lambda_max(self) -> float:
        return float(self.spectrum[-1]) if self.N else 0.0


# ---------------------------------------------------------------------------
# connection and curvature

def christoffel(spec: Union[ManifoldSpec, ChartSpec], x) -> np.ndarray:
    """Γ[a, b, c] = Γ^c_{ab} of the Levi-Civita connection at x."""
    g, dg, _ = metric_derivatives(spec, x)
    return _christoffel_from(g, dg)


def _christoffel_from(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    try:
        g_inv = linalg.inv(g)
    except linalg.LinAlgError as exc:
        raise NumericalError("metric is singular") from exc
    # lowered[a, b, d] = 1/2 (d_a g_bd + d_b g_ad - d_d g_ab)
    lowered = 0.5 * (dg + np.einsum('bad->abd', dg) - np.einsum('dab->abd', dg))
    return np.einsum('cd,abd->abc', g_inv, lowered)


def _riemann_terms(g, g_inv, dg, d2g, sign: float) -> np.ndarray:
    # sign = -1 gives R_abcd; sign = +1 on absolute values gives the summed term magnitudes
    lowered = 0.5 * (dg + np.einsum('bad->abd', dg) + sign * np.einsum('dab->abd', dg))
    gamma = np.einsum('cd,abd->abc', g_inv, lowered)
    second = 0.5 * (
        np.einsum('bcad->abcd', d2g)
        + np.einsum('adbc->abcd', d2g)
        + sign * np.einsum('acbd->abcd', d2g)
        + sign * np.einsum('bdac->abcd', d2g)
    )
    quadratic = (
        np.einsum('ef,bce,adf->abcd', g, gamma, gamma, optimize=True)
        + sign * np.einsum('ef,bde,acf->abcd', g, gamma, gamma, optimize=True)
    )
    return second + quadratic


def _coordinate_riemann(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray) -> np.ndarray:
    try:
        g_inv = linalg.inv(g)
    except linalg.LinAlgError as exc:
        raise NumericalError("metric is singular") from exc
    return _riemann_terms(g, g_inv, dg, d2g, -1.0)


def rounding_floor(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray, frame: np.ndarray) -> float:
    """Running-error bound on the frame components of R computed from (g, dg, d2g).

    Near a coordinate singularity the coordinate components cancel to many
    digits and the frame multiplies that noise by powers of 1/sqrt(g), so
    symmetry residuals must be judged against this floor.
    """
    magnitude = _riemann_terms(np.abs(g), np.abs(linalg.inv(g)), np.abs(dg), np.abs(d2g), 1.0)
    spread = _to_frame(magnitude, np.abs(frame))
    return ROUNDING_FACTOR * g.shape[0] * EPS * float(np.max(spread)) if spread.size else 0.0


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt on the coordinate frame, no pivoting; columns are frame vectors."""
    lower = validate_spd(g)
    return linalg.solve_triangular(lower, np.eye(g.shape[0]), lower=True).T


def _to_frame(tensor: np.ndarray, frame: np.ndarray) -> np.ndarray:
    return np.einsum('abcd,ai,bj,ck,dl->ijkl', tensor, frame, frame, frame, frame, optimize=True)


def homogeneous_riemann(structure_constants: np.ndarray) -> np.ndarray:
    c = np.asarray(structure_constants, dtype=float)
    # Koszul: Γ[i, j, k] = g(∇_{e_i} e_j, e_k)
    gamma = 0.5 * (c - np.einsum('jki->ijk', c) + np.einsum('kij->ijk', c))
    return (
        np.einsum('jlm,imk->ijkl', gamma, gamma)
        - np.einsum('ilm,jmk->ijkl', gamma, gamma)
        - np.einsum('ijm,mlk->ijkl', c, gamma)
    )


def symmetry_residuals(riemann: np.ndarray) -> Dict[str, float]:
    def peak(t):
        return float(np.max(np.abs(t))) if t.size else 0.0

    return {
        'antisymmetry_first_pair': peak(riemann + np.einsum('jikl->ijkl', riemann)),
        'antisymmetry_second_pair': peak(riemann + np.einsum('ijlk->ijkl', riemann)),
        'pair_symmetry': peak(riemann - np.einsum('klij->ijkl', riemann)),
        'first_bianchi': peak(riemann + np.einsum('jkil->ijkl', riemann) + np.einsum('kijl->ijkl', riemann)),
    }


def _check_symmetries(riemann: np.ndarray, tolerance: float, where, rounding: float = 0.0) -> None:
    norm = float(np.max(np.abs(riemann))) if riemann.size else 0.0
    residuals = symmetry_residuals(riemann)
    worst = max(residuals.values(), default=0.0)
    allowed = tolerance * norm + rounding + 1e-14
    if worst > allowed:
        name = max(residuals, key=residuals.get)
        raise ConsistencyError(
            f"curvature {name} residual {worst:.3e} exceeds {tolerance:.1e} x |R| + rounding {rounding:.1e} "
            f"= {allowed:.3e} at {where}"
        )


def _contract(riemann: np.ndarray) -> Tuple[np.ndarray, float]:
    ricci = np.einsum('ijkj->ik', riemann)
    return ricci, float(np.trace(ricci))


def _point_from(riemann: np.ndarray, frame=None, point=None, rounding: float = 0.0) -> CurvaturePoint:
    ricci, scalar = _contract(riemann)
    return CurvaturePoint(m=riemann.shape[0], riemann=riemann, ricci=ricci, scalar=scalar,
                          frame=frame, point=point, rounding=rounding)


class _FrameCurvature(NamedTuple):
    riemann: np.ndarray
    frame: Optional[np.ndarray]
    tolerance: float
    rounding: float


def _chart_riemann(chart: ChartSpec, x: np.ndarray) -> _FrameCurvature:
    g, dg, d2g = metric_derivatives(chart, x)
    frame = orthonormal_frame(g)
    riemann = _to_frame(_coordinate_riemann(g, dg, d2g), frame)
    tolerance = get_settings().tolerances.symmetry
    if chart.dg is None or chart.d2g is None:
        tolerance = get_settings().tolerances.symmetry_finite_difference
    return _FrameCurvature(riemann, frame, tolerance, rounding_floor(g, dg, d2g, frame))


def _geometry_riemann(geometry, x: np.ndarray) -> _FrameCurvature:
    if isinstance(geometry, ChartSpec):
        return _chart_riemann(geometry, x)
    if isinstance(geometry, HomogeneousSpec):
        return _FrameCurvature(homogeneous_riemann(geometry.structure_constants), None,
                               get_settings().tolerances.symmetry, 0.0)
    if isinstance(geometry, ProductSpec):
        split = geometry.first.chart_dim
        first = _geometry_riemann(geometry.first.geometry, x[:split])
        second = _geometry_riemann(geometry.second.geometry, x[split:])
        m1, m = first.riemann.shape[0], geometry.m
        riemann = np.zeros((m, m, m, m))
        riemann[:m1, :m1, :m1, :m1] = first.riemann
        riemann[m1:, m1:, m1:, m1:] = second.riemann
        return _FrameCurvature(riemann, None, max(first.tolerance, second.tolerance),
                               max(first.rounding, second.rounding))
    raise DomainError(f"unsupported geometry {type(geometry).__name__}")


def curvature_at(spec: ManifoldSpec, x=None) -> CurvaturePoint:
    convention_self_test()
    if spec.chart_dim:
        if x is None:
            raise DomainError(f"{spec.name} needs a chart point")
        x = np.asarray(x, dtype=float)
        if x.shape != (spec.chart_dim,):
            raise DomainError(f"{spec.name} expects {spec.chart_dim} coordinates, got shape {x.shape}")
    else:
        x = np.zeros(0)
    result = _geometry_riemann(spec.geometry, x)
    _check_symmetries(result.riemann, result.tolerance, x.tolist() if x.size else spec.name, result.rounding)
    return _point_from(result.riemann, frame=result.frame, point=x if x.size else None, rounding=result.rounding)


@lru_cache(maxsize=1)
def convention_self_test() -> bool:
    sphere = catalog_get('sphere', [2, 1.0])
    riemann = _chart_riemann(sphere.geometry, np.array([1.0, 2.0])).riemann
    if not math.isclose(riemann[0, 1, 0, 1], 1.0, rel_tol=1e-10):
        raise ConsistencyError(f"unit sphere gave R_0101 = {riemann[0, 1, 0, 1]!r}; sign convention is broken")
    logger.debug("Curvature sign convention verified on the unit 2-sphere")
    return True


def reframe(cp: CurvaturePoint, rotation: np.ndarray) -> CurvaturePoint:
    """The same curvature expressed in the frame f_i = sum_a rotation[a, i] e_a."""
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (cp.m, cp.m):
        raise DomainError(f"rotation must be {cp.m}x{cp.m}")
    riemann = _to_frame(cp.riemann, rotation)
    frame = None if cp.frame is None else cp.frame @ rotation
    # sum over a of |rotation[a, i]| is at most sqrt(m), four times over
    return _point_from(riemann, frame=frame, point=cp.point, rounding=cp.rounding * cp.m ** 2)


def sectional_curvature(cp: CurvaturePoint, i: int, j: int) -> float:
    if not (0 <= i < cp.m and 0 <= j < cp.m) or i == j:
        raise DomainError(f"sectional curvature needs two distinct frame indices, got ({i}, {j})")
    return cp.sectional(i, j)


# ---------------------------------------------------------------------------
# curvature operator

def _symmetric_spectrum(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros(0)
    try:
        values = linalg.eigh(matrix, eigvals_only=True)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    return np.sort(values, kind='stable')


def sorted_spectrum(matrix) -> np.ndarray:
    matrix = _as_symmetric(matrix)
    return _symmetric_spectrum(matrix)


def op_norm(matrix) -> float:
    spectrum = sorted_spectrum(matrix)
    return float(max(abs(spectrum[0]), abs(spectrum[-1]))) if spectrum.size else 0.0


def frob_norm(matrix) -> float:
    return float(np.linalg.norm(np.asarray(matrix, dtype=float), 'fro'))


@lru_cache(maxsize=None)
def _bivector_pairs(m: int) -> Tuple[np.ndarray, np.ndarray]:
    basis = enumerate_basis(m, 2)
    rows = np.zeros(len(basis), dtype=int)
    cols = np.zeros(len(basis), dtype=int)
    for idx in basis:
        rows[wedge_rank(idx)], cols[wedge_rank(idx)] = idx.indices
    return rows, cols


def assemble_curv_op(cp: CurvaturePoint) -> CurvOpMatrix:
    rows, cols = _bivector_pairs(cp.m)
    n = rows.size
    entries = cp.riemann[rows[:, None], cols[:, None], rows[None, :], cols[None, :]] if n else np.zeros((0, 0))
    asym = float(np.max(np.abs(entries - entries.T))) if n else 0.0
    allowed = get_settings().tolerances.operator_symmetry * max(1.0, float(np.max(np.abs(entries))) if n else 0.0)
    if asym > allowed + cp.rounding:
        raise ConsistencyError(
            f"curvature operator is not symmetric (residual {asym:.3e}, allowed {allowed + cp.rounding:.3e})"
        )
    entries = 0.5 * (entries + entries.T)
    spectrum = _symmetric_spectrum(entries)
    return CurvOpMatrix(
        N=n,
        entries=entries,
        spectrum=spectrum,
        op_norm=float(max(abs(spectrum[0]), abs(spectrum[-1]))) if n else 0.0,
        frob_norm=float(np.sqrt(np.sum(spectrum ** 2))),
    )


def partial_eig_sum(matrix: CurvOpMatrix, count: int) -> float:
    if count < 1 or count > matrix.N:
        raise DomainError(f"count must lie in [1, {matrix.N}], got {count}")
    return float(np.sum(matrix.spectrum[:count]))


def is_partially_nonnegative(matrix: CurvOpMatrix, count: int, tolerance: float = 1e-10) -> bool:
    """(λ1 + ... + λ_count) >= 0 up to tolerance x op_norm."""
    return partial_eig_sum(matrix, count) >= -tolerance * max(1.0, matrix.op_norm)


def sectional_bounds_check(cp: CurvaturePoint, matrix: CurvOpMatrix, tolerance: float = 1e-10) -> Dict[str, float]:
    """Frame sectional curvatures are diagonal values of the operator on unit simple bivectors."""
    sectional = np.array([cp.riemann[i, j, i, j] for i in range(cp.m) for j in range(i + 1, cp.m)])
    if sectional.size == 0:
        return {'min_sectional': 0.0, 'max_sectional': 0.0, 'containment_slack': 0.0,
                'sectional_bound': 0.0, 'holds': True}
    slack = min(sectional.min() - matrix.lambda_min, matrix.lambda_max - sectional.max())
    bound = math.sqrt(matrix.N) * matrix.op_norm
    pad = tolerance * max(1.0, matrix.op_norm)
    return {
        'min_sectional': float(sectional.min()),
        'max_sectional': float(sectional.max()),
        'containment_slack': float(slack),
        'sectional_bound': float(bound),
        'holds': bool(slack >= -pad and np.max(np.abs(sectional)) <= bound + pad),
    }


# ---------------------------------------------------------------------------
# matrix toolkit

def _as_symmetric(matrix, tolerance: float = 1e-10) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if matrix.size and np.max(np.abs(matrix - matrix.T)) > tolerance * scale:
        raise DomainError("matrix is not symmetric")
    return 0.5 * (matrix + matrix.T)


def weyl_gap(a, b, tolerance: Optional[float] = None) -> Tuple[float, float, bool]:
    a = _as_symmetric(a)
    b = _as_symmetric(b)
    if a.shape != b.shape:
        raise DomainError(f"shape mismatch: {a.shape} vs {b.shape}")
    if tolerance is None:
        tolerance = get_settings().tolerances.weyl
    gap = float(np.max(np.abs(sorted_spectrum(a) - sorted_spectrum(b)))) if a.size else 0.0
    bound = op_norm(a - b) if a.size else 0.0
    return gap, bound, gap <= bound + tolerance


def norm_sandwich_check(a, tolerance: Optional[float] = None) -> Tuple[float, float, bool]:
    a = _as_symmetric(a)
    if tolerance is None:
        tolerance = get_settings().tolerances.norm_sandwich
    op = op_norm(a) if a.size else 0.0
    frob = frob_norm(a)
    n = a.shape[0]
    return op, frob, (op <= frob + tolerance and frob <= math.sqrt(n) * op + tolerance)


def random_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


def random_orthogonal(m: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    # fix column signs so the distribution is Haar
    return q * np.sign(np.diag(r))


def weyl_equality_pair(n: int, shift: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """A = 0 and B = diag(shift, shift, 0, ...): the top two eigenvalues move by exactly |A - B|."""
    if n < 2:
        raise DomainError(f"the equality construction needs n >= 2, got {n}")
    b = np.zeros((n, n))
    b[0, 0] = b[1, 1] = shift
    return np.zeros((n, n)), b
