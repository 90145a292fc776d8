"""Euler integrand of the curvature tensor and its integral over catalog manifolds."""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import gamma, roots_legendre

from .config import get_settings
from .curvature_engine import CurvaturePoint, assemble_curv_op, curvature_at
from .errors import DomainError, PreconditionError, UnsupportedSpecError
from .exterior_algebra import permutation_sign
from .metric_catalog import ChartSpec, HomogeneousSpec, ManifoldSpec, catalog_get
from .utils import ordered_sum, parallel_map

logger = logging.getLogger(__name__)

# c(m) = 1 / ((8 pi)^(m/2) (m/2)!), frozen after calibrating against chi(S^m) = 2
EULER_NORMALIZATION = {
    2: 1.0 / (8.0 * math.pi),
    4: 1.0 / (128.0 * math.pi ** 2),
    6: 1.0 / (3072.0 * math.pi ** 3),
}


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    points: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def nodes(self) -> List[Tuple[np.ndarray, float]]:
        return [(p, float(w)) for p, w in zip(self.points, self.weights)]

    @property
    def volume(self) -> float:
        return ordered_sum(self.weights)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class NodeValues:
    """Per-node integrand and curvature-operator extremes, in grid order."""
    integrand: np.ndarray
    lambda_min: np.ndarray
    lambda_abs_max: np.ndarray


Evaluation = Tuple[QuadratureGrid, NodeValues]


# ---------------------------------------------------------------------------
# the integrand

def _check_dimension(m: int) -> None:
    if m % 2:
        raise DomainError(f"the Euler integrand needs even dimension, got {m}")
    if m not in EULER_NORMALIZATION:
        raise DomainError(f"Euler integrand is only implemented for m <= 6, got {m}")
    if m == 6 and not get_settings().enable_dim6:
        raise UnsupportedSpecError("the 6-dimensional Euler integrand is disabled; set CURVLAB_ENABLE_DIM6=1")


@lru_cache(maxsize=None)
def _permutation_table(m: int) -> Tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(permutations(range(m))), dtype=int)
    signs = np.array([permutation_sign(p) for p in perms], dtype=float)
    return perms, signs


def _pfaffian_sum(riemann: np.ndarray) -> float:
    """sum over sigma, tau of sgn(sigma) sgn(tau) prod_i R[s(2i), s(2i+1), t(2i), t(2i+1)]."""
    m = riemann.shape[0]
    perms, signs = _permutation_table(m)
    product = np.ones((len(perms), len(perms)))
    for pair in range(m // 2):
        a, b = 2 * pair, 2 * pair + 1
        product *= riemann[perms[:, None, a], perms[:, None, b], perms[None, :, a], perms[None, :, b]]
    return float(signs @ product @ signs)


def euler_normalization(m: int) -> float:
    _check_dimension(m)
    return EULER_NORMALIZATION[m]


def calibrate_normalization(m: int) -> float:
    """Recompute c(m) from the unit sphere, where the integral must equal 2."""
    if m not in EULER_NORMALIZATION:
        raise DomainError(f"calibration is available for m in {sorted(EULER_NORMALIZATION)}, got {m}")
    sphere = catalog_get('sphere', [m, 1.0])
    x = np.full(m, math.pi / 2)
    raw = _pfaffian_sum(curvature_at(sphere, x).riemann)
    volume = 2 * math.pi ** ((m + 1) / 2) / gamma((m + 1) / 2)
    return float(2.0 / (raw * volume))


def euler_integrand(cp: CurvaturePoint) -> float:
    _check_dimension(cp.m)
    return EULER_NORMALIZATION[cp.m] * _pfaffian_sum(cp.riemann)


def gauss_bonnet_oracle_4d(cp: CurvaturePoint) -> float:
    """(|Rm|^2 - 4|Ric|^2 + s^2) / (32 pi^2) with unrestricted index sums."""
    if cp.m != 4:
        raise DomainError(f"the 4-dimensional oracle needs m = 4, got {cp.m}")
    rm = float(np.sum(cp.riemann ** 2))
    ric = float(np.sum(cp.ricci ** 2))
    return (rm - 4.0 * ric + cp.scalar ** 2) / (32.0 * math.pi ** 2)


def euler_integrand_bound(m: int, bound: float) -> float:
    """Upper bound for |P| when every |R_ijkl| <= bound."""
    if bound < 0:
        raise DomainError(f"curvature bound must be nonnegative, got {bound}")
    _check_dimension(m)
    return EULER_NORMALIZATION[m] * math.factorial(m) ** 2 * bound ** (m // 2)


def volume_floor(m: int, bound: float, chi: int) -> float:
    """Smallest volume compatible with chi when the curvature operator norm is at most bound."""
    sup = euler_integrand_bound(m, bound)
    if sup == 0.0:
        return 0.0 if chi == 0 else math.inf
    return abs(chi) / sup


# ---------------------------------------------------------------------------
# quadrature

def _axis_rule(lower: float, upper: float, order: int, cyclic: bool, compactified: bool):
    if cyclic:
        return np.array([0.5 * (lower + upper)]), np.array([upper - lower])
    nodes, weights = roots_legendre(order)
    if compactified:
        half = math.pi / 4
        u = half * (nodes + 1.0)
        return lower + np.tan(u), half * weights / np.cos(u) ** 2
    half = 0.5 * (upper - lower)
    return lower + half * (nodes + 1.0), half * weights


def _chart_grid(chart: ChartSpec, order: int) -> Tuple[np.ndarray, np.ndarray]:
    if not chart.covers_full_measure:
        raise UnsupportedSpecError("chart does not cover a full-measure subset of the manifold")
    rules = [
        _axis_rule(chart.lower[a], chart.upper[a], order, a in chart.cyclic_axes, a in chart.compactified_axes)
        for a in range(chart.m)
    ]
    mesh = np.meshgrid(*[r[0] for r in rules], indexing='ij')
    points = np.stack([axis.ravel() for axis in mesh], axis=1)
    weight_mesh = np.meshgrid(*[r[1] for r in rules], indexing='ij')
    weights = np.prod(np.stack([w.ravel() for w in weight_mesh], axis=1), axis=1)
    density = np.array([math.sqrt(np.linalg.det(chart.g(x))) for x in points])
    return points, weights * density


def _grid(spec: ManifoldSpec, order: int) -> Tuple[np.ndarray, np.ndarray]:
    geometry = spec.geometry
    if isinstance(geometry, ChartSpec):
        return _chart_grid(geometry, order)
    if isinstance(geometry, HomogeneousSpec):
        if spec.volume is None:
            raise UnsupportedSpecError(f"{spec.name} is homogeneous but has no volume metadata")
        return np.zeros((1, 0)), np.array([float(spec.volume)])
    p1, w1 = _grid(geometry.first, order)
    p2, w2 = _grid(geometry.second, order)
    points = np.concatenate([np.repeat(p1, len(p2), axis=0), np.tile(p2, (len(p1), 1))], axis=1)
    return points, np.outer(w1, w2).ravel()


def build_quadrature(spec: ManifoldSpec, order: Optional[int] = None) -> QuadratureGrid:
    if order is None:
        order = get_settings().order
    if order < 1:
        raise DomainError(f"quadrature order must be positive, got {order}")
    points, weights = _grid(spec, order)
    logger.debug(f"Built {len(weights)} quadrature nodes for {spec.name} at order {order}")
    return QuadratureGrid(points=points, weights=weights, order=order)


def evaluate_nodes(spec: ManifoldSpec, grid: QuadratureGrid, threads: Optional[int] = None) -> NodeValues:
    _check_dimension(spec.m)
    if threads is None:
        threads = get_settings().threads
    logger.info(f"Evaluating {len(grid)} quadrature nodes for {spec.name}")

    def evaluate(point):
        cp = curvature_at(spec, point if point.size else None)
        spectrum = assemble_curv_op(cp).spectrum
        return euler_integrand(cp), float(spectrum[0]), float(np.max(np.abs(spectrum)))

    values = parallel_map(evaluate, list(grid.points), threads)
    table = np.array(values, dtype=float).reshape(-1, 3)
    return NodeValues(integrand=table[:, 0], lambda_min=table[:, 1], lambda_abs_max=table[:, 2])


def integrate(spec: ManifoldSpec, order: Optional[int] = None, threads: Optional[int] = None) -> Evaluation:
    """Quadrature grid of spec together with its evaluated nodes, shareable between checks."""
    _require_integrable(spec)
    grid = build_quadrature(spec, order)
    return grid, evaluate_nodes(spec, grid, threads)


def _require_integrable(spec: ManifoldSpec) -> None:
    if spec.m % 2:
        raise UnsupportedSpecError(f"{spec.name} has odd dimension {spec.m}; its Euler characteristic vanishes trivially")


def euler_characteristic(spec: ManifoldSpec, order: Optional[int] = None,
                         threads: Optional[int] = None,
                         evaluation: Optional[Evaluation] = None) -> Tuple[float, Optional[float]]:
    _require_integrable(spec)
    grid, values = evaluation or integrate(spec, order, threads)
    chi_est = ordered_sum(grid.weights * values.integrand)
    residual = None if spec.euler_char is None else abs(chi_est - spec.euler_char)
    logger.info(f"{spec.name}: chi estimate {chi_est:.9f}" + ("" if residual is None else f", residual {residual:.3e}"))
    return chi_est, residual


def nonneg_operator_implies_nonneg_integrand(spec: ManifoldSpec, order: Optional[int] = None,
                                             threads: Optional[int] = None, evaluation: Optional[Evaluation] = None,
                                             tolerance: Optional[float] = None) -> int:
    """Count nodes with a nonnegative curvature operator but a negative integrand."""
    _require_integrable(spec)
    if tolerance is None:
        tolerance = get_settings().tolerances.integrand_sign
    grid, values = evaluation or integrate(spec, order, threads)
    nonnegative = values.lambda_min >= -tolerance
    violations = int(np.count_nonzero(nonnegative & (values.integrand < -tolerance)))
    if violations:
        logger.warning(f"Found {violations} nodes of {spec.name} with nonnegative operator and negative integrand")
    return violations


def volume_lower_bound_check(spec: ManifoldSpec, bound: float, order: Optional[int] = None,
                             threads: Optional[int] = None, details: Optional[Dict] = None,
                             evaluation: Optional[Evaluation] = None):
    """|chi| <= sup|P| * Vol, with every operator eigenvalue bounded by `bound` in absolute value.

    Vol is the stored volume when known, otherwise the quadrature volume.
    `details`, when given, receives the residual and the explicit volume floor.
    """
    _require_integrable(spec)
    if spec.euler_char is None:
        raise UnsupportedSpecError(f"{spec.name} has no Euler characteristic metadata")
    if bound < 0:
        raise DomainError(f"eigenvalue bound must be nonnegative, got {bound}")
    grid, values = evaluation or integrate(spec, order, threads)
    offending = np.flatnonzero(values.lambda_abs_max > bound * (1 + 1e-12) + 1e-12)
    if offending.size:
        node = grid.points[offending[0]]
        raise PreconditionError(
            f"|lambda| = {values.lambda_abs_max[offending[0]]:.6g} exceeds {bound:g} at node {node.tolist()}",
            node=node.tolist(),
        )
    sup_p = float(np.max(np.abs(values.integrand)))
    vol = float(spec.volume) if spec.volume is not None else grid.volume
    chi = abs(spec.euler_char)
    holds = chi <= sup_p * vol + get_settings().tolerances.volume_bound
    if details is not None:
        floor = volume_floor(spec.m, bound, spec.euler_char)
        details.update({
            'residual': sup_p * vol - chi,
            'volume_floor': floor,
            'respects_floor': bool(vol >= floor * (1 - 1e-12)),
            'quadrature_volume': grid.volume,
        })
    return sup_p, vol, bool(holds)
