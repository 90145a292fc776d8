"""Catalog of test manifolds and their trusted analytic metadata.

Chart metrics are written once in sympy; their first and second partials are
differentiated symbolically and lambdified to numpy, so chart entries carry
closed-form derivatives. Charts without derivative maps fall back to
Richardson-extrapolated central differences in `metric_derivatives`.
"""
import logging
import math
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy import linalg
from scipy.special import gamma

from .errors import ConfigurationError, DomainError, MetricValidationError

logger = logging.getLogger(__name__)

MetricMap = Callable[[np.ndarray], np.ndarray]

EPS = np.finfo(float).eps
FIRST_STEP = EPS ** (1.0 / 3.0)
# second differences lose two orders to rounding; eps^(1/6) balances that
# against the h^4 truncation left after one Richardson level
SECOND_STEP = EPS ** (1.0 / 6.0)

JACOBI_TOLERANCE = 1e-12

# Upper bound for the diameter of the integer-lattice Heisenberg quotient when
# the centre direction has length eps <= 1: every coset has a representative
# within distance 1/2 + 1/2 + 1/2 of the identity, and the quotient diameter is
# at most twice that radius.
HEISENBERG_DIAMETER_BOUND = 3.0


@dataclass(frozen=True)
class Diameter:
    value: float
    exact: bool = True

    @property
    def flag(self) -> str:
        return 'exact' if self.exact else 'upper_bound'


@dataclass(frozen=True, eq=False)
class ChartSpec:
    m: int
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    g: MetricMap
    dg: Optional[MetricMap] = None
    d2g: Optional[MetricMap] = None
    covers_full_measure: bool = False
    # coordinates the metric does not depend on
    cyclic_axes: Tuple[int, ...] = ()
    # half-line axes integrated through x = tan(u), u in (0, pi/2)
    compactified_axes: Tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class HomogeneousSpec:
    m: int
    structure_constants: np.ndarray


@dataclass(frozen=True, eq=False)
class ProductSpec:
    first: 'ManifoldSpec'
    second: 'ManifoldSpec'

    @property
    def m(self) -> int:
        return self.first.m + self.second.m


Geometry = Union[ChartSpec, HomogeneousSpec, ProductSpec]


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    name: str
    geometry: Geometry
    euler_char: Optional[int] = None
    diameter: Optional[Diameter] = None
    volume: Optional[float] = None
    # user-asserted topology, never computed
    infinite_pi1: bool = False
    betti: Optional[Tuple[int, ...]] = None

    @property
    def m(self) -> int:
        return self.geometry.m

    @property
    def is_homogeneous(self) -> bool:
        return isinstance(self.geometry, HomogeneousSpec)

    @property
    def chart_dim(self) -> int:
        return chart_dimension(self.geometry)


def chart_dimension(geometry: Geometry) -> int:
    if isinstance(geometry, ChartSpec):
        return geometry.m
    if isinstance(geometry, HomogeneousSpec):
        return 0
    return geometry.first.chart_dim + geometry.second.chart_dim


# ---------------------------------------------------------------------------
# symbolic charts

def _lambdify(coords, expr) -> MetricMap:
    fn = sympy.lambdify([tuple(coords)], expr, 'numpy')

    def evaluate(x: np.ndarray) -> np.ndarray:
        return np.array(fn(tuple(np.asarray(x, dtype=float))), dtype=float)

    return evaluate


def symbolic_chart(coords: Sequence[sympy.Symbol], metric: sympy.Matrix, lower, upper, **kwargs) -> ChartSpec:
    m = len(coords)
    metric = sympy.Matrix(metric)
    first = [[[sympy.diff(metric[i, j], coords[a]) for j in range(m)] for i in range(m)] for a in range(m)]
    second = [[[[sympy.diff(first[a][i][j], coords[b]) for j in range(m)] for i in range(m)]
               for b in range(m)] for a in range(m)]
    return ChartSpec(
        m=m,
        lower=tuple(float(v) for v in lower),
        upper=tuple(float(v) for v in upper),
        g=_lambdify(coords, metric.tolist()),
        dg=_lambdify(coords, first),
        d2g=_lambdify(coords, second),
        **kwargs,
    )


@lru_cache(maxsize=None)
def _unit_sphere_chart(m: int) -> ChartSpec:
    coords = sympy.symbols(f'x0:{m}', real=True)
    diagonal = []
    factor = sympy.Integer(1)
    for a in range(m):
        diagonal.append(factor)
        factor = factor * sympy.sin(coords[a]) ** 2
    logger.debug(f"Differentiating spherical-coordinate metric of S^{m}")
    return symbolic_chart(
        coords, sympy.diag(*diagonal),
        lower=[0.0] * m,
        upper=[math.pi] * (m - 1) + [2 * math.pi],
        covers_full_measure=True,
        cyclic_axes=(m - 1,),
    )


@lru_cache(maxsize=None)
def _fubini_study_chart() -> ChartSpec:
    # affine chart of CP^2 in polar coordinates (r1, phi1, r2, phi2) of z1, z2
    r1, p1, r2, p2 = sympy.symbols('r1 phi1 r2 phi2', positive=True)
    s = 1 + r1 ** 2 + r2 ** 2
    metric = sympy.zeros(4, 4)
    radii = (r1, r2)
    radial = (0, 2)
    angular = (1, 3)
    for a in range(2):
        for b in range(2):
            delta = 1 if a == b else 0
            metric[radial[a], radial[b]] = (s * delta - radii[a] * radii[b]) / s ** 2
            metric[angular[a], angular[b]] = (s * delta * radii[a] ** 2 - radii[a] ** 2 * radii[b] ** 2) / s ** 2
    logger.debug("Differentiating Fubini-Study metric in the affine chart")
    return symbolic_chart(
        (r1, p1, r2, p2), metric,
        lower=[0.0, 0.0, 0.0, 0.0],
        upper=[math.inf, 2 * math.pi, math.inf, 2 * math.pi],
        covers_full_measure=True,
        cyclic_axes=(1, 3),
        compactified_axes=(0, 2),
    )


def _flat_chart(lengths: Sequence[float]) -> ChartSpec:
    m = len(lengths)
    identity = np.eye(m)
    return ChartSpec(
        m=m,
        lower=tuple(0.0 for _ in lengths),
        upper=tuple(float(v) for v in lengths),
        g=lambda x: identity.copy(),
        dg=lambda x: np.zeros((m, m, m)),
        d2g=lambda x: np.zeros((m, m, m, m)),
        covers_full_measure=True,
        cyclic_axes=tuple(range(m)),
    )


def _scaled_chart(chart: ChartSpec, factor: float) -> ChartSpec:
    base_g, base_dg, base_d2g = chart.g, chart.dg, chart.d2g
    return replace(
        chart,
        g=lambda x: factor * base_g(x),
        dg=None if base_dg is None else (lambda x: factor * base_dg(x)),
        d2g=None if base_d2g is None else (lambda x: factor * base_d2g(x)),
    )


def _product_chart(a: ChartSpec, b: ChartSpec) -> ChartSpec:
    m1, m = a.m, a.m + b.m

    def g(x):
        out = np.zeros((m, m))
        out[:m1, :m1] = a.g(x[:m1])
        out[m1:, m1:] = b.g(x[m1:])
        return out

    dg = d2g = None
    if a.dg is not None and b.dg is not None:
        def dg(x):
            out = np.zeros((m, m, m))
            out[:m1, :m1, :m1] = a.dg(x[:m1])
            out[m1:, m1:, m1:] = b.dg(x[m1:])
            return out

    if a.d2g is not None and b.d2g is not None:
        def d2g(x):
            out = np.zeros((m, m, m, m))
            out[:m1, :m1, :m1, :m1] = a.d2g(x[:m1])
            out[m1:, m1:, m1:, m1:] = b.d2g(x[m1:])
            return out

    return ChartSpec(
        m=m,
        lower=a.lower + b.lower,
        upper=a.upper + b.upper,
        g=g, dg=dg, d2g=d2g,
        covers_full_measure=a.covers_full_measure and b.covers_full_measure,
        cyclic_axes=a.cyclic_axes + tuple(m1 + i for i in b.cyclic_axes),
        compactified_axes=a.compactified_axes + tuple(m1 + i for i in b.compactified_axes),
    )


# ---------------------------------------------------------------------------
# homogeneous entries

def jacobi_residual(geometry: HomogeneousSpec) -> float:
    c = geometry.structure_constants
    # sum over cyclic (i, j, k) of [[e_i, e_j], e_k]
    term = np.einsum('ijp,pkq->ijkq', c, c)
    total = term + np.einsum('jkiq->ijkq', term) + np.einsum('kijq->ijkq', term)
    return float(np.max(np.abs(total))) if total.size else 0.0


def _homogeneous(c: np.ndarray) -> HomogeneousSpec:
    c = np.asarray(c, dtype=float)
    m = c.shape[0]
    if c.shape != (m, m, m):
        raise ConfigurationError(f"structure constants must have shape (m, m, m), got {c.shape}")
    if np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0.0) > 0:
        raise ConfigurationError("structure constants are not antisymmetric in the bracket slots")
    spec = HomogeneousSpec(m=m, structure_constants=c)
    residual = jacobi_residual(spec)
    if residual > JACOBI_TOLERANCE * max(1.0, float(np.max(np.abs(c))) ** 2):
        raise ConfigurationError(f"structure constants violate the Jacobi identity (residual {residual:.3e})")
    return spec


def _set_bracket(c: np.ndarray, i: int, j: int, k: int, value: float) -> None:
    c[i, j, k] = value
    c[j, i, k] = -value


def berger_structure_constants(eps: float) -> np.ndarray:
    # su(2) with [X_i, X_j] = 2 X_k, fibre X_3 rescaled to length eps
    c = np.zeros((3, 3, 3))
    _set_bracket(c, 0, 1, 2, 2.0 * eps)
    _set_bracket(c, 1, 2, 0, 2.0 / eps)
    _set_bracket(c, 2, 0, 1, 2.0 / eps)
    return c


def heisenberg_structure_constants(eps: float) -> np.ndarray:
    c = np.zeros((3, 3, 3))
    _set_bracket(c, 0, 1, 2, eps)
    return c


# ---------------------------------------------------------------------------
# catalog

CATALOG_NAMES = ('sphere', 'flat_torus', 'berger_sphere', 'fubini_study_cp2', 'heisenberg_nil')


def list_catalog() -> List[str]:
    return list(CATALOG_NAMES) + ['product:<a>,<b>', 'scaled:<a>']


def _format_params(params: Sequence[float]) -> str:
    return ','.join(f"{float(p):g}" for p in params)


def _require_count(name: str, params: Sequence[float], count: int) -> None:
    if len(params) != count:
        raise ConfigurationError(f"{name} expects {count} parameter(s), got {len(params)}")


def _require_positive(name: str, label: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name}: {label} must be positive, got {value}")
    return value


def _require_dimension(name: str, value: float, minimum: int) -> int:
    if float(value) != int(value) or int(value) < minimum:
        raise ConfigurationError(f"{name}: dimension must be an integer >= {minimum}, got {value}")
    return int(value)


def _sphere(params: Sequence[float]) -> ManifoldSpec:
    _require_count('sphere', params, 2)
    m = _require_dimension('sphere', params[0], 2)
    r = _require_positive('sphere', 'radius', params[1])
    chart = _unit_sphere_chart(m)
    if r != 1.0:
        chart = _scaled_chart(chart, r * r)
    volume = 2 * math.pi ** ((m + 1) / 2) / gamma((m + 1) / 2) * r ** m
    return ManifoldSpec(
        name=f"sphere[{_format_params(params)}]",
        geometry=chart,
        euler_char=2 if m % 2 == 0 else 0,
        diameter=Diameter(math.pi * r, exact=True),
        volume=float(volume),
        betti=tuple(1 if k in (0, m) else 0 for k in range(m + 1)),
    )


def _flat_torus(params: Sequence[float]) -> ManifoldSpec:
    if not params:
        raise ConfigurationError("flat_torus expects at least one side length")
    lengths = [_require_positive('flat_torus', 'side length', v) for v in params]
    m = len(lengths)
    return ManifoldSpec(
        name=f"flat_torus[{_format_params(params)}]",
        geometry=_flat_chart(lengths),
        euler_char=0,
        diameter=Diameter(0.5 * math.sqrt(sum(v * v for v in lengths)), exact=True),
        volume=float(np.prod(lengths)),
        infinite_pi1=True,
        betti=tuple(math.comb(m, k) for k in range(m + 1)),
    )


def _berger_sphere(params: Sequence[float]) -> ManifoldSpec:
    _require_count('berger_sphere', params, 1)
    eps = _require_positive('berger_sphere', 'fibre length', params[0])
    return ManifoldSpec(
        name=f"berger_sphere[{_format_params(params)}]",
        geometry=_homogeneous(berger_structure_constants(eps)),
        euler_char=0,
        # g_eps <= max(1, eps)^2 g_round
        diameter=Diameter(math.pi * max(1.0, eps), exact=False),
        volume=2 * math.pi ** 2 * eps,
        betti=(1, 0, 0, 1),
    )


def _heisenberg_nil(params: Sequence[float]) -> ManifoldSpec:
    _require_count('heisenberg_nil', params, 1)
    eps = _require_positive('heisenberg_nil', 'centre length', params[0])
    bound = HEISENBERG_DIAMETER_BOUND
    if eps > 1.0:
        # the centre correction costs at most min(eps/2, 2*sqrt(2)) beyond the planar moves
        bound = 2.0 * (1.0 + min(eps / 2.0, 2.0 * math.sqrt(2.0)))
    return ManifoldSpec(
        name=f"heisenberg_nil[{_format_params(params)}]",
        geometry=_homogeneous(heisenberg_structure_constants(eps)),
        euler_char=0,
        diameter=Diameter(bound, exact=False),
        volume=eps,
        infinite_pi1=True,
        betti=(1, 2, 2, 1),
    )


def _fubini_study(params: Sequence[float]) -> ManifoldSpec:
    if params:
        raise ConfigurationError("fubini_study_cp2 takes no parameters")
    return ManifoldSpec(
        name='fubini_study_cp2',
        geometry=_fubini_study_chart(),
        euler_char=3,
        diameter=Diameter(math.pi / 2, exact=True),
        volume=math.pi ** 2 / 2,
        betti=(1, 0, 1, 0, 1),
    )


_BUILDERS = {
    'sphere': _sphere,
    'flat_torus': _flat_torus,
    'berger_sphere': _berger_sphere,
    'heisenberg_nil': _heisenberg_nil,
    'fubini_study_cp2': _fubini_study,
}


def _split_top_level(text: str) -> Tuple[str, str]:
    depth = 0
    for pos, ch in enumerate(text):
        if ch == '[':
            depth += 1
        elif ch == ']':
            depth -= 1
        elif ch == ',' and depth == 0:
            return text[:pos].strip(), text[pos + 1:].strip()
    raise ConfigurationError(f"product entry needs two factors separated by a comma: {text!r}")


_ENTRY_PATTERN = re.compile(r'^(?P<name>[A-Za-z0-9_:]+)\[(?P<params>[^\[\]]*)\]$')


def parse_entry(text: str) -> Tuple[str, List[float]]:
    """Split `name[p1,p2,...]` into the catalog name and its parameters."""
    text = text.strip()
    if text.startswith('product:'):
        return text, []
    match = _ENTRY_PATTERN.match(text)
    if not match:
        return text, []
    raw = match.group('params').strip()
    try:
        params = [float(p) for p in raw.split(',')] if raw else []
    except ValueError as exc:
        raise ConfigurationError(f"could not parse parameters of {text!r}: {exc}") from exc
    return match.group('name'), params


def product(first: ManifoldSpec, second: ManifoldSpec) -> ManifoldSpec:
    a, b = first.geometry, second.geometry
    if isinstance(a, ChartSpec) and isinstance(b, ChartSpec):
        geometry: Geometry = _product_chart(a, b)
    elif isinstance(a, HomogeneousSpec) and isinstance(b, HomogeneousSpec):
        m1, m = a.m, a.m + b.m
        c = np.zeros((m, m, m))
        c[:m1, :m1, :m1] = a.structure_constants
        c[m1:, m1:, m1:] = b.structure_constants
        geometry = _homogeneous(c)
    else:
        geometry = ProductSpec(first, second)

    euler = None
    if first.euler_char is not None and second.euler_char is not None:
        euler = first.euler_char * second.euler_char
    diameter = None
    if first.diameter is not None and second.diameter is not None:
        diameter = Diameter(
            math.hypot(first.diameter.value, second.diameter.value),
            exact=first.diameter.exact and second.diameter.exact,
        )
    volume = None
    if first.volume is not None and second.volume is not None:
        volume = first.volume * second.volume
    betti = None
    if first.betti is not None and second.betti is not None:
        # Kunneth over a field
        betti = tuple(
            sum(first.betti[i] * second.betti[k - i]
                for i in range(len(first.betti)) if 0 <= k - i < len(second.betti))
            for k in range(first.m + second.m + 1)
        )
    return ManifoldSpec(
        name=f"product:{first.name},{second.name}",
        geometry=geometry,
        euler_char=euler,
        diameter=diameter,
        volume=volume,
        infinite_pi1=first.infinite_pi1 or second.infinite_pi1,
        betti=betti,
    )


def _scale_geometry(geometry: Geometry, c: float) -> Geometry:
    if isinstance(geometry, ChartSpec):
        return _scaled_chart(geometry, c * c)
    if isinstance(geometry, HomogeneousSpec):
        # orthonormal frame of c^2 g is e_i / c
        return HomogeneousSpec(m=geometry.m, structure_constants=geometry.structure_constants / c)
    return ProductSpec(scale(geometry.first, c), scale(geometry.second, c))


def scale(spec: ManifoldSpec, c: float) -> ManifoldSpec:
    """The metric c^2 g with diameter and volume rescaled to match."""
    c = _require_positive('scaled', 'scale factor', c)
    return ManifoldSpec(
        name=f"scaled:{spec.name}@{c:g}",
        geometry=_scale_geometry(spec.geometry, c),
        euler_char=spec.euler_char,
        diameter=None if spec.diameter is None else Diameter(c * spec.diameter.value, spec.diameter.exact),
        volume=None if spec.volume is None else spec.volume * c ** spec.m,
        infinite_pi1=spec.infinite_pi1,
        betti=spec.betti,
    )


def catalog_get(name: str, params: Optional[Sequence[float]] = None) -> ManifoldSpec:
    params = [float(p) for p in (params or [])]
    name = name.strip()
    if name.startswith('product:'):
        left, right = _split_top_level(name[len('product:'):])
        if params:
            raise ConfigurationError("product entries carry their parameters inside the factor names")
        return product(catalog_get(*parse_entry(left)), catalog_get(*parse_entry(right)))
    if name.startswith('scaled:'):
        base_name = name[len('scaled:'):]
        if not params:
            raise ConfigurationError("scaled entries need the scale factor as their last parameter")
        base_name, inline = parse_entry(base_name)
        base = catalog_get(base_name, inline + params[:-1])
        return scale(base, params[-1])
    if '[' in name:
        inner_name, inline = parse_entry(name)
        if inner_name != name:
            return catalog_get(inner_name, inline + params)
    builder = _BUILDERS.get(name)
    if builder is None:
        raise ConfigurationError(f"unknown catalog entry {name!r}; known entries: {', '.join(list_catalog())}")
    return builder(params)


# ---------------------------------------------------------------------------
# derivatives

def _as_chart(spec: Union[ManifoldSpec, ChartSpec]) -> ChartSpec:
    geometry = spec.geometry if isinstance(spec, ManifoldSpec) else spec
    if not isinstance(geometry, ChartSpec):
        raise DomainError(f"metric derivatives need a chart, got {type(geometry).__name__}")
    return geometry


def _steps(x: np.ndarray, base: float) -> np.ndarray:
    return base * np.maximum(1.0, np.abs(x))


def _check_interior(chart: ChartSpec, x: np.ndarray, margin: np.ndarray) -> None:
    lower = np.asarray(chart.lower)
    upper = np.asarray(chart.upper)
    if np.any(x - margin <= lower) or np.any(x + margin >= upper):
        raise DomainError(f"point {x.tolist()} is closer than {margin.max():.3e} to the chart boundary")


def _first_partials(g: MetricMap, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    m = x.size
    out = np.zeros((m, m, m))
    for a in range(m):
        e = np.zeros(m)
        e[a] = h[a]
        coarse = (g(x + 2 * e) - g(x - 2 * e)) / (4 * h[a])
        fine = (g(x + e) - g(x - e)) / (2 * h[a])
        out[a] = (4 * fine - coarse) / 3
    return out


def _second_difference(g: MetricMap, x: np.ndarray, a: int, b: int, ha: float, hb: float, g0: np.ndarray) -> np.ndarray:
    m = x.size
    ea = np.zeros(m)
    ea[a] = ha
    if a == b:
        return (g(x + ea) - 2 * g0 + g(x - ea)) / (ha * ha)
    eb = np.zeros(m)
    eb[b] = hb
    return (g(x + ea + eb) - g(x + ea - eb) - g(x - ea + eb) + g(x - ea - eb)) / (4 * ha * hb)


def _second_partials(g: MetricMap, x: np.ndarray, h: np.ndarray, g0: np.ndarray) -> np.ndarray:
    m = x.size
    out = np.zeros((m, m, m, m))
    for a in range(m):
        for b in range(a, m):
            fine = _second_difference(g, x, a, b, h[a], h[b], g0)
            coarse = _second_difference(g, x, a, b, 2 * h[a], 2 * h[b], g0)
            out[a, b] = out[b, a] = (4 * fine - coarse) / 3
    return out


def finite_difference_derivatives(chart: ChartSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    h1 = _steps(x, FIRST_STEP)
    h2 = _steps(x, SECOND_STEP)
    _check_interior(chart, x, 2 * np.maximum(h1, h2))
    g0 = chart.g(x)
    return _first_partials(chart.g, x, h1), _second_partials(chart.g, x, h2, g0)


def validate_spd(g: np.ndarray, x=None) -> np.ndarray:
    """Cholesky factor of g; raises MetricValidationError when g is not SPD."""
    if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, float(np.max(np.abs(g))))):
        raise MetricValidationError(f"metric is not symmetric at {x}")
    try:
        return linalg.cholesky(g, lower=True)
    except linalg.LinAlgError as exc:
        raise MetricValidationError(f"metric is not positive definite at {x}") from exc


def metric_derivatives(spec: Union[ManifoldSpec, ChartSpec], x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    chart = _as_chart(spec)
    x = np.asarray(x, dtype=float)
    if x.shape != (chart.m,):
        raise DomainError(f"expected a point with {chart.m} coordinates, got shape {x.shape}")
    if chart.dg is None or chart.d2g is None:
        first, second = finite_difference_derivatives(chart, x)
        dg = chart.dg(x) if chart.dg is not None else first
        d2g = chart.d2g(x) if chart.d2g is not None else second
    else:
        _check_interior(chart, x, np.zeros_like(x))
        dg, d2g = chart.dg(x), chart.d2g(x)
    g = chart.g(x)
    validate_spd(g, x.tolist())
    return g, dg, d2g


def without_derivatives(spec: ManifoldSpec) -> ManifoldSpec:
    """Same manifold with the closed-form derivative maps removed."""
    chart = _as_chart(spec)
    return replace(spec, name=f"{spec.name}#fd", geometry=replace(chart, dg=None, d2g=None))


# ---------------------------------------------------------------------------
# coordinates

def coordinate_box(spec: ManifoldSpec) -> Tuple[np.ndarray, np.ndarray, Tuple[int, ...]]:
    """Lower/upper bounds and compactified axes of all chart coordinates of spec."""
    geometry = spec.geometry
    if isinstance(geometry, ChartSpec):
        return np.asarray(geometry.lower), np.asarray(geometry.upper), geometry.compactified_axes
    if isinstance(geometry, HomogeneousSpec):
        return np.zeros(0), np.zeros(0), ()
    lo1, hi1, comp1 = coordinate_box(geometry.first)
    lo2, hi2, comp2 = coordinate_box(geometry.second)
    offset = lo1.size
    return np.concatenate([lo1, lo2]), np.concatenate([hi1, hi2]), comp1 + tuple(offset + i for i in comp2)


def random_interior_points(spec: ManifoldSpec, count: int, seed: int = 0, margin: float = 0.05) -> List[np.ndarray]:
    if not 0 < margin < 0.5:
        raise DomainError(f"margin must lie in (0, 1/2), got {margin}")
    lower, upper, compactified = coordinate_box(spec)
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        u = margin + (1 - 2 * margin) * rng.random(lower.size)
        x = np.empty(lower.size)
        for axis in range(lower.size):
            if axis in compactified:
                x[axis] = lower[axis] + math.tan(u[axis] * math.pi / 2)
            else:
                x[axis] = lower[axis] + (upper[axis] - lower[axis]) * u[axis]
        points.append(x)
    return points
