"""Scaled eigenvalue conditions on one-parameter metric families.

Every quantity is a curvature-operator eigenvalue (or partial sum) times
diam², so it is invariant under constant rescaling of the metric. Diameters
flagged as upper bounds are only used where that stays conservative.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import get_settings
from .curvature_engine import CurvaturePoint, CurvOpMatrix, assemble_curv_op, curvature_at, weyl_gap
from .errors import ConsistencyError, DomainError, UnsupportedCertificationError
from .metric_catalog import ManifoldSpec, catalog_get, random_interior_points, scale
from .utils import parallel_map
from .weitzenbock import uniform_weitzenbock_floor, weitzenbock_constant

logger = logging.getLogger(__name__)

Condition = Literal['anco_all', 'partial', 'sum_n', 'sum_n_fixed', 'two_sided']

CONSERVATIVENESS_FACTORS = (0.5, 0.9)
SAMPLED_CAVEAT = "worst case over {count} sampled points per member; sampling-based, not rigorous"


class FamilySpec(BaseModel):
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    base: str
    fixed_params: List[float] = Field(default_factory=list)
    param_schedule: List[float]
    condition: Condition = 'anco_all'
    Lambda: Optional[float] = None
    n_or_l: Optional[int] = None
    indices: Optional[List[int]] = None
    epsilon: Optional[float] = None
    threshold: Optional[float] = None
    sample_points: int = 16
    seed: int = 0

    @field_validator('param_schedule')
    @classmethod
    def _positive_schedule(cls, value):
        if not value:
            raise ValueError("param_schedule must not be empty")
        if any(not math.isfinite(v) or v <= 0 for v in value):
            raise ValueError("family parameters must be positive")
        return value

    @field_validator('sample_points')
    @classmethod
    def _positive_samples(cls, value):
        if value < 1:
            raise ValueError("sample_points must be positive")
        return value

    @model_validator(mode='after')
    def _check_blocks(self):
        if self.indices is not None:
            if len(self.indices) != len(self.param_schedule):
                raise ValueError("indices and param_schedule must have the same length")
            if any(i < 1 for i in self.indices):
                raise ValueError("member indices start at 1")
        if self.condition == 'two_sided' and self.Lambda is None:
            raise ValueError("two_sided needs Lambda")
        if self.condition == 'sum_n_fixed' and self.threshold is None:
            raise ValueError("sum_n_fixed needs threshold")
        if self.condition == 'partial' and self.n_or_l is None:
            raise ValueError("partial needs n_or_l")
        return self

    def member_indices(self) -> List[int]:
        return list(self.indices) if self.indices is not None else list(range(1, len(self.param_schedule) + 1))

    def member(self, param: float) -> ManifoldSpec:
        return catalog_get(self.base, list(self.fixed_params) + [param])


class MemberRecord(BaseModel):
    index: int
    param: float
    name: str
    lambda_min: float
    lambda_max: float
    partial_sum: float
    diameter: float
    diameter_flag: str
    scaled_quantity: float
    scaled_upper: Optional[float] = None
    threshold: float
    slack: float
    verdict: bool
    sampled_points: int


class AncoReport(BaseModel):
    base: str
    condition: str
    members: List[MemberRecord]
    family_verdict: bool
    first_certified_index: Optional[int] = None
    metadata_consistency: Optional[str] = None
    consistent: bool = True
    caveat: Optional[str] = None

    def to_frame(self):
        return pd.DataFrame([m.model_dump() for m in self.members])


@dataclass(frozen=True, eq=False)
class MemberSpectrum:
    """Worst case of the operator spectrum over the sampled points of one member."""
    index: int
    param: float
    spec: ManifoldSpec
    lambda_min: float
    lambda_max: float
    # elementwise minimum over points of the partial sums λ1, λ1+λ2, ...
    partial_sums: np.ndarray
    ricci_min: float
    points: List[CurvaturePoint]
    operators: List[CurvOpMatrix]

    @property
    def diameter(self):
        return self.spec.diameter


def _curvature_samples(spec: ManifoldSpec, count: int, seed: int) -> List[CurvaturePoint]:
    if not spec.chart_dim:
        return [curvature_at(spec)]
    return [curvature_at(spec, x) for x in random_interior_points(spec, count, seed)]


def _member_spectrum(fam: FamilySpec, index: int, param: float, sample_points: int) -> MemberSpectrum:
    spec = fam.member(param)
    if spec.diameter is None:
        raise UnsupportedCertificationError(f"{spec.name} has no diameter metadata")
    points = _curvature_samples(spec, sample_points, fam.seed)
    operators = [assemble_curv_op(cp) for cp in points]
    spectra = np.array([op.spectrum for op in operators])
    ricci_min = min(float(np.linalg.eigvalsh(cp.ricci)[0]) for cp in points)
    return MemberSpectrum(
        index=index,
        param=param,
        spec=spec,
        lambda_min=float(spectra[:, 0].min()),
        lambda_max=float(spectra[:, -1].max()),
        partial_sums=np.cumsum(spectra, axis=1).min(axis=0),
        ricci_min=ricci_min,
        points=points,
        operators=operators,
    )


def spectrum_over_family(fam: FamilySpec, sample_points: Optional[int] = None,
                         threads: Optional[int] = None) -> List[MemberSpectrum]:
    if sample_points is None:
        sample_points = fam.sample_points
    if threads is None:
        threads = get_settings().threads
    items = list(zip(fam.member_indices(), fam.param_schedule))
    logger.info(f"Evaluating {len(items)} members of the {fam.base} family")
    return parallel_map(lambda item: _member_spectrum(fam, item[0], item[1], sample_points), items, threads)


def _scaled_lower(value: float, diameter: float, exact: bool) -> float:
    """A lower bound for value * d^2 over all true diameters d <= diameter."""
    if exact or value < 0:
        return value * diameter ** 2
    return 0.0


def _condition_count(fam: FamilySpec, m: int, n_pairs: int) -> int:
    if fam.condition in ('anco_all', 'two_sided'):
        return 1
    if fam.condition == 'partial':
        count = fam.n_or_l
    elif fam.condition == 'sum_n':
        if m % 2:
            raise DomainError(f"sum_n needs even dimension, got {m}")
        count = m // 2
    else:
        count = fam.n_or_l if fam.n_or_l is not None else m // 2
    if count < 1 or count > n_pairs:
        raise DomainError(f"eigenvalue count must lie in [1, {n_pairs}], got {count}")
    return count


def _member_record(fam: FamilySpec, member: MemberSpectrum, diameter_factor: float) -> MemberRecord:
    m = member.spec.m
    count = _condition_count(fam, m, member.partial_sums.size)
    diameter = member.diameter.value * diameter_factor
    exact = member.diameter.exact
    i = member.index
    partial = float(member.partial_sums[count - 1])
    quantity = _scaled_lower(partial, diameter, exact)
    upper = None

    if fam.condition == 'anco_all':
        threshold = -1.0 / i
    elif fam.condition in ('partial', 'sum_n'):
        threshold = -count / i
    elif fam.condition == 'sum_n_fixed':
        threshold = -float(fam.threshold)
    else:
        threshold = -(fam.epsilon if fam.epsilon is not None else 1.0 / i)
        if not exact:
            raise UnsupportedCertificationError(
                f"{member.spec.name}: the upper side lambda_N * diam^2 <= Lambda needs an exact diameter"
            )
        upper = member.lambda_max * diameter ** 2

    slack = quantity - threshold
    if upper is not None:
        slack = min(slack, float(fam.Lambda) - upper)
    verdict = slack >= -get_settings().tolerances.certification_slack
    return MemberRecord(
        index=i,
        param=member.param,
        name=member.spec.name,
        lambda_min=member.lambda_min,
        lambda_max=member.lambda_max,
        partial_sum=partial,
        diameter=diameter,
        diameter_flag=member.diameter.flag,
        scaled_quantity=quantity,
        scaled_upper=upper,
        threshold=threshold,
        slack=float(slack),
        verdict=bool(verdict),
        sampled_points=len(member.points),
    )


def first_certified_index(report: AncoReport) -> Optional[int]:
    """Smallest i such that every member with index >= i passes."""
    first = None
    for record in sorted(report.members, key=lambda r: r.index, reverse=True):
        if not record.verdict:
            break
        first = record.index
    return first


def _metadata_consistency(fam: FamilySpec, spec: ManifoldSpec, certified: bool):
    chi = spec.euler_char
    if chi is None:
        return "no Euler characteristic metadata", True
    if not certified:
        return f"condition not certified; chi = {chi} not constrained", True
    if spec.m % 2:
        return f"odd dimension: chi = 0 trivially (metadata chi = {chi})", chi == 0
    if fam.condition == 'two_sided':
        return f"two-sided pinching implies chi >= 0; metadata chi = {chi}", chi >= 0
    if fam.condition in ('sum_n', 'anco_all') and spec.infinite_pi1:
        return f"infinite fundamental group (user-asserted) implies chi = 0; metadata chi = {chi}", chi == 0
    return f"no conclusion for this condition; chi = {chi}", True


def certify_condition(fam: FamilySpec, members: Optional[List[MemberSpectrum]] = None,
                      diameter_factor: float = 1.0) -> AncoReport:
    if diameter_factor <= 0:
        raise DomainError(f"diameter factor must be positive, got {diameter_factor}")
    if members is None:
        members = spectrum_over_family(fam)
    records = [_member_record(fam, member, diameter_factor) for member in members]
    report = AncoReport(
        base=fam.base,
        condition=fam.condition,
        members=records,
        family_verdict=all(r.verdict for r in records),
    )
    report.first_certified_index = first_certified_index(report)
    note, consistent = _metadata_consistency(fam, members[0].spec, report.first_certified_index is not None)
    report.metadata_consistency = note
    report.consistent = consistent
    if any(member.spec.chart_dim for member in members):
        report.caveat = SAMPLED_CAVEAT.format(count=fam.sample_points)
    passed = sum(r.verdict for r in records)
    logger.info(f"{fam.condition} holds on {passed}/{len(records)} members of {fam.base}; first certified index "
                f"{report.first_certified_index}")
    if not consistent:
        logger.warning(f"Metadata inconsistency for {fam.base}: {note}")
    return report


def conservativeness_check(fam: FamilySpec, members: Optional[List[MemberSpectrum]] = None) -> Dict:
    """Shrinking the diameters must never turn a passing member into a failing one."""
    if members is None:
        members = spectrum_over_family(fam)
    baseline = certify_condition(fam, members)
    flips = []
    for factor in CONSERVATIVENESS_FACTORS:
        shrunk = certify_condition(fam, members, diameter_factor=factor)
        for before, after in zip(baseline.members, shrunk.members):
            if before.verdict and not after.verdict:
                flips.append({'factor': factor, 'index': before.index})
    return {'factors': list(CONSERVATIVENESS_FACTORS), 'flips': flips, 'holds': not flips}


def _scaled_spectra(spec: ManifoldSpec, sample_points: int, seed: int) -> np.ndarray:
    return np.array([assemble_curv_op(cp).spectrum for cp in _curvature_samples(spec, sample_points, seed)])


def scale_invariance_check(spec: ManifoldSpec, c: float, sample_points: int = 4, seed: int = 0) -> float:
    """Largest change of the scaled spectrum λ_k·diam² under g -> c²g.

    The deviation max_k |Δ(λ_k·diam²)| is divided by the largest |λ_k·diam²| of
    the unscaled spectrum, not by each |λ_k·diam²| separately, so zero
    eigenvalues (flat directions, CP², products) do not turn rounding noise
    into a large relative error. Returns the absolute deviation for a flat spectrum.
    """
    if spec.diameter is None or not spec.diameter.exact:
        raise UnsupportedCertificationError(f"{spec.name} needs an exact diameter for the scale check")
    if c <= 0:
        raise DomainError(f"scale factor must be positive, got {c}")
    scaled = scale(spec, c)
    before = _scaled_spectra(spec, sample_points, seed) * spec.diameter.value ** 2
    after = _scaled_spectra(scaled, sample_points, seed) * scaled.diameter.value ** 2
    if before.size == 0:
        return 0.0
    # measured against the largest scaled eigenvalue; vanishing eigenvalues carry only rounding noise
    reference = float(np.max(np.abs(before)))
    deviation = float(np.max(np.abs(after - before)))
    return deviation / reference if reference > 0 else deviation


def _normalized_point(cp: CurvaturePoint, diameter: float) -> CurvaturePoint:
    # metric g / diam^2: frame components of R scale by diam^2
    factor = diameter ** 2
    return CurvaturePoint(m=cp.m, riemann=cp.riemann * factor, ricci=cp.ricci * factor,
                          scalar=cp.scalar * factor, frame=cp.frame, point=cp.point, rounding=cp.rounding * factor)


def kappa_sequence(fam: FamilySpec, members: Optional[List[MemberSpectrum]] = None) -> List[Dict]:
    """κ_i = (λ1 + .. + λn) diam² / n per member, with the floors it implies."""
    if members is None:
        members = spectrum_over_family(fam)
    sequence = []
    for member in members:
        m = member.spec.m
        if m % 2:
            raise DomainError(f"kappa sequence needs even dimension, got {m}")
        n = m // 2
        i = member.index
        diameter = member.diameter.value
        kappa = _scaled_lower(float(member.partial_sums[n - 1]), diameter, member.diameter.exact) / n
        certified = kappa >= -1.0 / i - get_settings().tolerances.certification_slack
        if fam.condition in ('sum_n', 'two_sided'):
            # a passing member bounds kappa by its threshold per summed eigenvalue
            record = _member_record(fam, member, 1.0)
            implied = record.threshold / _condition_count(fam, m, member.partial_sums.size)
            if record.verdict and kappa < implied - get_settings().tolerances.certification_slack:
                raise ConsistencyError(
                    f"member {i} certifies {fam.condition} but kappa = {kappa:.6g} < {implied:.6g}"
                )
        entry = {
            'index': i,
            'kappa': kappa,
            'kappa_floor': -1.0 / i,
            'kappa_holds': bool(certified),
            'weitzenbock_floor': -weitzenbock_constant(n) / i,
            'ricci_min_scaled': _scaled_lower(member.ricci_min, diameter, member.diameter.exact),
            'ricci_floor': -(2 * n - 1) / i,
        }
        if certified and member.diameter.exact:
            floors = [uniform_weitzenbock_floor(_normalized_point(cp, diameter), i) for cp in member.points]
            entry['weitzenbock_min'] = min(f['min_eigenvalue'] for f in floors)
            entry['weitzenbock_holds'] = all(f['holds'] for f in floors)
            if not entry['weitzenbock_holds']:
                raise ConsistencyError(f"member {i}: Weitzenböck term drops below -C({n})/{i} although kappa >= -1/{i}")
        sequence.append(entry)
    return sequence


def betti_consistency(spec: ManifoldSpec, certified: bool = False) -> Dict:
    """Compare stored chi with the Betti numbers; in dimension 4 also chi = 2 + b2 - 2 b1."""
    if spec.betti is None or spec.euler_char is None:
        raise UnsupportedCertificationError(f"{spec.name} lacks Betti or Euler characteristic metadata")
    betti = list(spec.betti)
    if len(betti) != spec.m + 1:
        raise DomainError(f"{spec.name}: expected {spec.m + 1} Betti numbers, got {len(betti)}")
    alternating = sum((-1) ** k * b for k, b in enumerate(betti))
    result = {'chi': spec.euler_char, 'alternating_sum': alternating, 'holds': alternating == spec.euler_char}
    if spec.m == 4:
        four = 2 + betti[2] - 2 * betti[1]
        result['four_dim_formula'] = four
        result['holds'] = result['holds'] and four == spec.euler_char
        if certified and betti[1] > 0:
            result['vanishing_holds'] = spec.euler_char == 0
            result['holds'] = result['holds'] and result['vanishing_holds']
    return result


def weyl_along_family(fam: FamilySpec, members: Optional[List[MemberSpectrum]] = None) -> List[Dict]:
    """Weyl gaps between the operators of consecutive members at the first sampled point."""
    if members is None:
        members = spectrum_over_family(fam)
    records = []
    for previous, current in zip(members, members[1:]):
        gap, bound, holds = weyl_gap(previous.operators[0].entries, current.operators[0].entries)
        records.append({'from_index': previous.index, 'to_index': current.index,
                        'gap': gap, 'bound': bound, 'holds': bool(holds)})
    violations = sum(not r['holds'] for r in records)
    if violations:
        logger.warning(f"Found {violations} Weyl violations along {fam.base}")
    return records
