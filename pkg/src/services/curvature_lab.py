import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..anco_analysis import (
    FamilySpec,
    betti_consistency,
    certify_condition,
    conservativeness_check,
    kappa_sequence,
    scale_invariance_check,
    spectrum_over_family,
    weyl_along_family,
)
from ..config import Settings, get_settings
from ..curvature_engine import (
    assemble_curv_op,
    curvature_at,
    norm_sandwich_check,
    random_orthogonal,
    random_symmetric,
    reframe,
    sectional_bounds_check,
    sorted_spectrum,
    symmetry_residuals,
    weyl_equality_pair,
    weyl_gap,
)
from ..errors import UnsupportedCertificationError
from ..gauss_bonnet import (
    euler_characteristic,
    integrate,
    nonneg_operator_implies_nonneg_integrand,
    volume_lower_bound_check,
)
from ..metric_catalog import ManifoldSpec, random_interior_points
from ..weitzenbock import pw_bound_check, ricci_agreement, self_adjoint_residual

logger = logging.getLogger(__name__)

Records = List[Dict[str, Any]]
Outcome = Tuple[Records, Dict[str, Any]]


def _worst(values) -> Optional[float]:
    values = [v for v in values if v is not None and not math.isnan(v)]
    return float(min(values)) if values else None


class CurvatureLab:
    """Runs one laboratory command and returns per-record dicts plus a summary dict."""

    def __init__(self, settings: Optional[Settings] = None, seed: int = 0):
        self.settings = settings or get_settings()
        self.seed = seed

    @property
    def tolerances(self):
        return self.settings.tolerances

    def sample_points(self, spec: ManifoldSpec, count: int) -> List[Optional[np.ndarray]]:
        if not spec.chart_dim:
            return [None]
        return random_interior_points(spec, count, seed=self.seed)

    def spectrum(self, spec: ManifoldSpec, points: int = 1) -> Outcome:
        records = []
        rotation = random_orthogonal(spec.m, seed=self.seed)
        for x in self.sample_points(spec, points):
            cp = curvature_at(spec, x)
            matrix = assemble_curv_op(cp)
            bounds = sectional_bounds_check(cp, matrix)
            rotated = sorted_spectrum(assemble_curv_op(reframe(cp, rotation)).entries)
            frame_deviation = float(np.max(np.abs(rotated - matrix.spectrum))) if matrix.N else 0.0
            _, _, sandwich = norm_sandwich_check(matrix.entries)
            agreement = ricci_agreement(cp)
            checks_hold = (
                bounds['holds']
                and sandwich
                and agreement <= self.tolerances.ricci_agreement
                and frame_deviation <= self.tolerances.frame_independence * max(1.0, matrix.op_norm)
            )
            records.append({
                'point': None if x is None else [float(v) for v in x],
                'spectrum': [float(v) for v in matrix.spectrum],
                'lambda_min': matrix.lambda_min,
                'lambda_max': matrix.lambda_max,
                'op_norm': matrix.op_norm,
                'frob_norm': matrix.frob_norm,
                'scalar': cp.scalar,
                'ricci_agreement': agreement,
                'frame_deviation': frame_deviation,
                'symmetry_residual': max(symmetry_residuals(cp.riemann).values()),
                'containment_slack': bounds['containment_slack'],
                'holds': bool(checks_hold),
            })
        logger.info(f"Computed {len(records)} curvature spectra for {spec.name}")
        summary = {
            'verdict': all(r['holds'] for r in records),
            'worst_slack': _worst(r['containment_slack'] for r in records),
        }
        return records, summary

    def gauss_bonnet(self, spec: ManifoldSpec, order: Optional[int] = None,
                     bound: Optional[float] = None) -> Outcome:
        order = order or self.settings.order
        evaluation = integrate(spec, order, self.settings.threads)
        chi_est, residual = euler_characteristic(spec, evaluation=evaluation)
        violations = nonneg_operator_implies_nonneg_integrand(spec, evaluation=evaluation)
        record = {
            'manifold': spec.name,
            'order': order,
            'nodes': len(evaluation[0]),
            'chi_est': chi_est,
            'chi_rounded': int(round(chi_est)),
            'chi_metadata': spec.euler_char,
            'residual': residual,
            'nonneg_integrand_violations': violations,
        }
        verdict = violations == 0
        slacks = []
        if spec.euler_char is not None:
            verdict = verdict and residual <= self.tolerances.chi and record['chi_rounded'] == spec.euler_char
            slacks.append(self.tolerances.chi - residual)
            if spec.euler_char != 0:
                if bound is None:
                    bound = float(np.max(evaluation[1].lambda_abs_max))
                details: Dict[str, Any] = {}
                sup_p, vol, holds = volume_lower_bound_check(spec, bound, details=details, evaluation=evaluation)
                record.update({
                    'bound': bound,
                    'sup_integrand': sup_p,
                    'volume': vol,
                    'volume_bound_holds': holds,
                    'volume_bound_residual': details['residual'],
                    'volume_floor': details['volume_floor'],
                    'respects_volume_floor': details['respects_floor'],
                })
                verdict = verdict and holds and details['respects_floor']
                slacks.append(details['residual'])
        record['holds'] = bool(verdict)
        return [record], {'verdict': bool(verdict), 'worst_slack': _worst(slacks)}

    def pw_check(self, spec: ManifoldSpec, p_values: Optional[Sequence[int]] = None,
                 seeds: Sequence[int] = (0, 1, 2), samples: int = 1000, points: int = 4) -> Outcome:
        if p_values is None:
            p_values = list(range(1, spec.m // 2 + 1))
        records = []
        for point_index, x in enumerate(self.sample_points(spec, points)):
            cp = curvature_at(spec, x)
            adjoint = max(self_adjoint_residual(cp, k) for k in range(spec.m + 1))
            for p in p_values:
                for seed in seeds:
                    details: Dict[int, Dict[str, float]] = {}
                    min_slack, holds = pw_bound_check(cp, p, samples, seed, details=details)
                    records.append({
                        'point_index': point_index,
                        'p': p,
                        'seed': seed,
                        'kappa': next(iter(details.values()))['kappa'] if details else 0.0,
                        'min_slack': min_slack,
                        'eigen_min_slack': min(d['eigen_min_slack'] for d in details.values()),
                        'self_adjoint_residual': adjoint,
                        'holds': bool(holds and adjoint <= self.tolerances.self_adjoint),
                    })
        failed = sum(not r['holds'] for r in records)
        logger.info(f"Ran {len(records)} sampled form checks on {spec.name}; {failed} failed")
        summary = {
            'verdict': failed == 0,
            'worst_slack': _worst(r['min_slack'] for r in records),
        }
        return records, summary

    def weyl_check(self, trials: int = 10000, max_size: int = 12) -> Outcome:
        rng = np.random.default_rng(self.seed)
        by_size: Dict[int, Dict[str, Any]] = {}
        for trial in range(trials):
            n = int(rng.integers(1, max_size + 1))
            a = random_symmetric(n, rng)
            b = a + rng.uniform(1e-3, 1.0) * random_symmetric(n, rng)
            gap, bound, holds = weyl_gap(a, b)
            _, _, sandwich = norm_sandwich_check(a)
            row = by_size.setdefault(n, {'size': n, 'trials': 0, 'weyl_violations': 0,
                                         'sandwich_violations': 0, 'worst_slack': math.inf})
            row['trials'] += 1
            row['weyl_violations'] += int(not holds)
            row['sandwich_violations'] += int(not sandwich)
            row['worst_slack'] = min(row['worst_slack'], bound - gap)
        records = [by_size[n] for n in sorted(by_size)]
        a, b = weyl_equality_pair(max(2, max_size))
        gap, bound, _ = weyl_gap(a, b)
        equality_residual = abs(bound - gap)
        records.append({'size': a.shape[0], 'trials': 1, 'equality_residual': equality_residual,
                        'holds': equality_residual <= 1e-12})
        violations = sum(r.get('weyl_violations', 0) + r.get('sandwich_violations', 0) for r in records)
        logger.info(f"Checked {trials} random symmetric pairs; found {violations} violations")
        summary = {
            'verdict': violations == 0 and equality_residual <= 1e-12,
            'worst_slack': _worst(r.get('worst_slack') for r in records),
            'equality_residual': equality_residual,
        }
        return records, summary

    def anco_certify(self, fam: FamilySpec) -> Outcome:
        members = spectrum_over_family(fam, threads=self.settings.threads)
        report = certify_condition(fam, members)
        conservative = conservativeness_check(fam, members)
        weyl = weyl_along_family(fam, members)
        records = [record.model_dump() for record in report.members]

        kappas = kappa_sequence(fam, members) if members[0].spec.m % 2 == 0 else []
        for record, kappa in zip(records, kappas):
            record.update(kappa)

        topology = None
        spec = members[0].spec
        if spec.betti is not None and spec.euler_char is not None:
            topology = betti_consistency(spec, certified=report.first_certified_index is not None)

        verdict = (
            report.consistent
            and conservative['holds']
            and all(w['holds'] for w in weyl)
            and (topology is None or topology['holds'])
        )
        summary = {
            'verdict': bool(verdict),
            'worst_slack': _worst(r['slack'] for r in records),
            'family_verdict': report.family_verdict,
            'first_certified_index': report.first_certified_index,
            'metadata_consistency': report.metadata_consistency,
            'conservativeness': conservative,
            'weyl_violations': sum(not w['holds'] for w in weyl),
            'betti_consistency': topology,
            'caveat': report.caveat,
        }
        return records, summary

    def scale_check(self, specs: Sequence[ManifoldSpec], scales: Sequence[float] = (0.5, 2.0, 10.0),
                    points: int = 4) -> Outcome:
        records = []
        for spec in specs:
            if spec.diameter is None or not spec.diameter.exact:
                raise UnsupportedCertificationError(f"{spec.name} needs an exact diameter for the scale check")
            for c in scales:
                deviation = scale_invariance_check(spec, c, sample_points=points, seed=self.seed)
                records.append({
                    'manifold': spec.name,
                    'scale': c,
                    'max_rel_dev': deviation,
                    'holds': deviation <= self.tolerances.scale_invariance,
                })
        summary = {
            'verdict': all(r['holds'] for r in records),
            'worst_slack': _worst(self.tolerances.scale_invariance - r['max_rel_dev'] for r in records),
        }
        return records, summary
