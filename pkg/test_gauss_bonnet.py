import math

import numpy as np
import pytest

from src.config import get_settings
from src.curvature_engine import curvature_at
from src.errors import DomainError, PreconditionError, UnsupportedSpecError
from src.gauss_bonnet import (
    EULER_NORMALIZATION,
    build_quadrature,
    calibrate_normalization,
    euler_characteristic,
    euler_integrand,
    euler_integrand_bound,
    euler_normalization,
    gauss_bonnet_oracle_4d,
    integrate,
    nonneg_operator_implies_nonneg_integrand,
    volume_floor,
    volume_lower_bound_check,
)
from src.metric_catalog import catalog_get, random_interior_points, scale


@pytest.mark.parametrize('m', [2, 4])
def test_normalization_matches_calibration(m):
    assert calibrate_normalization(m) == pytest.approx(EULER_NORMALIZATION[m], rel=1e-10)
    assert euler_normalization(m) == EULER_NORMALIZATION[m]


def test_normalization_closed_form():
    for m, value in EULER_NORMALIZATION.items():
        assert value == pytest.approx(1.0 / ((8 * math.pi) ** (m // 2) * math.factorial(m // 2)))


def test_odd_and_large_dimensions_rejected():
    with pytest.raises(DomainError):
        euler_normalization(3)
    with pytest.raises(DomainError):
        euler_normalization(8)


def test_dimension_six_is_gated(monkeypatch):
    monkeypatch.setattr('src.config._settings', get_settings().model_copy(update={'enable_dim6': False}))
    with pytest.raises(UnsupportedSpecError):
        euler_normalization(6)


def test_integrand_on_spheres(sphere2, sphere4):
    assert euler_integrand(curvature_at(sphere2, [1.0, 2.0])) == pytest.approx(1 / (2 * math.pi))
    assert euler_integrand(curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])) == pytest.approx(3 / (4 * math.pi ** 2))


def test_integrand_on_flat_torus(torus4):
    assert euler_integrand(curvature_at(torus4, np.full(4, 0.5))) == 0.0


def test_integrand_needs_even_dimension(heisenberg):
    with pytest.raises(DomainError):
        euler_integrand(curvature_at(heisenberg))


@pytest.mark.parametrize('name, params', [
    ('sphere', [4, 1.0]),
    ('sphere', [4, 0.5]),
    ('fubini_study_cp2', []),
    ('product:sphere[2,1],sphere[2,1]', []),
    ('product:sphere[2,1],flat_torus[1,2]', []),
    ('product:heisenberg_nil[1],flat_torus[1]', []),
])
def test_four_dimensional_oracle(name, params):
    spec = catalog_get(name, params)
    points = random_interior_points(spec, 100, seed=9) if spec.chart_dim else [None]
    for x in points:
        cp = curvature_at(spec, x)
        expected = gauss_bonnet_oracle_4d(cp)
        assert euler_integrand(cp) == pytest.approx(expected, rel=1e-8, abs=1e-12)


def test_quadrature_volume_of_the_sphere(sphere2):
    grid = build_quadrature(sphere2, 32)
    assert grid.volume == pytest.approx(4 * math.pi, rel=1e-12)
    assert len(grid) == 32
    assert len(grid.nodes) == 32


def test_quadrature_volume_of_fubini_study(cp2):
    grid = build_quadrature(cp2, 32)
    assert grid.volume == pytest.approx(math.pi ** 2 / 2, rel=1e-4)


def test_homogeneous_quadrature_uses_volume(heisenberg):
    grid = build_quadrature(heisenberg, 8)
    assert len(grid) == 1
    assert grid.volume == pytest.approx(heisenberg.volume)


def test_chi_of_the_two_sphere(sphere2):
    chi, residual = euler_characteristic(sphere2, 32)
    assert chi == pytest.approx(2.0, abs=1e-6)
    assert residual <= 1e-6


def test_chi_of_the_flat_torus(torus4):
    chi, residual = euler_characteristic(torus4, 32)
    assert abs(chi) <= 1e-9
    assert residual <= 1e-9


def test_chi_of_sphere_products(s2xs2):
    chi, residual = euler_characteristic(s2xs2, 32)
    assert chi == pytest.approx(4.0, abs=1e-3)
    assert round(chi) == 4


@pytest.mark.slow
def test_chi_of_the_four_sphere(sphere4):
    chi, residual = euler_characteristic(sphere4, 32)
    assert chi == pytest.approx(2.0, abs=1e-3)
    assert round(chi) == 2


@pytest.mark.slow
def test_chi_of_the_complex_projective_plane(cp2):
    chi, residual = euler_characteristic(cp2, 32)
    assert chi == pytest.approx(3.0, abs=1e-2)
    assert round(chi) == 3


@pytest.mark.parametrize('c', [0.5, 2.0])
def test_chi_is_scale_invariant(sphere2, c):
    base, _ = euler_characteristic(sphere2, 32)
    scaled, _ = euler_characteristic(scale(sphere2, c), 32)
    assert scaled == pytest.approx(base, abs=1e-6)


def test_odd_dimension_is_unsupported(heisenberg):
    with pytest.raises(UnsupportedSpecError):
        euler_characteristic(heisenberg, 8)


@pytest.mark.parametrize('name, params', [
    ('flat_torus', [1, 1, 1, 1]),
    ('sphere', [2, 1.0]),
    ('product:sphere[2,1],sphere[2,1]', []),
    ('product:sphere[2,1],flat_torus[1,1]', []),
])
def test_nonnegative_operator_gives_nonnegative_integrand(name, params):
    assert nonneg_operator_implies_nonneg_integrand(catalog_get(name, params), 16) == 0


@pytest.mark.slow
def test_nonnegative_operator_on_four_sphere_and_cp2(sphere4, cp2):
    assert nonneg_operator_implies_nonneg_integrand(sphere4, 16) == 0
    assert nonneg_operator_implies_nonneg_integrand(cp2, 16) == 0


def test_volume_bound_is_tight_on_the_sphere(sphere2):
    details = {}
    sup_p, vol, holds = volume_lower_bound_check(sphere2, 1.0, 32, details=details)
    assert holds
    assert sup_p == pytest.approx(1 / (2 * math.pi))
    assert vol == pytest.approx(4 * math.pi)
    assert abs(details['residual']) <= 1e-6
    assert details['respects_floor']


def test_volume_bound_on_sphere_products(s2xs2):
    sup_p, vol, holds = volume_lower_bound_check(s2xs2, 1.0, 16)
    assert holds
    assert sup_p * vol == pytest.approx(4.0, rel=1e-8)


def test_volume_bound_precondition():
    with pytest.raises(PreconditionError) as info:
        volume_lower_bound_check(catalog_get('sphere', [2, 0.5]), 1.0, 8)
    assert info.value.node is not None


def test_shared_evaluation(s2xs2):
    evaluation = integrate(s2xs2, 8)
    chi, _ = euler_characteristic(s2xs2, evaluation=evaluation)
    assert nonneg_operator_implies_nonneg_integrand(s2xs2, evaluation=evaluation) == 0
    assert chi == pytest.approx(4.0, abs=1e-2)


def test_integrand_bound_and_volume_floor():
    bound = euler_integrand_bound(2, 1.0)
    assert bound == pytest.approx(4 / (8 * math.pi))
    assert volume_floor(2, 1.0, 2) == pytest.approx(4 * math.pi)
    assert volume_floor(4, 0.0, 0) == 0.0
    assert volume_floor(4, 0.0, 2) == math.inf
    with pytest.raises(DomainError):
        euler_integrand_bound(4, -1.0)
