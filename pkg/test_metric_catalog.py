import math

import numpy as np
import pytest

from src.errors import ConfigurationError, DomainError, MetricValidationError
from src.metric_catalog import (
    ChartSpec,
    HomogeneousSpec,
    ProductSpec,
    berger_structure_constants,
    catalog_get,
    finite_difference_derivatives,
    heisenberg_structure_constants,
    jacobi_residual,
    list_catalog,
    metric_derivatives,
    parse_entry,
    random_interior_points,
    scale,
    without_derivatives,
)


def test_list_catalog_names():
    names = list_catalog()
    for name in ('sphere', 'flat_torus', 'berger_sphere', 'fubini_study_cp2', 'heisenberg_nil'):
        assert name in names


def test_unknown_entry_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        catalog_get('klein_bottle')


@pytest.mark.parametrize('name, params', [
    ('sphere', [4]),
    ('sphere', [4, -1.0]),
    ('sphere', [1.5, 1.0]),
    ('flat_torus', []),
    ('berger_sphere', [0.0]),
    ('fubini_study_cp2', [1.0]),
])
def test_invalid_parameters(name, params):
    with pytest.raises(ConfigurationError):
        catalog_get(name, params)


def test_sphere_metadata():
    spec = catalog_get('sphere', [4, 2.0])
    assert spec.m == 4
    assert spec.euler_char == 2
    assert spec.diameter.value == pytest.approx(2 * math.pi)
    assert spec.diameter.flag == 'exact'
    assert spec.volume == pytest.approx(8 * math.pi ** 2 / 3 * 16)
    assert spec.betti == (1, 0, 0, 0, 1)
    assert catalog_get('sphere', [3, 1.0]).euler_char == 0


def test_flat_torus_metadata():
    spec = catalog_get('flat_torus', [1, 2, 2])
    assert spec.euler_char == 0
    assert spec.volume == pytest.approx(4.0)
    assert spec.diameter.value == pytest.approx(1.5)
    assert spec.infinite_pi1
    assert spec.betti == (1, 3, 3, 1)


def test_homogeneous_entries_carry_upper_bound_diameters():
    for name in ('berger_sphere', 'heisenberg_nil'):
        spec = catalog_get(name, [0.5])
        assert spec.is_homogeneous
        assert spec.chart_dim == 0
        assert spec.diameter.flag == 'upper_bound'
    assert catalog_get('heisenberg_nil', [0.5]).diameter.value == pytest.approx(3.0)


def test_structure_constants_satisfy_jacobi():
    for c in (berger_structure_constants(0.3), heisenberg_structure_constants(2.0)):
        assert jacobi_residual(HomogeneousSpec(m=3, structure_constants=c)) == pytest.approx(0.0, abs=1e-12)


def test_parse_entry():
    assert parse_entry('sphere[4,1]') == ('sphere', [4.0, 1.0])
    assert parse_entry('fubini_study_cp2') == ('fubini_study_cp2', [])
    assert parse_entry(' heisenberg_nil[0.5] ') == ('heisenberg_nil', [0.5])
    with pytest.raises(ConfigurationError):
        parse_entry('sphere[4,x]')


def test_product_of_charts_is_a_chart(s2xs2):
    assert isinstance(s2xs2.geometry, ChartSpec)
    assert s2xs2.m == 4
    assert s2xs2.euler_char == 4
    assert s2xs2.volume == pytest.approx(16 * math.pi ** 2)
    assert s2xs2.diameter.value == pytest.approx(math.sqrt(2) * math.pi)
    assert s2xs2.betti == (1, 0, 2, 0, 1)
    assert s2xs2.geometry.cyclic_axes == (1, 3)


def test_product_of_homogeneous_is_homogeneous():
    spec = catalog_get('product:heisenberg_nil[1],berger_sphere[1]')
    assert isinstance(spec.geometry, HomogeneousSpec)
    assert spec.m == 6
    assert spec.infinite_pi1
    assert spec.volume == pytest.approx(1.0 * 2 * math.pi ** 2)


def test_mixed_product_keeps_factors():
    spec = catalog_get('product:sphere[2,1],berger_sphere[0.5]')
    assert isinstance(spec.geometry, ProductSpec)
    assert spec.m == 5
    assert spec.chart_dim == 2
    assert spec.diameter.flag == 'upper_bound'


def test_scaled_metadata():
    base = catalog_get('sphere', [2, 1.0])
    scaled = scale(base, 3.0)
    assert scaled.diameter.value == pytest.approx(3 * math.pi)
    assert scaled.volume == pytest.approx(9 * 4 * math.pi)
    x = np.array([1.0, 2.0])
    np.testing.assert_allclose(metric_derivatives(scaled, x)[0], 9 * metric_derivatives(base, x)[0])
    via_name = catalog_get('scaled:sphere[2,1]', [3.0])
    assert via_name.volume == pytest.approx(scaled.volume)
    with pytest.raises(ConfigurationError):
        scale(base, 0.0)


def test_scaled_homogeneous_divides_structure_constants():
    spec = catalog_get('heisenberg_nil', [1.0])
    scaled = scale(spec, 2.0)
    np.testing.assert_allclose(scaled.geometry.structure_constants, spec.geometry.structure_constants / 2)


def test_jacobi_violation_rejected():
    from src.metric_catalog import _homogeneous
    c = np.zeros((3, 3, 3))
    c[0, 1, 2], c[1, 0, 2] = 1.0, -1.0
    c[1, 2, 1], c[2, 1, 1] = 1.0, -1.0
    with pytest.raises(ConfigurationError):
        _homogeneous(c)


@pytest.mark.parametrize('name, params, x', [
    ('sphere', [4, 1.0], [1.1, 0.7, 2.0, 3.0]),
    ('fubini_study_cp2', [], [0.6, 1.0, 1.3, 2.0]),
])
def test_finite_differences_agree_with_closed_form(name, params, x):
    spec = catalog_get(name, params)
    x = np.array(x)
    _, dg, d2g = metric_derivatives(spec, x)
    fd_dg, fd_d2g = finite_difference_derivatives(spec.geometry, x)
    np.testing.assert_allclose(fd_dg, dg, atol=1e-8)
    np.testing.assert_allclose(fd_d2g, d2g, atol=1e-6)


def test_finite_differences_over_many_points(sphere4):
    for x in random_interior_points(sphere4, 100, seed=7):
        _, dg, d2g = metric_derivatives(sphere4, x)
        fd_dg, fd_d2g = finite_difference_derivatives(sphere4.geometry, x)
        for approx, exact in ((fd_dg, dg), (fd_d2g, d2g)):
            assert np.max(np.abs(approx - exact)) <= 1e-7 * max(1.0, float(np.max(np.abs(exact))))


def test_finite_differences_refuse_the_boundary(sphere2):
    with pytest.raises(DomainError):
        finite_difference_derivatives(sphere2.geometry, np.array([1e-5, 1.0]))


def test_without_derivatives_falls_back_to_finite_differences(sphere4):
    fd_spec = without_derivatives(sphere4)
    assert fd_spec.geometry.dg is None
    x = np.array([1.1, 0.7, 2.0, 3.0])
    np.testing.assert_allclose(metric_derivatives(fd_spec, x)[2], metric_derivatives(sphere4, x)[2], atol=1e-6)


def test_non_spd_metric_rejected():
    chart = ChartSpec(m=2, lower=(0.0, 0.0), upper=(1.0, 1.0), g=lambda x: np.diag([1.0, -1.0]),
                      dg=lambda x: np.zeros((2, 2, 2)), d2g=lambda x: np.zeros((2, 2, 2, 2)))
    with pytest.raises(MetricValidationError):
        metric_derivatives(chart, np.array([0.5, 0.5]))


def test_random_interior_points_are_seeded_and_interior(cp2):
    first = random_interior_points(cp2, 5, seed=3)
    second = random_interior_points(cp2, 5, seed=3)
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a, b)
    for x in first:
        assert np.all(x > 0)
        assert x[1] < 2 * math.pi and x[3] < 2 * math.pi
