import numpy as np
import pytest

from src.curvature_engine import curvature_at
from src.errors import DomainError
from src.exterior_algebra import basis_size
from src.metric_catalog import catalog_get, random_interior_points
from src.weitzenbock import (
    FormVector,
    admissible_degrees,
    curvature_action,
    pw_bound_check,
    ricci_agreement,
    self_adjoint_residual,
    uniform_weitzenbock_floor,
    weitzenbock_constant,
    weitzenbock_matrix,
    weitzenbock_ric,
)


def _point(spec, seed=0):
    if not spec.chart_dim:
        return curvature_at(spec)
    return curvature_at(spec, random_interior_points(spec, 1, seed=seed)[0])


def test_form_vector_checks_length():
    with pytest.raises(DomainError):
        FormVector(k=2, m=4, coeffs=np.zeros(5))
    assert FormVector.basis(4, 2, 3).norm_squared() == 1.0


def test_curvature_action_on_flat_torus_vanishes(torus4):
    cp = curvature_at(torus4, np.full(4, 0.5))
    alpha = FormVector(k=2, m=4, coeffs=np.arange(6.0))
    assert np.all(curvature_action(cp, 0, 1, alpha).coeffs == 0)


def test_curvature_action_kills_top_forms_on_surfaces(sphere2):
    cp = curvature_at(sphere2, [1.0, 1.0])
    top = FormVector.basis(2, 2, 0)
    for a in range(2):
        for b in range(2):
            np.testing.assert_allclose(curvature_action(cp, a, b, top).coeffs, 0.0, atol=1e-12)


def test_curvature_action_on_one_forms_of_the_sphere(sphere4):
    cp = curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])
    result = curvature_action(cp, 0, 1, FormVector.basis(4, 1, 0)).coeffs
    expected = np.zeros(4)
    expected[1] = -1.0
    np.testing.assert_allclose(result, expected, atol=1e-10)


def test_curvature_action_is_linear(sphere4, rng):
    cp = curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])
    a = FormVector(k=2, m=4, coeffs=rng.standard_normal(6))
    b = FormVector(k=2, m=4, coeffs=rng.standard_normal(6))
    combined = FormVector(k=2, m=4, coeffs=2 * a.coeffs - 3 * b.coeffs)
    np.testing.assert_allclose(
        curvature_action(cp, 1, 3, combined).coeffs,
        2 * curvature_action(cp, 1, 3, a).coeffs - 3 * curvature_action(cp, 1, 3, b).coeffs,
        atol=1e-12,
    )


def test_dimension_mismatch(sphere4):
    cp = curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])
    with pytest.raises(DomainError):
        weitzenbock_ric(cp, FormVector.basis(3, 1, 0))
    with pytest.raises(DomainError):
        curvature_action(cp, 0, 4, FormVector.basis(4, 1, 0))


@pytest.mark.parametrize('m', [2, 3, 4, 5])
def test_constant_curvature_eigenvalue(m):
    spec = catalog_get('sphere', [m, 1.0])
    cp = _point(spec)
    for k in range(m + 1):
        expected = k * (m - k) * np.eye(basis_size(m, k))
        np.testing.assert_allclose(weitzenbock_matrix(cp, k), expected, atol=1e-8)


def test_degree_zero_and_top_degree_give_zero(sphere4):
    cp = curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])
    assert np.all(weitzenbock_ric(cp, FormVector.basis(4, 0, 0)).coeffs == 0)
    assert np.all(weitzenbock_ric(cp, FormVector.basis(4, 4, 0)).coeffs == 0)


def test_one_forms_match_ricci(catalog_entry):
    for seed in range(3):
        assert ricci_agreement(_point(catalog_entry, seed)) <= 1e-9


@pytest.mark.parametrize('entry', ['sphere4', 'cp2'])
def test_one_forms_match_ricci_over_many_points(entry, request):
    spec = request.getfixturevalue(entry)
    worst = max(ricci_agreement(curvature_at(spec, x)) for x in random_interior_points(spec, 100, seed=11))
    assert worst <= 1e-9


def test_self_adjoint_on_every_degree(catalog_entry):
    cp = _point(catalog_entry)
    for k in range(catalog_entry.m + 1):
        assert self_adjoint_residual(cp, k) <= 1e-9


def test_hodge_symmetric_spectrum_on_sphere(sphere4):
    cp = curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])
    for k in range(5):
        np.testing.assert_allclose(np.linalg.eigvalsh(weitzenbock_matrix(cp, k)),
                                   np.linalg.eigvalsh(weitzenbock_matrix(cp, 4 - k)), atol=1e-8)


def test_admissible_degrees():
    assert admissible_degrees(4, 1) == [1, 3]
    assert admissible_degrees(4, 2) == [1, 2, 3]
    assert admissible_degrees(6, 2) == [1, 2, 4, 5]


def test_pw_flat_torus_is_equality(torus4):
    cp = curvature_at(torus4, np.full(4, 0.5))
    details = {}
    min_slack, holds = pw_bound_check(cp, 2, samples=50, seed=0, details=details)
    assert holds
    assert min_slack == pytest.approx(0.0, abs=1e-14)
    assert all(d['kappa'] == 0.0 for d in details.values())


def test_pw_sphere_has_positive_slack(sphere4):
    cp = curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])
    details = {}
    min_slack, holds = pw_bound_check(cp, 2, samples=200, seed=1, details=details)
    assert holds
    assert details[2]['kappa'] == 0.0
    assert details[2]['eigen_min_slack'] == pytest.approx(4.0)
    assert min_slack > 2.9


def test_pw_heisenberg_is_sharp_on_one_forms(heisenberg):
    cp = curvature_at(heisenberg)
    details = {}
    min_slack, holds = pw_bound_check(cp, 1, samples=1000, seed=2, details=details)
    assert holds
    eps2 = 0.25
    assert details[1]['kappa'] == pytest.approx(-eps2 / 4)
    assert details[1]['eigen_min_slack'] == pytest.approx(0.0, abs=1e-12)


def test_pw_is_deterministic(berger):
    cp = curvature_at(berger)
    assert pw_bound_check(cp, 1, 100, 5) == pw_bound_check(cp, 1, 100, 5)


def test_pw_rejects_bad_p(sphere4):
    cp = curvature_at(sphere4, [1.0, 1.2, 0.9, 2.0])
    with pytest.raises(DomainError):
        pw_bound_check(cp, 3, 10, 0)
    with pytest.raises(DomainError):
        pw_bound_check(cp, 0, 10, 0)


def test_pw_holds_across_catalog(catalog_entry):
    cp = _point(catalog_entry)
    for p in range(1, catalog_entry.m // 2 + 1):
        for seed in range(3):
            assert pw_bound_check(cp, p, 1000, seed)[1]


@pytest.mark.parametrize('n', range(1, 11))
def test_weitzenbock_constant_is_exhaustive_max(n):
    assert weitzenbock_constant(n) == max(k * (2 * n - k) for k in range(1, 2 * n + 1)) == n * n


def test_weitzenbock_constant_rejects_zero():
    with pytest.raises(DomainError):
        weitzenbock_constant(0)


def test_uniform_floor_on_sphere_product(s2xs2):
    cp = curvature_at(s2xs2, [1.0, 2.0, 1.5, 3.0])
    result = uniform_weitzenbock_floor(cp, 5)
    assert result['holds']
    assert result['floor'] == pytest.approx(-4 / 5)
    assert result['min_eigenvalue'] >= -1e-10
    with pytest.raises(DomainError):
        uniform_weitzenbock_floor(curvature_at(catalog_get('heisenberg_nil', [1.0])), 1)
