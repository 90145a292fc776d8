import numpy as np
import pytest

from src.metric_catalog import catalog_get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope='session')
def sphere2():
    return catalog_get('sphere', [2, 1.0])


@pytest.fixture(scope='session')
def sphere4():
    return catalog_get('sphere', [4, 1.0])


@pytest.fixture(scope='session')
def torus4():
    return catalog_get('flat_torus', [1, 1, 1, 1])


@pytest.fixture(scope='session')
def s2xs2():
    return catalog_get('product:sphere[2,1],sphere[2,1]')


@pytest.fixture(scope='session')
def cp2():
    return catalog_get('fubini_study_cp2')


@pytest.fixture(scope='session')
def heisenberg():
    return catalog_get('heisenberg_nil', [0.5])


@pytest.fixture(scope='session')
def berger():
    return catalog_get('berger_sphere', [0.5])


CATALOG_ENTRIES = [
    ('sphere', [2, 1.0]),
    ('sphere', [3, 1.0]),
    ('sphere', [4, 1.0]),
    ('sphere', [4, 2.0]),
    ('flat_torus', [1, 2, 3]),
    ('flat_torus', [1, 1, 1, 1]),
    ('berger_sphere', [0.5]),
    ('berger_sphere', [2.0]),
    ('heisenberg_nil', [1.0]),
    ('heisenberg_nil', [0.25]),
    ('fubini_study_cp2', []),
    ('product:sphere[2,1],sphere[2,1]', []),
    ('product:sphere[2,1],flat_torus[1,1]', []),
    ('product:heisenberg_nil[1],heisenberg_nil[0.5]', []),
    ('product:sphere[2,1],berger_sphere[0.5]', []),
]


@pytest.fixture(scope='session', params=CATALOG_ENTRIES, ids=lambda e: f"{e[0]}{e[1] or ''}")
def catalog_entry(request):
    name, params = request.param
    return catalog_get(name, params)
