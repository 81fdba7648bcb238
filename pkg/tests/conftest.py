import numpy as np
import pytest

from decem import bundled, mesh


@pytest.fixture(scope="session")
def icosphere1():
    return bundled.bundled_surface("icosphere_1.obj")


@pytest.fixture(scope="session")
def icosphere1_metrics(icosphere1):
    return mesh.compute_dual_metrics(icosphere1)


@pytest.fixture(scope="session")
def cavity1():
    return bundled.bundled_surface("cavity_1.obj")


@pytest.fixture(scope="session")
def cavity1_metrics(cavity1):
    return mesh.compute_dual_metrics(cavity1)


@pytest.fixture
def single_triangle():
    return mesh.from_arrays([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


@pytest.fixture
def equilateral():
    return mesh.from_arrays(
        [[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0]], [[0, 1, 2]]
    )


@pytest.fixture
def two_triangles():
    """Two equilateral triangles sharing the edge (0,1); all faces acute."""
    v = [
        [0, 0, 0],
        [1, 0, 0],
        [0.5, np.sqrt(3) / 2, 0],
        [0.5, -np.sqrt(3) / 2, 0],
    ]
    return mesh.from_arrays(v, [[0, 1, 2], [0, 3, 1]])


ICOSAHEDRON_OBJ = """\
v -0.5257311121191336 0.85065080835204 0.0
v 0.5257311121191336 0.85065080835204 0.0
v -0.5257311121191336 -0.85065080835204 0.0
v 0.5257311121191336 -0.85065080835204 0.0
v 0.0 -0.5257311121191336 0.85065080835204
v 0.0 0.5257311121191336 0.85065080835204
v 0.0 -0.5257311121191336 -0.85065080835204
v 0.0 0.5257311121191336 -0.85065080835204
v 0.85065080835204 0.0 -0.5257311121191336
v 0.85065080835204 0.0 0.5257311121191336
v -0.85065080835204 0.0 -0.5257311121191336
v -0.85065080835204 0.0 0.5257311121191336
f 1 12 6
f 1 6 2
f 1 2 8
f 1 8 11
f 1 11 12
f 2 6 10
f 6 12 5
f 12 11 3
f 11 8 7
f 8 2 9
f 4 10 5
f 4 5 3
f 4 3 7
f 4 7 9
f 4 9 10
f 5 10 6
f 3 5 12
f 7 3 11
f 9 7 8
f 10 9 2
"""


@pytest.fixture
def icosahedron_path(tmp_path):
    p = tmp_path / "icosahedron.obj"
    p.write_text(ICOSAHEDRON_OBJ)
    return str(p)
