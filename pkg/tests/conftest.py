"""
Fixtures compartilhadas: domínios, formas montadas e configurações mínimas
"""
import pytest

from hardyheat.core import geometry, potentials
from hardyheat.core.discretize import assemble, build_mesh
from hardyheat.core.spectral import solve_ground_state
from hardyheat.infra.logging import configure_logging


@pytest.fixture(scope="session", autouse=True)
def _logging_silencioso():
    configure_logging("WARNING")


@pytest.fixture(scope="session")
def intervalo():
    return geometry.interval(0.0, 1.0, beta=0.25)


@pytest.fixture(scope="session")
def bola():
    return geometry.radial_ball(1.0, ambient_n=3)


@pytest.fixture(scope="session")
def forma_zero(intervalo):
    """V = 0 em malha uniforme 2^-8"""
    mesh = build_mesh(intervalo, None, 2.0 ** -8, grade="none")
    return assemble(mesh, potentials.zero_spec(1))


@pytest.fixture(scope="session")
def gs_zero(forma_zero):
    return solve_ground_state(forma_zero)


@pytest.fixture(scope="session")
def forma_exemplo_iii(intervalo):
    spec = potentials.example_III(intervalo)
    return assemble(build_mesh(intervalo, spec, 2.0 ** -12), spec)


@pytest.fixture(scope="session")
def gs_exemplo_iii(forma_exemplo_iii):
    return solve_ground_state(forma_exemplo_iii)


@pytest.fixture
def config_minima():
    """Experimento barato: V = 0 no intervalo, malha uniforme"""
    return {
        "name": "zero_rapido",
        "domain": {"shape": "interval", "a": 0.0, "b": 1.0},
        "potential": {"id": "zero"},
        "mesh": {"h_min": 2.0 ** -7, "grade": "none", "levels": 2},
        "tasks": ["spectrum", "volume"],
        "params": {
            "spectrum": {"oracle": "zero_interval"},
            "volume": {"points": 5, "radii": 5},
        },
        "seed": 3,
    }
