import pathlib
from collections.abc import Callable

import pytest

from cupmod import complex, examples


@pytest.fixture(scope="session")
def torus7() -> complex.Filtration:
    return examples.torus7()


@pytest.fixture(scope="session")
def rp2_6() -> complex.Filtration:
    return examples.rp2_6()


@pytest.fixture(scope="session")
def rp3_11() -> complex.Filtration:
    return examples.rp3_11()


@pytest.fixture(scope="session")
def klein9() -> complex.Filtration:
    return examples.klein9()


@pytest.fixture(scope="session")
def wedge() -> complex.Filtration:
    return examples.wedge_s1_s2()


@pytest.fixture
def hollow_triangle() -> complex.Filtration:
    # Vertices at 0, edges at 1.
    return complex.Filtration.closure([(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def full_triangle() -> complex.Filtration:
    return complex.Filtration.closure([(0, 1, 2)])


@pytest.fixture
def write_filtration(
    tmp_path: pathlib.Path,
) -> Callable[[complex.Filtration, str], pathlib.Path]:
    def write(filtration: complex.Filtration, name: str = "input.flt") -> pathlib.Path:
        path = tmp_path / name
        complex.dump_filtration(filtration, path)
        return path

    return write
