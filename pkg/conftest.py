# conftest.py
import pytest

from ionspin.models.trap import YB171, MagneticField, QubitSpec
from ionspin.services import sequences


@pytest.fixture
def yb():
    return YB171


@pytest.fixture
def qubit():
    return QubitSpec(species=YB171)


@pytest.fixture
def field():
    return MagneticField(gradient=100.0)


@pytest.fixture(scope="session")
def library():
    return sequences.default_trap_library()


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"
