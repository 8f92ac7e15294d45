import numpy as np
import pytest

from nomad_phase_retrieval.config import CheckerPattern, PhantomSpec
from nomad_phase_retrieval.field import ComplexField
from nomad_phase_retrieval.log import configure_logging
from nomad_phase_retrieval.measurement import forward_magnitude
from nomad_phase_retrieval.phantom import make_phantom


@pytest.fixture(autouse=True)
def _structlog_to_current_stderr():
    # CliRunner swaps sys.stderr; rebind before every test
    configure_logging('warning')


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def random_field(rng):
    def make(shape=(16, 16), dx=1.0, dy=1.0) -> ComplexField:
        samples = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return ComplexField(samples, dx, dy)

    return make


@pytest.fixture
def small_spec():
    return PhantomSpec(
        window=(32, 32), support_extent=(14, 14), pattern=CheckerPattern(block=4)
    )


@pytest.fixture
def small_phantom(small_spec):
    return make_phantom(small_spec)


@pytest.fixture
def small_problem(small_phantom):
    obj, mask = small_phantom
    return forward_magnitude(obj), mask, obj
