import numpy as np
import pytest

from localgen.lindblad import LindbladSpec, build_generator
from localgen.models import dephasing_generator, lowering_generator, raising_generator

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def L0():
    return dephasing_generator()


@pytest.fixture(scope="session")
def L1():
    return raising_generator()


@pytest.fixture(scope="session")
def L2():
    return lowering_generator()


def random_matrix(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_hermitian(rng, d):
    m = random_matrix(rng, d)
    return 0.5 * (m + m.conj().T)


def random_density(rng, d):
    m = random_matrix(rng, d)
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def random_spec(rng, d, n_terms=2):
    terms = tuple((float(rng.uniform(0, 2)), random_matrix(rng, d) / np.sqrt(d)) for _ in range(n_terms))
    return LindbladSpec(random_hermitian(rng, d), terms)


def random_generator(rng, d, n_terms=2):
    return build_generator(random_spec(rng, d, n_terms))
