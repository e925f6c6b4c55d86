import numpy as np
import pytest

from abelian_info.algebra import Algebra, Element
from abelian_info.config import reset
from abelian_info.states import State


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    monkeypatch.delenv("ABELIAN_INFO_BUDGET", raising=False)
    monkeypatch.delenv("ABELIAN_INFO_TOLERANCE", raising=False)
    monkeypatch.delenv("ABELIAN_INFO_STOCHASTIC_TOLERANCE", raising=False)
    reset()
    yield
    reset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, dim):
    w = rng.random(dim) + 1e-3
    return State(Algebra(dim), w / w.sum())


def random_element(rng, algebra, complex_=True):
    coeffs = rng.normal(size=algebra.dim)
    if complex_:
        coeffs = coeffs + 1j * rng.normal(size=algebra.dim)
    return Element(algebra, coeffs)
