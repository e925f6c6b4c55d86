import pytest

from abelian_info.algebra import Algebra, Element, annihilator_identity, spectrum
from abelian_info.config import configure, get_settings, reset, resolve_tol
from abelian_info.errors import InvalidStateError, ValidationError
from abelian_info.states import State

A2 = Algebra(2)


def test_defaults():
    settings = get_settings()
    assert settings.tolerance == 1e-9
    assert settings.stochastic_tolerance == 1e-9
    assert resolve_tol() == 1e-9
    assert resolve_tol(0.5) == 0.5


def test_tolerance_from_environment(monkeypatch):
    x = Element(A2, [0.05, 1])
    assert annihilator_identity(x).tolist() == [0, 0]
    monkeypatch.setenv("ABELIAN_INFO_TOLERANCE", "0.1")
    reset()
    assert annihilator_identity(x).tolist() == [1, 0]
    assert len(spectrum(Element(A2, [1, 1.05]))) == 1
    # an explicit argument still wins
    assert annihilator_identity(x, tol=1e-9).tolist() == [0, 0]


def test_configure_tolerance():
    x = Element(A2, [0.05, 1])
    configure(tolerance=0.1)
    assert annihilator_identity(x).tolist() == [1, 0]
    reset()
    assert annihilator_identity(x).tolist() == [0, 0]


def test_stochastic_tolerance(monkeypatch):
    with pytest.raises(InvalidStateError):
        State(A2, [0.5, 0.55])
    monkeypatch.setenv("ABELIAN_INFO_STOCHASTIC_TOLERANCE", "0.1")
    reset()
    assert State(A2, [0.5, 0.55]).weights.tolist() == [0.5, 0.55]


def test_invalid_settings(monkeypatch):
    monkeypatch.setenv("ABELIAN_INFO_TOLERANCE", "-1")
    reset()
    with pytest.raises(ValidationError):
        get_settings()
    monkeypatch.setenv("ABELIAN_INFO_TOLERANCE", "tight")
    reset()
    with pytest.raises(ValidationError):
        resolve_tol()
