import math

import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from abelian_info.algebra import (
    Algebra,
    Element,
    absolute,
    annihilator_identity,
    apply_function,
    apply_real,
    decompose_self_adjoint,
    group_values,
    kron,
    log2_extended,
    spectral_decomposition,
    sqrt,
    square,
    support_projection,
)
from abelian_info.errors import (
    AlgebraMismatchError,
    DimensionError,
    DomainError,
    NotSelfAdjointError,
)

from conftest import random_element

A2 = Algebra(2)
A3 = Algebra(3)
A4 = Algebra(4)

coefficients = arrays(
    np.float64,
    (5,),
    elements=st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
)


def test_element_construction():
    assert Element(A2, [1, 1]).allclose(A2.identity())
    assert Element(A3, [2, 0, -1]).spectrum() == [2, 0, -1]
    with pytest.raises(DimensionError):
        Element(A2, [1, 2, 3])
    with pytest.raises(DimensionError):
        Algebra(0)


def test_labels_must_be_distinct():
    assert Algebra(2, ["a", "b"]).labels == ("a", "b")
    with pytest.raises(DimensionError):
        Algebra(2, ["a", "a"])


def test_arithmetic():
    x, y = Element(A2, [1, 0]), Element(A2, [0, 1])
    assert (x * y).is_zero()
    assert Element(A2, [1 + 1j, 2]).star() == Element(A2, [1 - 1j, 2])
    assert Element(A2, [2, 3]) * A2.identity() == Element(A2, [2, 3])
    assert (1 - x) == y
    assert (2 * x + y).tolist() == [2.0, 1.0]
    with pytest.raises(AlgebraMismatchError):
        x + A3.identity()


def test_elements_are_immutable():
    x = A2.identity()
    with pytest.raises(AttributeError):
        x.coeffs = np.zeros(2)
    with pytest.raises(ValueError):
        x.coeffs[0] = 5


def test_norm_and_spectrum():
    x = Element(A2, [3, -4j])
    assert x.norm() == 4
    assert x.spectrum() == [3, -4j]
    assert Algebra(5).identity().spectrum() == [1]
    assert A3.zero().norm() == 0
    assert A3.zero().spectrum() == [0]


def test_decompose_self_adjoint():
    parts = decompose_self_adjoint(Element(A2, [2, -3]))
    assert parts.abs.tolist() == [2, 3]
    assert parts.pos.tolist() == [2, 0]
    assert parts.neg.tolist() == [0, 3]
    x = Element(A2, [1, 1])
    assert decompose_self_adjoint(x).pos == x
    assert decompose_self_adjoint(x).neg.is_zero()
    with pytest.raises(NotSelfAdjointError):
        decompose_self_adjoint(Element(A2, [1 + 1j, 0]))


def test_spectral_decomposition():
    decomposition = spectral_decomposition(Element(A4, [2, 2, 5, 0]))
    assert decomposition.values == [2, 5]
    assert decomposition.projections[0].tolist() == [1, 1, 0, 0]
    assert decomposition.projections[1].tolist() == [0, 0, 1, 0]
    assert len(spectral_decomposition(A3.identity())) == 1
    assert len(spectral_decomposition(A2.zero())) == 0


def test_annihilator_identity():
    assert annihilator_identity(Element(A4, [2, 0, 5, 0])).tolist() == [0, 1, 0, 1]
    assert annihilator_identity(A3.identity()).is_zero()
    assert annihilator_identity(A3.zero()) == A3.identity()
    x = Element(A4, [2, 0, 5, 0])
    assert (support_projection(x) + annihilator_identity(x)) == A4.identity()


def test_functional_calculus():
    assert apply_function(square, Element(A2, [2, -1])).tolist() == [4, 1]
    assert apply_function(log2_extended, Element(A3, [0.5, 0, 1])).tolist() == [-1, 0, 0]
    with pytest.raises(DomainError):
        apply_function(sqrt, Element(A2, [-1, 4]))
    with pytest.raises(DomainError):
        apply_function(log2_extended, Element(A2, [-1, 4]))
    with pytest.raises(DomainError):
        apply_real(np.log2, Element(A2, [0, 4]))


def test_log2_keeps_tiny_positive_values():
    assert log2_extended(1e-12) == math.log2(1e-12)
    assert log2_extended(5e-10) == pytest.approx(-30.897, abs=1e-3)
    # rounding noise below zero is treated as zero
    assert log2_extended(-1e-12) == 0.0
    with pytest.raises(DomainError):
        log2_extended(-1e-6)


def test_grouping_does_not_chain():
    groups = group_values(np.array([1.6e-9, 0.0, 0.8e-9]))
    assert [members.tolist() for _, members in groups] == [[0], [1, 2]]
    for _, members in group_values(np.arange(10) * 0.6e-9):
        anchor = members.min() * 0.6e-9
        assert all(m * 0.6e-9 - anchor <= 1e-9 for m in members)
    assert len(group_values(np.array([0, 0.8e-9, 1.6e-9]))) == 2


def test_kron_is_lexicographic():
    x = kron(Element(A2, [1, 2]), Element(A3, [1, 10, 100]))
    assert x.algebra.dim == 6
    assert x.tolist() == [1, 10, 100, 2, 20, 200]
    assert Algebra(2, "ab").tensor(Algebra(2, "cd")).labels == ("ac", "ad", "bc", "bd")


def test_random_elements_satisfy_algebra_laws(rng):
    algebra = Algebra(6)
    for _ in range(1000):
        x, y, z = (random_element(rng, algebra) for _ in range(3))
        assert ((x * y) * z).allclose(x * (y * z))
        assert (x * y).allclose(y * x)
        assert (x * (y + z)).allclose(x * y + x * z)
        assert (x * y).star().allclose(y.star() * x.star())
        # C*-identity
        assert math.isclose((x.star() * x).norm(), x.norm() ** 2, rel_tol=1e-12)
        decomposition = spectral_decomposition(x)
        assert decomposition.reconstruct().allclose(x)
        for i, p in enumerate(decomposition.projections):
            assert p.is_projection()
            for q in decomposition.projections[i + 1:]:
                assert (p * q).is_zero()


@seed(1)
@given(coefficients)
def test_positive_and_negative_parts(values):
    x = Element(Algebra(5), values)
    parts = decompose_self_adjoint(x)
    assert (parts.pos - parts.neg).allclose(x)
    assert (parts.pos * parts.neg).is_zero()
    assert parts.abs.allclose(absolute(x))
    assert parts.pos.is_positive() and parts.neg.is_positive()
