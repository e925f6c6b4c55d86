"""Finite-dimensional abelian C*-algebras and their elements.

Every finite-dimensional abelian C*-algebra has a complete atomic basis
x_1..x_n (x_i* = x_i, x_i x_j = delta_ij x_i, sum x_i = 1), so an element is
the coefficient sequence a_i of x = sum a_i x_i. All algebra operations are
coordinatewise, the spectrum is the set of coefficients and the norm is
max |a_i|.
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce
from itertools import product
from numbers import Number
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from .config import resolve_tol
from .errors import (
    AlgebraMismatchError,
    DimensionError,
    DomainError,
    NotSelfAdjointError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Algebra:
    """An n-dimensional abelian C*-algebra, identified by its atomic basis.

    Arguments:
    dim -- number of atomic basis elements
    labels -- optional distinct symbol names, one per basis element
    """

    dim: int
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if isinstance(self.dim, bool) or not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise DimensionError(f"Algebra dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != self.dim:
                raise DimensionError(f"Expected {self.dim} labels, got {len(labels)}")
            if len(set(labels)) != len(labels):
                raise DimensionError(f"Labels must be distinct: {labels}")
            object.__setattr__(self, "labels", labels)

    def element(self, coeffs):
        return Element(self, coeffs)

    def identity(self):
        return Element(self, np.ones(self.dim))

    def zero(self):
        return Element(self, np.zeros(self.dim))

    def basis(self, i):
        """The atomic projection x_i (0-based)."""
        if not 0 <= i < self.dim:
            raise DimensionError(f"Basis index {i} out of range for dimension {self.dim}")
        coeffs = np.zeros(self.dim)
        coeffs[i] = 1.0
        return Element(self, coeffs)

    def tensor(self, other):
        return tensor_algebra(self, other)

    def power(self, n):
        if n < 1:
            raise DimensionError(f"Tensor power must be >= 1, got {n}")
        return tensor_algebra(*([self] * n))


def tensor_algebra(*algebras):
    """A_1 (x) ... (x) A_k with basis strings in lexicographic order."""
    if not algebras:
        raise DimensionError("tensor_algebra needs at least one factor")
    dim = math.prod(a.dim for a in algebras)
    labels = None
    if all(a.labels is not None for a in algebras):
        labels = tuple("".join(parts) for parts in product(*(a.labels for a in algebras)))
        if len(set(labels)) != len(labels):
            labels = tuple(",".join(parts) for parts in product(*(a.labels for a in algebras)))
    return Algebra(dim, labels)


class Element:
    """x = sum_i a_i x_i over the atomic basis of `algebra`.

    Elements are immutable values. Scalars combine with elements as multiples
    of the identity under + and -, and as scalar multiplication under *.
    """

    __slots__ = ("algebra", "coeffs")
    __hash__ = None
    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, algebra, coeffs):
        arr = np.array(coeffs, dtype=complex)
        if arr.ndim != 1 or arr.shape[0] != algebra.dim:
            raise DimensionError(
                f"Expected {algebra.dim} coefficients, got shape {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    # --- arithmetic ---

    def _coerce(self, other):
        if isinstance(other, Element):
            if other.algebra != self.algebra:
                raise AlgebraMismatchError(
                    f"Elements live in different algebras ({self.algebra.dim} vs {other.algebra.dim})"
                )
            return other.coeffs
        if isinstance(other, Number):
            return complex(other) * np.ones(self.algebra.dim)
        return NotImplemented

    def __add__(self, other):
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.coeffs + coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.coeffs - coeffs)

    def __rsub__(self, other):
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        return Element(self.algebra, coeffs - self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Number):
            return Element(self.algebra, complex(other) * self.coeffs)
        coeffs = self._coerce(other)
        if coeffs is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.coeffs * coeffs)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        return Element(self.algebra, self.coeffs / complex(other))

    def __neg__(self):
        return Element(self.algebra, -self.coeffs)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            return NotImplemented
        return Element(self.algebra, self.coeffs ** int(n))

    def star(self):
        """The involution: conjugate every coefficient."""
        return Element(self.algebra, np.conj(self.coeffs))

    # --- comparison and inspection ---

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.algebra == other.algebra and np.array_equal(self.coeffs, other.coeffs)

    def allclose(self, other, tol=None):
        tol = resolve_tol(tol)
        other = self._coerce(other)
        return bool(np.all(np.abs(self.coeffs - other) <= tol))

    def is_zero(self, tol=None):
        tol = resolve_tol(tol)
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def is_self_adjoint(self, tol=None):
        tol = resolve_tol(tol)
        return bool(np.max(np.abs(self.coeffs.imag)) <= tol)

    def is_positive(self, tol=None):
        tol = resolve_tol(tol)
        return self.is_self_adjoint(tol) and bool(np.min(self.coeffs.real) >= -tol)

    def is_projection(self, tol=None):
        """p = p* = p^2, i.e. every coefficient is 0 or 1."""
        tol = resolve_tol(tol)
        c = self.coeffs
        return bool(np.all((np.abs(c) <= tol) | (np.abs(c - 1) <= tol)))

    @property
    def real(self):
        """Self-adjoint part Re x, with x = Re x + i Im x."""
        return Element(self.algebra, self.coeffs.real)

    @property
    def imag(self):
        return Element(self.algebra, self.coeffs.imag)

    def real_coeffs(self, tol=None):
        """Coefficients as floats; raises unless x is self-adjoint."""
        tol = resolve_tol(tol)
        if not self.is_self_adjoint(tol):
            raise NotSelfAdjointError(
                f"Element is not self-adjoint (max |Im a_i| = {np.max(np.abs(self.coeffs.imag)):.3g})"
            )
        return self.coeffs.real.copy()

    def norm(self):
        return norm(self)

    def spectrum(self, tol=None):
        return spectrum(self, tol)

    def tolist(self):
        if self.is_self_adjoint(0.0):
            return [float(a) for a in self.coeffs.real]
        return [[float(a.real), float(a.imag)] for a in self.coeffs]

    def __len__(self):
        return self.algebra.dim

    def __repr__(self):
        if self.is_self_adjoint(0.0):
            shown = np.array2string(self.coeffs.real, precision=6, threshold=12)
        else:
            shown = np.array2string(self.coeffs, precision=6, threshold=12)
        return f"Element({shown}, dim={self.algebra.dim})"


def make_element(algebra, coeffs):
    return Element(algebra, coeffs)


def kron(*elements):
    """x_1 (x) ... (x) x_k in the tensor algebra of their algebras."""
    if not elements:
        raise DimensionError("kron needs at least one element")
    algebra = tensor_algebra(*(e.algebra for e in elements))
    coeffs = reduce(np.kron, (e.coeffs for e in elements))
    return Element(algebra, coeffs)


# ===========================================================
#  Norm, spectrum and value grouping
# ===========================================================

def norm(x):
    """sup over the spectrum: max |a_i|."""
    return float(np.max(np.abs(x.coeffs)))


def group_values(values, tol=None):
    """Group equal (within tol) entries of a 1-D array.

    Returns a list of (value, indices) in order of first appearance; value is
    the entry at the smallest index of the group. Every member lies within
    tol of its group's anchor (the smallest member for real values, the first
    member otherwise), so groups never chain past tol.
    """
    tol = resolve_tol(tol)
    values = np.asarray(values)
    if values.size == 0:
        return []
    if np.iscomplexobj(values) and np.any(values.imag != 0):
        groups = []
        for i, v in enumerate(values):
            for rep, members in groups:
                if abs(v - rep) <= tol:
                    members.append(i)
                    break
            else:
                groups.append((v, [i]))
        return [(rep, np.array(members)) for rep, members in groups]

    real = values.real if np.iscomplexobj(values) else values
    order = np.argsort(real, kind="stable")
    chunks, anchor = [], None
    for i in order:
        if anchor is None or real[i] - anchor > tol:
            chunks.append([])
            anchor = real[i]
        chunks[-1].append(i)
    groups = []
    for chunk in chunks:
        members = np.sort(np.array(chunk))
        groups.append((values[members[0]], members))
    groups.sort(key=lambda g: g[1][0])
    return groups


def spectrum(x, tol=None):
    """Distinct coefficient values, in order of first appearance."""
    return [complex(v) for v, _ in group_values(x.coeffs, tol)]


# ===========================================================
#  Positive/negative parts and spectral decomposition
# ===========================================================

class SelfAdjointParts(NamedTuple):
    abs: Element
    pos: Element
    neg: Element


def decompose_self_adjoint(x, tol=None):
    """|x| = sqrt(x^2), x_+ = (|x| + x)/2, x_- = (|x| - x)/2, coordinatewise."""
    tol = resolve_tol(tol)
    a = x.real_coeffs(tol)
    pos = np.maximum(a, 0.0)
    neg = np.maximum(-a, 0.0)
    return SelfAdjointParts(
        abs=Element(x.algebra, pos + neg),
        pos=Element(x.algebra, pos),
        neg=Element(x.algebra, neg),
    )


def positive_part(x, tol=None):
    return decompose_self_adjoint(x, tol).pos


def negative_part(x, tol=None):
    return decompose_self_adjoint(x, tol).neg


def absolute(x):
    """|x| = sqrt(x x*); defined for every element."""
    return Element(x.algebra, np.abs(x.coeffs))


class SpectralTerm(NamedTuple):
    value: complex
    projection: Element


@dataclass(frozen=True)
class SpectralDecomposition:
    """x = sum value_i P_i with distinct nonzero values and P_i P_j = delta_ij P_i."""

    algebra: Algebra
    terms: Tuple[SpectralTerm, ...]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    @property
    def values(self):
        return [t.value for t in self.terms]

    @property
    def projections(self):
        return [t.projection for t in self.terms]

    def reconstruct(self):
        total = self.algebra.zero()
        for value, projection in self.terms:
            total = total + value * projection
        return total

    def support(self):
        """sum P_i: the identity of the ideal generated by x."""
        total = self.algebra.zero()
        for term in self.terms:
            total = total + term.projection
        return total


def spectral_decomposition(x, tol=None):
    tol = resolve_tol(tol)
    # Projections are built by grouping equal coefficients; this is the
    # Lagrange-interpolation projection g_i(x) evaluated exactly.
    terms = []
    for value, members in group_values(x.coeffs, tol):
        if abs(value) <= tol:
            continue
        mask = np.zeros(x.algebra.dim)
        mask[members] = 1.0
        terms.append(SpectralTerm(complex(value), Element(x.algebra, mask)))
    return SpectralDecomposition(x.algebra, tuple(terms))


def annihilator_identity(x, tol=None):
    """Identity of the annihilator ideal {y : yx = 0}: 1 - sum P_i."""
    tol = resolve_tol(tol)
    return Element(x.algebra, (np.abs(x.coeffs) <= tol).astype(float))


def support_projection(x, tol=None):
    return 1 - annihilator_identity(x, tol)


# ===========================================================
#  Functional calculus: f(x) = sum f(a_i) x_i
# ===========================================================

def _as_real(a, name):
    a = complex(a)
    if abs(a.imag) > resolve_tol():
        raise DomainError(f"{name} is undefined at non-real value {a}")
    return a.real


def square(a):
    return a * a


def sqrt(a):
    r = _as_real(a, "sqrt")
    if r < -resolve_tol():
        raise DomainError(f"sqrt is undefined at negative value {r}")
    return math.sqrt(max(r, 0.0))


def log2_extended(a):
    """log2 on positive values, 0 on zero; undefined on negative values.

    Any positive value, however small, keeps its logarithm: the tolerance
    only absorbs rounding noise below zero.
    """
    r = _as_real(a, "log2")
    if r < -resolve_tol():
        raise DomainError(f"log2 is undefined at negative value {r}")
    if r <= 0:
        return 0.0
    return math.log2(r)


def apply_function(f: Callable, x: Element):
    out = []
    for a in x.coeffs:
        try:
            value = f(complex(a))
        except DomainError:
            raise
        except (ValueError, ZeroDivisionError, OverflowError, TypeError) as e:
            raise DomainError(f"{getattr(f, '__name__', f)} is undefined at {complex(a)}: {e}") from e
        if not np.isfinite(value):
            raise DomainError(f"{getattr(f, '__name__', f)} is not finite at {complex(a)}")
        out.append(value)
    return Element(x.algebra, out)


def apply_real(f: Callable, x: Element, tol=None):
    """Vectorized f on the real coefficients of a self-adjoint element."""
    tol = resolve_tol(tol)
    a = x.real_coeffs(tol)
    with np.errstate(all="ignore"):
        values = np.asarray(f(a), dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{getattr(f, '__name__', f)} is not finite on the spectrum")
    return Element(x.algebra, values)