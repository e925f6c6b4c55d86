"""Finite tensor powers and the infinite tensor product of one factor algebra.

An element of the infinite product with finite support is a finite sum of
basis strings z_{i1} (x) ... (x) z_{ik} (x) 1 (x) 1 ..., stored as a map from
prefix strings (tuples of 0-based symbols) to coefficients. Two basis strings
multiply to the longer one when one is a prefix of the other and to 0
otherwise.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import reduce
from itertools import product
from numbers import Number
from types import MappingProxyType
from typing import Optional, Tuple

import numpy as np

from .algebra import Algebra, Element
from .config import check_budget, resolve_tol
from .errors import AlgebraMismatchError, DimensionError, InvalidStateError
from .states import State

logger = logging.getLogger(__name__)

PrefixString = Tuple[int, ...]


class TensorElement:
    """Finite-support element of the infinite tensor power of `factor`."""

    __slots__ = ("factor", "terms")
    __hash__ = None

    def __init__(self, factor, terms=None):
        merged = {}
        for s, c in dict(terms or {}).items():
            s = tuple(int(i) for i in s)
            for i in s:
                if not 0 <= i < factor.dim:
                    raise DimensionError(f"Symbol {i} out of range for factor dimension {factor.dim}")
            merged[s] = merged.get(s, 0) + complex(c)
        object.__setattr__(self, "factor", factor)
        object.__setattr__(self, "terms", MappingProxyType(merged))

    def __setattr__(self, name, value):
        raise AttributeError("TensorElement is immutable")

    @classmethod
    def identity(cls, factor):
        return cls(factor, {(): 1.0})

    @classmethod
    def zero(cls, factor):
        return cls(factor, {})

    # --- arithmetic ---

    def _check(self, other):
        if other.factor != self.factor:
            raise AlgebraMismatchError(
                f"Tensor elements over different factors ({self.factor.dim} vs {other.factor.dim})"
            )

    def __add__(self, other):
        if isinstance(other, Number):
            other = other * TensorElement.identity(self.factor)
        if not isinstance(other, TensorElement):
            return NotImplemented
        self._check(other)
        terms = defaultdict(complex, self.terms)
        for s, c in other.terms.items():
            terms[s] += c
        return normalize(TensorElement(self.factor, terms))

    __radd__ = __add__

    def __neg__(self):
        return TensorElement(self.factor, {s: -c for s, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, Number):
            other = other * TensorElement.identity(self.factor)
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return TensorElement(self.factor, {s: complex(other) * c for s, c in self.terms.items()})
        if isinstance(other, TensorElement):
            return tmul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def star(self):
        return TensorElement(self.factor, {s: c.conjugate() for s, c in self.terms.items()})

    # --- inspection ---

    def normalize(self, tol=None):
        return normalize(self, tol)

    def norm(self):
        terms = normalize(self).terms
        return max((abs(c) for c in terms.values()), default=0.0)

    @property
    def depth(self):
        return max((len(s) for s in self.terms), default=0)

    def is_zero(self, tol=None):
        return not normalize(self, tol).terms

    def is_projection(self, tol=None):
        tol = resolve_tol(tol)
        return all(abs(c - 1) <= tol for c in normalize(self, tol).terms.values())

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.factor == other.factor and (self - other).is_zero()

    def evaluate(self, sequence):
        """Value on an infinite string, given through a long enough prefix."""
        sequence = tuple(sequence)
        if len(sequence) < self.depth:
            raise DimensionError(f"Need a prefix of length {self.depth}, got {len(sequence)}")
        return sum((c for s, c in self.terms.items() if sequence[: len(s)] == s), 0j)

    def shifted(self, m, budget=None):
        """1_m (x) alpha: the same pattern starting m slots later (d^m copies of each term)."""
        if m == 0:
            return self
        check_budget(self.factor.dim ** m * max(len(self.terms), 1), budget, f"shift by {m} slots")
        terms = defaultdict(complex)
        for u in product(range(self.factor.dim), repeat=m):
            for s, c in self.terms.items():
                terms[u + s] += c
        return TensorElement(self.factor, terms)

    def to_dense(self, length, budget=None):
        """Coefficients on the basis of the length-`length` tensor power."""
        if length < self.depth:
            raise DimensionError(f"Length {length} is shorter than the support depth {self.depth}")
        d = self.factor.dim
        check_budget(d ** length, budget, "dense tensor expansion")
        coeffs = np.zeros(d ** length, dtype=complex)
        for s, c in self.terms.items():
            block = d ** (length - len(s))
            start = 0
            for i in s:
                start = start * d + i
            start *= block
            coeffs[start:start + block] += c
        return Element(self.factor.power(length), coeffs)

    def __repr__(self):
        shown = ", ".join(f"{''.join(map(str, s)) or '1'}: {c:.6g}" for s, c in sorted(self.terms.items()))
        return f"TensorElement({{{shown}}}, factor_dim={self.factor.dim})"


def parse_symbols(text, base=36):
    """'0110' -> (0, 1, 1, 0); symbols are the digits 0-9a-z."""
    if not isinstance(text, str):
        return tuple(int(s) for s in text)
    try:
        return tuple(int(ch, base) for ch in text.strip())
    except ValueError:
        raise DimensionError(f"Invalid symbol string {text!r}") from None


def format_symbols(symbols):
    return "".join(np.base_repr(int(s), 36).lower() for s in symbols)


def basis_string(factor, symbols):
    """z_{s1} (x) ... (x) z_{sk} (x) 1 (x) ..., coefficient 1."""
    return TensorElement(factor, {tuple(symbols): 1.0})


def embed(x, position, tol=None, budget=None):
    """1 (x) ... (x) x (x) 1 ... with x in slot `position` (1-based)."""
    tol = resolve_tol(tol)
    if position < 1:
        raise DimensionError(f"Slot position must be >= 1, got {position}")
    factor = x.algebra
    c = x.coeffs
    if np.all(np.abs(c - c[0]) <= tol):
        return TensorElement(factor, {(): c[0]} if abs(c[0]) > tol else {})
    check_budget(factor.dim ** position, budget, f"embedding into slot {position}")
    terms = {}
    for u in product(range(factor.dim), repeat=position - 1):
        for j, a in enumerate(c):
            if abs(a) > tol:
                terms[u + (j,)] = a
    return TensorElement(factor, terms)


def normalize(alpha, tol=None):
    """Antichain normal form.

    A coefficient sitting on a string that is a proper prefix of another
    support string is pushed down to all of its children (1 = sum_i x_i),
    level by level, until no support string is a prefix of another.
    """
    tol = resolve_tol(tol)
    d = alpha.factor.dim
    merged = defaultdict(complex, alpha.terms)
    internal = set()
    for s in merged:
        for L in range(len(s)):
            internal.add(s[:L])

    by_length = defaultdict(list)
    for s in merged:
        by_length[len(s)].append(s)
    max_len = max(by_length, default=0)
    for L in range(max_len):
        for s in sorted(set(by_length[L])):
            if s not in internal or s not in merged:
                continue
            c = merged.pop(s)
            for i in range(d):
                child = s + (i,)
                if child not in merged:
                    by_length[L + 1].append(child)
                merged[child] += c

    terms = {s: merged[s] for s in sorted(merged) if abs(merged[s]) > tol}
    return TensorElement(alpha.factor, terms)


def tmul(alpha, beta):
    """Bilinear extension of the prefix product of basis strings."""
    alpha._check(beta)
    extensions = defaultdict(list)
    for t, b in beta.terms.items():
        for L in range(len(t)):
            extensions[t[:L]].append((t, b))

    out = defaultdict(complex)
    for s, a in alpha.terms.items():
        for L in range(len(s) + 1):
            b = beta.terms.get(s[:L])
            if b is not None:
                out[s] += a * b
        for t, b in extensions.get(s, ()):
            out[t] += a * b
    return normalize(TensorElement(alpha.factor, out))


def prefix_free(strings):
    """True iff no string is a prefix of another (pairwise orthogonal)."""
    strings = [tuple(s) for s in strings]
    if len(set(strings)) != len(strings):
        return False
    ordered = sorted(strings)
    return all(ordered[i + 1][: len(ordered[i])] != ordered[i] for i in range(len(ordered) - 1))


# ===========================================================
#  Product states on the infinite tensor product
# ===========================================================

@dataclass(frozen=True)
class ProductState:
    """Omega = omega_1 (x) omega_2 (x) ...; factors past the list use `tail`."""

    factor_states: Tuple[State, ...]
    tail: Optional[State] = None

    def __post_init__(self):
        states = tuple(self.factor_states)
        if not states and self.tail is None:
            raise InvalidStateError("ProductState needs factor states or a tail")
        tail = self.tail if self.tail is not None else states[-1]
        for s in states:
            if s.algebra != tail.algebra:
                raise AlgebraMismatchError("All factor states must act on the same factor algebra")
        object.__setattr__(self, "factor_states", states)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def iid(cls, omega):
        return cls((), omega)

    @property
    def factor(self):
        return self.tail.algebra

    def state_at(self, j):
        """State of slot j (0-based)."""
        return self.factor_states[j] if j < len(self.factor_states) else self.tail

    def __call__(self, alpha):
        return texpect(self, alpha)


def texpect(omega, alpha):
    """Omega(alpha) = sum_terms c * prod_j omega_j(z_j); a finite product per term."""
    if omega.factor != alpha.factor:
        raise AlgebraMismatchError("Product state and element use different factor algebras")
    re, im = [], []
    for s, c in alpha.terms.items():
        weight = math.prod(float(omega.state_at(j).weights[i]) for j, i in enumerate(s))
        re.append(c.real * weight)
        im.append(c.imag * weight)
    total = complex(math.fsum(re), math.fsum(im))
    return total.real if total.imag == 0 else total


def power_output(omega, n, budget=None):
    """(x)^n O_omega: coordinate of string s is prod omega(x_{s_i})."""
    if n < 1:
        raise DimensionError(f"Block length must be >= 1, got {n}")
    d = omega.algebra.dim
    check_budget(d ** n, budget, f"power_output(n={n})")
    weights = reduce(np.kron, [omega.weights] * n)
    return Element(Algebra(d ** n), weights)
