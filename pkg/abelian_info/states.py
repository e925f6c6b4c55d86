"""States (positive normalized functionals), expectation and independence.

A state on an abelian algebra with atomic basis x_1..x_n is determined by
its weights p_i = omega(x_i); omega(x) = sum p_i a_i.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from .algebra import Algebra, Element, group_values, spectral_decomposition, tensor_algebra
from .config import resolve_stochastic_tol, resolve_tol
from .errors import AlgebraMismatchError, CoverError, InvalidStateError, ValidationError

logger = logging.getLogger(__name__)


class State:
    """omega on `algebra`, stored as its weights on the atomic basis.

    Arguments:
    algebra -- the algebra the state acts on
    weights -- nonnegative reals summing to 1 (within tol)
    renormalize -- divide by the sum instead of rejecting unnormalized weights
    """

    __slots__ = ("algebra", "weights")
    __hash__ = None

    def __init__(self, algebra, weights, tol=None, renormalize=False):
        tol = resolve_stochastic_tol(tol)
        arr = np.array(weights, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != algebra.dim:
            raise InvalidStateError(f"Expected {algebra.dim} weights, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidStateError("State weights must be finite")
        if np.min(arr) < -tol:
            raise InvalidStateError(f"State weights must be nonnegative, got {np.min(arr):.3g}")
        arr = np.clip(arr, 0.0, None)
        total = float(np.sum(arr))
        if renormalize:
            if total <= 0:
                raise InvalidStateError("Cannot renormalize weights summing to 0")
            arr = arr / total
        elif abs(total - 1.0) > tol:
            raise InvalidStateError(f"State weights must sum to 1, got {total!r} (use renormalize)")
        arr.setflags(write=False)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "weights", arr)

    def __setattr__(self, name, value):
        raise AttributeError("State is immutable")

    @classmethod
    def from_probs(cls, probs, labels=None, renormalize=False):
        probs = list(probs)
        return cls(Algebra(len(probs), labels), probs, renormalize=renormalize)

    @classmethod
    def uniform(cls, algebra):
        return cls(algebra, np.full(algebra.dim, 1.0 / algebra.dim))

    @classmethod
    def point(cls, algebra, i):
        weights = np.zeros(algebra.dim)
        weights[i] = 1.0
        return cls(algebra, weights)

    def __call__(self, x):
        return expectation(self, x)

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self.algebra == other.algebra and np.array_equal(self.weights, other.weights)

    def allclose(self, other, tol=None):
        tol = resolve_tol(tol)
        return self.algebra == other.algebra and bool(np.all(np.abs(self.weights - other.weights) <= tol))

    def marginal(self, dims, factor):
        """Marginal on factor `factor` of a state on A_1 (x) ... (x) A_k."""
        dims = tuple(dims)
        if int(np.prod(dims)) != self.algebra.dim:
            raise InvalidStateError(f"Factor dimensions {dims} do not multiply to {self.algebra.dim}")
        table = self.weights.reshape(dims)
        axes = tuple(i for i in range(len(dims)) if i != factor)
        return State(Algebra(dims[factor]), table.sum(axis=axes))

    def tolist(self):
        return [float(w) for w in self.weights]

    def __len__(self):
        return self.algebra.dim

    def __repr__(self):
        return f"State({np.array2string(self.weights, precision=6, threshold=12)})"


def _scalar(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


def _same_algebra(*objects):
    first = objects[0].algebra
    for obj in objects[1:]:
        if obj.algebra != first:
            raise AlgebraMismatchError(
                f"Objects live in different algebras ({first.dim} vs {obj.algebra.dim})"
            )


def expectation(omega, x):
    """omega(x) = sum_i p_i a_i."""
    _same_algebra(omega, x)
    return _scalar(np.dot(omega.weights, x.coeffs))


def trace(x):
    """tr = omega_1 + ... + omega_d; the rank on projections."""
    return _scalar(np.sum(x.coeffs))


def product_state(*states):
    """omega_1 (x) ... (x) omega_k on the tensor algebra."""
    if not states:
        raise InvalidStateError("product_state needs at least one factor")
    algebra = tensor_algebra(*(s.algebra for s in states))
    return State(algebra, reduce(np.kron, (s.weights for s in states)))


def mixture(states, coefficients):
    """Convex combination sum c_j omega_j, computed weightwise."""
    states = list(states)
    c = np.asarray(coefficients, dtype=float)
    if not states or len(states) != len(c):
        raise InvalidStateError("mixture needs one coefficient per state")
    if np.any(c < 0) or abs(float(np.sum(c)) - 1.0) > resolve_stochastic_tol():
        raise InvalidStateError("mixture coefficients must be a probability vector")
    _same_algebra(*states)
    weights = sum(ci * s.weights for ci, s in zip(c, states))
    return State(states[0].algebra, weights)


# ===========================================================
#  Predicates, each with a defect-valued variant
# ===========================================================

def purity_defect(omega):
    return float(1.0 - np.max(omega.weights))


def is_pure(omega, tol=None):
    """Pure <=> multiplicative <=> a point mass."""
    tol = resolve_tol(tol)
    return purity_defect(omega) <= tol


def correlation_defect(omega, x, y):
    _same_algebra(omega, x, y)
    return float(abs(complex(expectation(omega, x * y)) - complex(expectation(omega, x)) * complex(expectation(omega, y))))


def uncorrelated(omega, x, y, tol=None):
    tol = resolve_tol(tol)
    return correlation_defect(omega, x, y) <= tol


# ===========================================================
#  Generated subalgebras
# ===========================================================

@dataclass(frozen=True)
class Partition:
    """Atomic basis of a unital subalgebra, as blocks of basis indices."""

    dim: int
    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        seen = sorted(i for block in self.blocks for i in block)
        if any(len(block) == 0 for block in self.blocks):
            raise ValidationError("Partition blocks must be nonempty")
        if seen != list(range(self.dim)):
            raise ValidationError("Partition blocks must be disjoint and cover every index")

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def labels(self):
        """Array mapping each basis index to its block number."""
        labels = np.empty(self.dim, dtype=np.int64)
        for b, block in enumerate(self.blocks):
            labels[list(block)] = b
        return labels

    def projections(self, algebra):
        if algebra.dim != self.dim:
            raise AlgebraMismatchError(f"Partition of {self.dim} indices used on dimension {algebra.dim}")
        out = []
        for block in self.blocks:
            mask = np.zeros(self.dim)
            mask[list(block)] = 1.0
            out.append(Element(algebra, mask))
        return out


def _from_labels(labels):
    blocks = {}
    for i, label in enumerate(labels):
        blocks.setdefault(label, []).append(i)
    ordered = sorted(blocks.values(), key=lambda b: b[0])
    return Partition(len(labels), tuple(tuple(b) for b in ordered))


def generated_partition(elements, algebra=None, tol=None):
    """Blocks of the subalgebra generated by `elements` (and the unit).

    Two indices share a block iff every element has equal coefficients there.
    """
    tol = resolve_tol(tol)
    elements = list(elements)
    if algebra is None:
        if not elements:
            raise ValidationError("generated_partition of an empty set needs the algebra")
        algebra = elements[0].algebra
    for x in elements:
        if x.algebra != algebra:
            raise AlgebraMismatchError("All generators must share one algebra")

    labels = np.zeros(algebra.dim, dtype=np.int64)
    for x in elements:
        refined = np.empty_like(labels)
        next_label = 0
        for b in np.unique(labels):
            members = np.flatnonzero(labels == b)
            for _, sub in group_values(x.coeffs[members], tol):
                refined[members[sub]] = next_label
                next_label += 1
        labels = refined
    return _from_labels(labels)


def common_refinement(*partitions):
    """The partition whose blocks are the nonempty intersections."""
    keys = np.stack([p.labels() for p in partitions], axis=1)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    return _from_labels(labels.ravel())


def restrict(omega, partition):
    """omega restricted to the subalgebra with atomic basis `partition`."""
    masses = np.bincount(partition.labels(), weights=omega.weights, minlength=len(partition))
    return State(Algebra(len(partition)), masses)


def _joint_table(omega, partitions):
    shape = tuple(len(p) for p in partitions)
    flat = np.ravel_multi_index(tuple(p.labels() for p in partitions), shape)
    return np.bincount(flat, weights=omega.weights, minlength=int(np.prod(shape))).reshape(shape)


def independence_defect(omega, *sets, tol=None):
    """max |omega(P Q ...) - omega(P) omega(Q) ...| over all block tuples."""
    tol = resolve_tol(tol)
    for s in sets:
        for x in s:
            _same_algebra(omega, x)
    if len(sets) < 2:
        return 0.0
    partitions = [generated_partition(s, omega.algebra, tol) for s in sets]
    joint = _joint_table(omega, partitions)
    marginals = [restrict(omega, p).weights for p in partitions]
    independent_table = reduce(np.multiply.outer, marginals)
    return float(np.max(np.abs(joint - independent_table)))


def independent(omega, *sets, tol=None):
    tol = resolve_tol(tol)
    defect = independence_defect(omega, *sets, tol=tol)
    logger.debug("independence defect %.3g over %d sets", defect, len(sets))
    return defect <= tol


# ===========================================================
#  Covers
# ===========================================================

class CoverInstance(NamedTuple):
    source: Tuple[Algebra, Sequence[State]]
    target: Tuple[Algebra, Sequence[State]]
    phi: Sequence[Element]
    gamma: Sequence[int]


def _check_homomorphism(source, target, phi, tol):
    if len(phi) != source.dim:
        raise CoverError(f"phi must give one image per source basis element ({source.dim}), got {len(phi)}")
    total = np.zeros(target.dim)
    for i, image in enumerate(phi):
        if image.algebra != target:
            raise CoverError(f"Image of basis element {i} is not in the target algebra")
        if not image.is_projection(tol):
            raise CoverError(f"phi is not multiplicative: image of basis element {i} is not a projection")
        total += image.coeffs.real
    if np.any(total > 1 + tol):
        raise CoverError("phi is not multiplicative: images of distinct basis elements overlap")
    if np.any(np.abs(total - 1) > tol):
        raise CoverError("phi is not unital: images do not sum to the identity")
    ranks = [round(float(np.sum(image.coeffs.real))) for image in phi]
    if any(r > 1 for r in ranks):
        raise CoverError("phi is not onto: some image is not an atom of the target")


def cover_defect(source, target, phi, gamma, tol=None):
    """max |omega(x_i) - gamma(omega)(phi(x_i))| over source basis and paired states."""
    tol = resolve_tol(tol)
    source_algebra, source_states = source
    target_algebra, target_states = target
    _check_homomorphism(source_algebra, target_algebra, list(phi), tol)
    gamma = list(gamma)
    if len(source_states) != len(target_states) or sorted(gamma) != list(range(len(target_states))):
        raise CoverError("gamma must be a bijection between the two state sets")
    defect = 0.0
    for omega, g in zip(source_states, gamma):
        if omega.algebra != source_algebra or target_states[g].algebra != target_algebra:
            raise CoverError("States must live on the source and target algebras")
        for i, image in enumerate(phi):
            d = abs(omega.weights[i] - complex(expectation(target_states[g], image)))
            defect = max(defect, float(d))
    return defect


def verify_cover(source, target, phi, gamma, tol=None):
    tol = resolve_tol(tol)
    return cover_defect(source, target, phi, gamma, tol) <= tol


def independence_cover(omega, *sets, tol=None):
    """(A(S_1) (x) ... (x) A(S_k), omega_1 (x) ... (x) omega_k) -> A(S_1..S_k), phi(u (x) v) = uv."""
    tol = resolve_tol(tol)
    partitions = [generated_partition(s, omega.algebra, tol) for s in sets]
    factor_states = [restrict(omega, p) for p in partitions]
    source_state = product_state(*factor_states)
    source_algebra = source_state.algebra

    joint = common_refinement(*partitions)
    target_state = restrict(omega, joint)
    target_algebra = target_state.algebra
    joint_labels = joint.labels()

    phi = []
    for blocks in product(*(range(len(p)) for p in partitions)):
        mask = np.ones(omega.algebra.dim, dtype=bool)
        for p, b in zip(partitions, blocks):
            mask &= p.labels() == b
        image = np.zeros(target_algebra.dim)
        if mask.any():
            image[joint_labels[np.flatnonzero(mask)[0]]] = 1.0
        phi.append(Element(target_algebra, image))
    return CoverInstance(
        source=(source_algebra, [source_state]),
        target=(target_algebra, [target_state]),
        phi=phi,
        gamma=[0],
    )


def centroid(omega, x, tol=None):
    """I_omega(x) = sum omega(P_i) P_i over the spectral decomposition of x."""
    tol = resolve_tol(tol)
    _same_algebra(omega, x)
    total = x.algebra.zero()
    for term in spectral_decomposition(x, tol):
        total = total + expectation(omega, term.projection) * term.projection
    return total
