"""Distribution functions defined through annihilator projections, and the
classical examples worked out on top of them.

For a self-adjoint x and a state omega, F(t) is omega applied to the identity
of the annihilator ideal of (t1 - x)_-, i.e. the projection onto the
coordinates with a_i <= t. In finite dimensions that identity exists, so no
approximate identities are needed; `approximate_identity_sequence` keeps them
around as a convergence diagnostic.
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple, Tuple

import numpy as np
from scipy.stats import norm as gaussian

from .algebra import (
    Algebra,
    Element,
    absolute,
    annihilator_identity,
    group_values,
    negative_part,
    positive_part,
    support_projection,
)
from .config import check_budget, resolve_budget, resolve_stochastic_tol, resolve_tol
from .errors import (
    ConsistencyError,
    DegenerateStateError,
    DimensionError,
    ValidationError,
)
from .states import State, _same_algebra, expectation
from .tensor import ProductState, TensorElement, parse_symbols, power_output, texpect

logger = logging.getLogger(__name__)


# ===========================================================
#  Distribution functions
# ===========================================================

@dataclass(frozen=True)
class Cdf:
    """Right-continuous step function: F(t) = sum of masses at jump points <= t."""

    jump_points: Tuple[float, ...]
    masses: Tuple[float, ...]

    def __post_init__(self):
        if len(self.jump_points) != len(self.masses):
            raise DimensionError("Cdf needs one mass per jump point")

    def at(self, t, tol=None):
        tol = resolve_tol(tol)
        return math.fsum(m for p, m in zip(self.jump_points, self.masses) if p <= t + tol)

    __call__ = at

    def strict_at(self, t, tol=None):
        """P(x < t)."""
        tol = resolve_tol(tol)
        return math.fsum(m for p, m in zip(self.jump_points, self.masses) if p < t - tol)

    def records(self):
        running = np.cumsum(self.masses)
        return [
            {"t": p, "mass": m, "cdf": float(c)}
            for p, m, c in zip(self.jump_points, self.masses, running)
        ]


def cdf(omega, x, tol=None):
    tol = resolve_tol(tol)
    _same_algebra(omega, x)
    a = x.real_coeffs(tol)
    points, masses = [], []
    for value, members in group_values(a, tol):
        points.append(float(value))
        masses.append(math.fsum(omega.weights[members]))
    order = np.argsort(points, kind="stable")
    return Cdf(tuple(points[i] for i in order), tuple(masses[i] for i in order))


def cdf_at(omega, x, t, tol=None):
    """omega(identity of the annihilator of (t1 - x)_-)."""
    tol = resolve_tol(tol)
    _same_algebra(omega, x)
    return float(expectation(omega, annihilator_identity(negative_part(t - x, tol), tol)))


def cdf_strict_at(omega, x, t, tol=None):
    return probability(omega, event_lt(x, t, tol))


def complex_cdf_at(omega, z, t, tol=None):
    """F_z(t) = F_{Re z}(t) + i F_{Im z}(t)."""
    return complex(cdf_at(omega, z.real, t, tol), cdf_at(omega, z.imag, t, tol))


def joint_cdf(omega, xs, ts, tol=None):
    """omega-mass of the coordinates where every x_j <= t_j."""
    tol = resolve_tol(tol)
    xs, ts = list(xs), list(ts)
    if len(xs) != len(ts) or not xs:
        raise DimensionError(f"joint_cdf needs one threshold per element, got {len(xs)} and {len(ts)}")
    _same_algebra(omega, *xs)
    event = reduce(lambda p, q: p * q, (event_le(x, t, tol) for x, t in zip(xs, ts)))
    return probability(omega, event)


# ===========================================================
#  Events
# ===========================================================

def event_gt(x, a, tol=None):
    """Support projection of (x - a)_+: coordinates with a_i > a."""
    return support_projection(positive_part(x - a, tol), tol)


def event_le(x, a, tol=None):
    return 1 - event_gt(x, a, tol)


def event_lt(x, a, tol=None):
    return event_gt(-x, -a, tol)


def probability(omega, projection, tol=None):
    tol = resolve_tol(tol)
    if not projection.is_projection(tol):
        raise ValidationError("probability() expects a projection")
    return float(expectation(omega, projection.real))


def approximate_identity_sequence(omega, xs, ts, m_max):
    """[omega(e_m(t + 1/m)) for m = 1..m_max] with e_m = m chi / (1 + m chi).

    chi(t) = prod_j (t_j 1 - x_j)_+. The limit is the mass of {x < t} plus
    half the mass where x = t for a single element, so it meets the exact
    F(t) at every t that is not a jump point.
    """
    xs, ts = list(xs), list(ts)
    if len(xs) != len(ts) or not xs:
        raise DimensionError("approximate_identity_sequence needs one threshold per element")
    _same_algebra(omega, *xs)
    values = []
    for m in range(1, m_max + 1):
        chi = reduce(lambda p, q: p * q, (positive_part((t + 1.0 / m) - x) for x, t in zip(xs, ts)))
        c = m * chi.coeffs.real
        values.append(float(np.dot(omega.weights, c / (1.0 + c))))
    return values


# ===========================================================
#  Chebyshev, law of large numbers, central limit
# ===========================================================

class ChebyshevCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def chebyshev_check(omega, x, eps, tol=None):
    """P(|x - omega(x)| > eps) <= omega((x - omega(x))^2) / eps^2."""
    tol = resolve_tol(tol)
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    _same_algebra(omega, x)
    x.real_coeffs(tol)
    mu = float(expectation(omega, x.real))
    centered = x.real - mu
    lhs = probability(omega, event_gt(absolute(centered), eps, tol))
    rhs = float(expectation(omega, centered * centered)) / eps ** 2
    return ChebyshevCheck(lhs, rhs, lhs <= rhs + tol)


def _factor_values(omega, x):
    if x is None:
        return np.arange(omega.algebra.dim, dtype=float)
    _same_algebra(omega, x)
    return x.real_coeffs()


def _sample_sums(values, n, budget):
    check_budget(len(values) ** n, budget, f"sample sums (n={n})")
    return reduce(np.add.outer, [values] * n).ravel()


def lln_moment(omega, n, k=2, x=None, method="auto", budget=None):
    """omega^n(|s_n - mu|^k) for s_n = (x_1 + ... + x_n)/n under i.i.d. omega.

    `x` is the observable on one factor (default: the coordinate values
    0..d-1). method="closed" only exists for k=2 (Var/n); "auto" uses it for
    k=2 and cross-checks against enumeration when that is cheap.
    """
    if n < 1:
        raise ValidationError(f"Sample count must be >= 1, got {n}")
    if k < 1 or k % 2:
        raise ValidationError(f"Moment order must be a positive even integer, got {k}")
    if method not in ("auto", "closed", "enumerate"):
        raise ValidationError(f"Unknown method {method!r}")
    values = _factor_values(omega, x)
    mu = math.fsum(omega.weights * values)

    if k == 2 and method != "enumerate":
        closed = math.fsum(omega.weights * (values - mu) ** 2) / n
        if method == "auto" and len(values) ** n <= 2 ** 12:
            enumerated = lln_moment(omega, n, k, x, "enumerate", budget)
            if abs(closed - enumerated) > 1e-10:
                raise ConsistencyError(f"Var/n = {closed} but enumeration gives {enumerated}")
        return closed
    if method == "closed":
        raise ValidationError("A closed form is only available for k=2")

    sums = _sample_sums(values, n, budget)
    weights = power_output(omega, n, budget).coeffs.real
    return math.fsum(weights * np.abs(sums / n - mu) ** k)


def clt_gap(omega, n, x=None, budget=None, tol=None):
    """sup_t |F_n(t) - Phi(t)| for the exact law of (s_n - mu) sqrt(n) / sigma.

    The supremum of a step function against a continuous one is attained at
    a jump point, on one side or the other.
    """
    tol = resolve_tol(tol)
    values = _factor_values(omega, x)
    mu = math.fsum(omega.weights * values)
    sigma = math.sqrt(math.fsum(omega.weights * (values - mu) ** 2))
    if sigma <= tol:
        raise DegenerateStateError("sigma = 0: the observable is almost surely constant")
    sums = _sample_sums(values, n, budget)
    standardized = (sums / n - mu) * math.sqrt(n) / sigma
    law = State(Algebra(len(sums)), power_output(omega, n, budget).coeffs.real, renormalize=True)
    distribution = cdf(law, Element(law.algebra, standardized), tol)

    points = np.array(distribution.jump_points)
    upper = np.cumsum(distribution.masses)
    lower = upper - np.array(distribution.masses)
    phi = gaussian.cdf(points)
    gap = float(np.max(np.maximum(np.abs(upper - phi), np.abs(lower - phi))))
    logger.debug("clt_gap n=%d: %d jump points, gap %.6g", n, len(points), gap)
    return gap


# ===========================================================
#  Bernoulli trials
# ===========================================================

def _bernoulli(omega):
    if not isinstance(omega, State):
        p = float(omega)
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"Success probability must lie in [0, 1], got {p}")
        return State.from_probs([1.0 - p, p])
    if omega.algebra.dim != 2:
        raise DimensionError(f"Bernoulli trials need a 2-dimensional factor, got {omega.algebra.dim}")
    return omega


def hamming_weights(n):
    return reduce(np.add.outer, [np.array([0, 1])] * n).ravel()


def binomial_observable(n, budget=None):
    """Z = sum_r r Y_r: the number of successes (symbol 1) in n trials."""
    check_budget(2 ** n, budget, f"binomial observable (n={n})")
    return Element(Algebra(2).power(n), hamming_weights(n))


def success_projections(n, budget=None):
    """[Y_0, ..., Y_n]: Y_r is the sum of all basis strings with r successes."""
    z = binomial_observable(n, budget)
    return [Element(z.algebra, (z.coeffs.real == r).astype(float)) for r in range(n + 1)]


def binomial_cdf(n, k, omega, method="auto", budget=None):
    """Omega(sum_{r<=k} Y_r) under i.i.d. trials; `omega` is a State or p."""
    if n < 1 or not 0 <= k <= n:
        raise ValidationError(f"Need 0 <= k <= n with n >= 1, got n={n}, k={k}")
    omega = _bernoulli(omega)
    q, p = (float(w) for w in omega.weights)
    if method == "closed" or (method == "auto" and n > resolve_budget(budget)):
        return math.fsum(math.comb(n, r) * p ** r * q ** (n - r) for r in range(k + 1))
    output = power_output(omega, n, budget)
    at_most_k = sum(success_projections(n, budget)[: k + 1])
    return float(expectation(State(output.algebra, output.coeffs.real), at_most_k))


# ===========================================================
#  Waiting times
# ===========================================================

def waiting_observables(factor, pattern, count, budget=None):
    """[Y_0, ..., Y_count]: Y_m is the event 'pattern first appears at slot m'.

    Y_m is the sum of the strings of length m + len(pattern) that end in the
    pattern and contain no earlier occurrence. Only branches still free of
    the pattern are extended, so a single-symbol pattern over a binary factor
    keeps one live branch per slot. The Y_m are pairwise orthogonal
    projections.
    """
    pattern = parse_symbols(pattern)
    if not pattern:
        raise ValidationError("Waiting-time pattern must be nonempty")
    d, L = factor.dim, len(pattern)
    for i in pattern:
        if not 0 <= i < d:
            raise DimensionError(f"Pattern symbol {i} out of range for factor dimension {d}")
    observables = []
    alive = [()]
    for n in range(1, count + L + 1):
        check_budget(len(alive) * d, budget, f"waiting-time branches of length {n}")
        hits, survivors = [], []
        for s in alive:
            for c in range(d):
                branch = s + (c,)
                (hits if branch[-L:] == pattern else survivors).append(branch)
        if n >= L:
            observables.append(TensorElement(factor, dict.fromkeys(hits, 1.0)))
        alive = survivors
    logger.debug("waiting observables for %s up to slot %d: %d live branches", pattern, count, len(alive))
    return observables


def waiting_time(pattern, omega, t, budget=None):
    """F_W(t) = sum_{m <= floor(t)} Omega(Y_m); 0 for t < 0."""
    pattern = parse_symbols(pattern)
    if not pattern:
        raise ValidationError("Waiting-time pattern must be nonempty")
    if t < 0:
        return 0.0
    source = omega if isinstance(omega, ProductState) else ProductState.iid(omega)
    observables = waiting_observables(source.factor, pattern, math.floor(t), budget)
    return math.fsum(float(np.real(texpect(source, y))) for y in observables)


def orthogonality_defect(observables):
    """max over |Y_j Y_k| (j != k) and |Y_j^2 - Y_j|; 0 for orthogonal projections."""
    defect = 0.0
    for j, y in enumerate(observables):
        defect = max(defect, (y * y - y).norm())
        for z in observables[j + 1:]:
            defect = max(defect, (y * z).norm())
    return defect


# ===========================================================
#  Markov chains
# ===========================================================

@dataclass(frozen=True)
class MarkovChain:
    """Positive unital maps phi_0, phi_1, ... and the state omega they end in.

    maps[k][i][j] is the coefficient of x_i in phi_k(x_j): columns are images
    of basis elements and unitality means every row sums to 1. Steps past the
    last map reuse it.
    """

    maps: Tuple[np.ndarray, ...]
    initial: State

    def __post_init__(self):
        d = self.initial.algebra.dim
        maps = []
        tol = resolve_stochastic_tol()
        for k, m in enumerate(self.maps):
            try:
                m = np.array(m, dtype=float)
            except (TypeError, ValueError) as e:
                raise ValidationError(f"Map {k} must be a square table of numbers: {e}") from None
            if m.shape != (d, d):
                raise DimensionError(f"Map {k} must be {d}x{d}, got shape {m.shape}")
            if np.min(m) < -tol:
                raise ValidationError(f"Map {k} is not positive (entry {np.min(m):.3g})")
            rows = m.sum(axis=1)
            if np.max(np.abs(rows - 1)) > tol:
                raise ValidationError(f"Map {k} is not unital: row sums {rows.tolist()}")
            m.setflags(write=False)
            maps.append(m)
        if not maps:
            raise ValidationError("A Markov chain needs at least one map")
        object.__setattr__(self, "maps", tuple(maps))

    @classmethod
    def stationary(cls, matrix, initial):
        return cls((matrix,), initial)

    @property
    def dim(self):
        return self.initial.algebra.dim

    @property
    def is_stationary(self):
        return len(self.maps) == 1

    def map_at(self, k):
        return self.maps[min(k, len(self.maps) - 1)]

    def apply(self, k, x):
        """phi_k(x)."""
        _same_algebra(self.initial, x)
        return Element(x.algebra, self.map_at(k) @ x.coeffs)


def _check_path(chain, path):
    path = [int(i) for i in path]
    if not path:
        raise ValidationError("Path must have length >= 1")
    for i in path:
        if not 0 <= i < chain.dim:
            raise DimensionError(f"Path index {i} out of range for dimension {chain.dim}")
    return path


def markov_path_probability(chain, path):
    """y_1 = phi_0(z_0), y_k = phi_{k-1}(z_{k-1} y_{k-1}), p = omega(z_n y_n)."""
    path = _check_path(chain, path)
    algebra = chain.initial.algebra
    y = algebra.identity()
    for k, i in enumerate(path[:-1]):
        y = chain.apply(k, algebra.basis(i) * y)
    p = float(expectation(chain.initial, algebra.basis(path[-1]) * y))
    if chain.is_stationary:
        closed = stationary_path_probability(chain, path)
        if abs(p - closed) > 1e-10:
            raise ConsistencyError(f"Path recursion gives {p}, matrix-element product gives {closed}")
    return p


def stationary_path_probability(chain, path):
    """omega(z_n) phi(i_n, i_{n-1}) ... phi(i_1, i_0), one map for every step."""
    path = _check_path(chain, path)
    factors = (chain.map_at(k)[b, a] for k, (a, b) in enumerate(zip(path, path[1:])))
    return float(chain.initial.weights[path[-1]]) * math.prod(factors)


def transition_probability(chain, start, end, steps):
    """Total probability of all paths of `steps` steps from `start` to `end`."""
    _check_path(chain, [start, end])
    v = np.zeros(chain.dim)
    v[start] = 1.0
    for k in range(steps):
        v = chain.map_at(k) @ v
    return float(chain.initial.weights[end] * v[end])


def path_distribution(chain, length, budget=None):
    """Probabilities of all d^length paths, lexicographic order; sums to 1."""
    if length < 1:
        raise ValidationError("Path length must be >= 1")
    d = chain.dim
    check_budget(d ** length, budget, f"path distribution (length={length})")
    table = np.ones(d)
    for k in range(length - 1):
        table = table[..., :, None] * chain.map_at(k).T
    table = table * chain.initial.weights
    return table.ravel()
