"""Discrete memoryless channels.

A channel is a unital positive map C from the output algebra Y to the input
algebra X, C(y_j) = sum_i C(y_j|x_i) x_i. Its matrix is stored input-indexed,
matrix[i][j] = C(y_j|x_i), so rows are conditional distributions and sum to 1.
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from .algebra import Algebra, Element, apply_function, log2_extended
from .config import check_budget, resolve_stochastic_tol, resolve_tol
from .errors import (
    ConsistencyError,
    DimensionError,
    InvalidChannelError,
    InvalidStateError,
    RateTooHighError,
    ValidationError,
)
from .files import ChannelFile, CodingReport, CodingSummary, ZkReport, load_model
from .information import shannon_entropy
from .states import State, expectation
from .tensor import parse_symbols, power_output

logger = logging.getLogger(__name__)

# relative tolerance for equal likelihoods in the maximum-likelihood decoder
TIE_TOL = 1e-12


class Channel:
    """matrix[i][j] = C(y_j | x_i); in_dim = m inputs, out_dim = n outputs."""

    __slots__ = ("matrix",)
    __hash__ = None

    def __init__(self, matrix, tol=None):
        tol = resolve_stochastic_tol(tol)
        try:
            arr = np.array(matrix, dtype=float)
        except (TypeError, ValueError) as e:
            raise InvalidChannelError(f"Channel matrix must be a rectangular table of numbers: {e}") from None
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidChannelError(f"Channel matrix must be a nonempty 2-D table, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidChannelError("Channel matrix must be finite")
        if np.min(arr) < -tol:
            raise InvalidChannelError(f"Channel matrix must be nonnegative, got {np.min(arr):.3g}")
        rows = arr.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1) > tol)
        if bad.size:
            raise InvalidChannelError(
                f"Channel rows must sum to 1; row {int(bad[0])} sums to {rows[bad[0]]!r}"
            )
        arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    @classmethod
    def identity(cls, m):
        return cls(np.eye(m))

    @classmethod
    def bsc(cls, p):
        if not 0.0 <= p <= 1.0:
            raise InvalidChannelError(f"Crossover probability must lie in [0, 1], got {p}")
        return cls([[1 - p, p], [p, 1 - p]])

    @classmethod
    def useless(cls, row, m):
        return cls(np.tile(np.asarray(row, dtype=float), (m, 1)))

    @classmethod
    def from_file(cls, path):
        return cls(load_model(ChannelFile, path).rows)

    @property
    def in_dim(self):
        return self.matrix.shape[0]

    @property
    def out_dim(self):
        return self.matrix.shape[1]

    @property
    def input_algebra(self):
        return Algebra(self.in_dim)

    @property
    def output_algebra(self):
        return Algebra(self.out_dim)

    def apply(self, y):
        """C(y) = sum_j b_j C(y_j), an element of the input algebra."""
        if y.algebra.dim != self.out_dim:
            raise DimensionError(f"Expected an element of the {self.out_dim}-dimensional output algebra")
        return Element(self.input_algebra, self.matrix @ y.coeffs)

    def power(self, k, budget=None):
        """Matrix of the k-block channel C^(k), memoryless."""
        check_budget((self.in_dim * self.out_dim) ** k, budget, f"channel power (k={k})")
        return reduce(np.kron, [self.matrix] * k)

    def tolist(self):
        return self.matrix.tolist()

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __repr__(self):
        return f"Channel({self.in_dim}x{self.out_dim})"


def _check_input(omega, channel):
    if omega.algebra.dim != channel.in_dim:
        raise DimensionError(
            f"Input state has {omega.algebra.dim} symbols, channel has {channel.in_dim} inputs"
        )


def push_state(omega, channel):
    """omega~ = omega o C: omega~_j = sum_i omega_i C[i][j]."""
    _check_input(omega, channel)
    return State(channel.output_algebra, omega.weights @ channel.matrix, renormalize=True)


def channel_output(channel, k=1, budget=None):
    """O^k_C over Y^k (x) X^k; coordinate (y, x) sits at y * m^k + x."""
    if k < 1:
        raise ValidationError(f"Block length must be >= 1, got {k}")
    ck = channel.power(k, budget)
    return Element(Algebra(ck.size), ck.T.ravel())


@dataclass(frozen=True, eq=False)
class JointState:
    """Omega^k(y (x) x) = C^(k)(y|x) omega^k(x), stored as weights[y, x]."""

    weights: np.ndarray
    k: int = 1

    @property
    def input_marginal(self):
        return State(Algebra(self.weights.shape[1]), self.weights.sum(axis=0), renormalize=True)

    @property
    def output_marginal(self):
        return State(Algebra(self.weights.shape[0]), self.weights.sum(axis=1), renormalize=True)

    def as_state(self):
        return State(Algebra(self.weights.size), self.weights.ravel(), renormalize=True)


def joint_state(omega, channel, k=1, budget=None):
    _check_input(omega, channel)
    ck = channel.power(k, budget)
    wk = power_output(omega, k, budget).coeffs.real
    table = ck.T * wk[None, :]
    tilde = reduce(np.kron, [push_state(omega, channel).weights] * k)
    if np.max(np.abs(table.sum(axis=0) - wk)) > 1e-12 or np.max(np.abs(table.sum(axis=1) - tilde)) > 1e-12:
        raise ConsistencyError("Joint state marginals do not match the input state and its push-forward")
    return JointState(table, k)


# ===========================================================
#  Classification
# ===========================================================

def is_useless(channel, tol=None):
    """Rank 1: every row equal, so the output ignores the input."""
    tol = resolve_tol(tol)
    s = np.linalg.svd(channel.matrix, compute_uv=False)
    return len(s) == 1 or bool(s[1] <= tol * s[0])


def lossless_partition(channel, tol=None):
    """[d_0, ..., d_{m-1}]: d_i lists the outputs whose only possible input is i.

    None unless every output with C(y|x) > 0 for some x has exactly one such x.
    Outputs no input can produce belong to no d_i.
    """
    tol = resolve_tol(tol)
    support = channel.matrix > tol
    blocks = [[] for _ in range(channel.in_dim)]
    for j in range(channel.out_dim):
        inputs = np.flatnonzero(support[:, j])
        if inputs.size > 1:
            return None
        if inputs.size == 1:
            blocks[int(inputs[0])].append(j)
    return [tuple(b) for b in blocks]


def is_lossless(channel, tol=None):
    return lossless_partition(channel, tol) is not None


# ===========================================================
#  Mutual information and capacity
# ===========================================================

class MutualInformation(NamedTuple):
    mutual_information: float
    h_x: float
    h_y: float
    h_y_given_x: float
    h_x_given_y: float


def mutual_information(omega, channel, tol=1e-10):
    """I(X,Y) = Omega(log O_C - log O_omega~), with both entropy identities checked."""
    joint = joint_state(omega, channel)
    tilde = push_state(omega, channel)
    algebra = Algebra(joint.weights.size)
    o_c = channel_output(channel)
    o_tilde = Element(algebra, np.repeat(tilde.weights, channel.in_dim))
    log_ratio = apply_function(log2_extended, o_c) - apply_function(log2_extended, o_tilde)
    info = float(expectation(joint.as_state(), log_ratio).real) + 0.0

    h_x = shannon_entropy(omega)
    h_y = shannon_entropy(tilde)
    h_y_given_x = math.fsum(
        w * shannon_entropy(State(channel.output_algebra, row, renormalize=True))
        for w, row in zip(omega.weights, channel.matrix)
        if w > 0
    )
    h_xy = shannon_entropy(joint.as_state())
    h_x_given_y = h_xy - h_y
    if abs(info - (h_y - h_y_given_x)) > tol or abs(info - (h_x - h_x_given_y)) > tol:
        raise ConsistencyError(
            f"I = {info!r} but H(Y) - H(Y|X) = {h_y - h_y_given_x!r} and H(X) - H(X|Y) = {h_x - h_x_given_y!r}"
        )
    return MutualInformation(info, h_x, h_y, h_y_given_x, h_x_given_y)


class Capacity(NamedTuple):
    capacity: float
    input_state: State
    iterations: int


def channel_capacity(channel, thresh=1e-12, max_iter=10000):
    """Blahut-Arimoto: alternate the posterior q(x|y) and the input prior r(x)."""
    p = channel.matrix
    m = channel.in_dim
    r = np.full(m, 1.0 / m)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        q = r[:, None] * p
        q = q / np.where(q.sum(axis=0) > 0, q.sum(axis=0), 1.0)
        with np.errstate(divide="ignore"):
            log_q = np.where(p > 0, np.log(np.where(q > 0, q, 1.0)), 0.0)
        r1 = np.exp(np.sum(p * log_q, axis=1))
        r1 = r1 / r1.sum()
        step = float(np.linalg.norm(r1 - r))
        r = r1
        if step < thresh:
            break
    best = State(channel.input_algebra, r, renormalize=True)
    capacity = mutual_information(best, channel).mutual_information
    logger.debug("capacity %.9g after %d iterations", capacity, iterations)
    return Capacity(capacity, best, iterations)


# ===========================================================
#  Block coding
# ===========================================================

def codebook_size(k, rate):
    """r_k = ceil(2^(kR))."""
    return max(1, math.ceil(2.0 ** (k * rate) - 1e-9))


def _strings(indices, base, k):
    """Lexicographic index -> (len, k) array of symbols."""
    indices = np.asarray(indices, dtype=np.int64)
    powers = base ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % base


def _index(symbols, base):
    index = 0
    for s in symbols:
        index = index * base + int(s)
    return index


def select_codebook(m, k, r, policy="uniform", rng=None, codebook=None):
    """Sorted lexicographic indices of the r input strings in A_k."""
    total = m ** k
    if r > total:
        raise RateTooHighError(f"{r} codewords do not fit into {total} input strings of length {k}")
    if codebook is not None or policy == "supplied":
        if codebook is None:
            raise ValidationError("policy 'supplied' needs a codebook")
        words = [parse_symbols(w) if isinstance(w, str) else tuple(w) for w in codebook]
        for w in words:
            if len(w) != k or any(not 0 <= s < m for s in w):
                raise ValidationError(f"Codeword {w} is not a length-{k} string over {m} input symbols")
        chosen = sorted({_index(w, m) for w in words})
        if len(chosen) != len(words) or len(chosen) != r:
            raise ValidationError(f"Supplied codebook must hold {r} distinct words, got {len(words)}")
        return np.array(chosen, dtype=np.int64)
    if policy == "lexicographic":
        return np.arange(r, dtype=np.int64)
    if policy == "uniform":
        rng = rng if rng is not None else np.random.default_rng()
        return np.sort(rng.choice(total, size=r, replace=False)).astype(np.int64)
    raise ValidationError(f"Unknown codebook policy {policy!r} (uniform|lexicographic|supplied)")


def likelihoods(channel, codebook, k):
    """lik[c, y] = C^(k)(y | codeword c) for every output string y."""
    words = _strings(codebook, channel.in_dim, k)
    outputs = _strings(np.arange(channel.out_dim ** k), channel.out_dim, k)
    lik = np.ones((len(codebook), len(outputs)))
    for t in range(k):
        lik *= channel.matrix[words[:, t][:, None], outputs[:, t][None, :]]
    return lik


def ml_decoder(lik):
    """(decoded codeword per output, reachable mask); ties go to the lowest index."""
    top = lik.max(axis=0)
    winners = lik >= top * (1 - TIE_TOL)
    decoded = np.argmax(winners, axis=0)
    return decoded, top > 0


def _input_weights(omega, codebook, k):
    words = _strings(codebook, omega.algebra.dim, k)
    return np.prod(omega.weights[words], axis=1)


def _prior(omega, codebook, k, input_distribution):
    if input_distribution == "uniform":
        return np.full(len(codebook), 1.0 / len(codebook))
    if input_distribution == "state":
        w = _input_weights(omega, codebook, k)
        if w.sum() <= 0:
            raise InvalidStateError("The input state gives the codebook zero probability")
        return w / w.sum()
    raise ValidationError(f"Unknown input distribution {input_distribution!r} (uniform|state)")


def _decoder_values(lik, decoded, reachable, tilde_k, decoder_scale):
    """O_{L_k} on (codeword, y): nonzero only on the decoded pair."""
    rows = np.arange(lik.shape[0])[:, None]
    on_pair = (rows == decoded[None, :]) & reachable[None, :]
    if decoder_scale == "transition":
        return np.where(on_pair, lik, 0.0)
    if decoder_scale == "output":
        return np.where(on_pair, tilde_k[None, :], 0.0)
    raise ValidationError(f"Unknown decoder scale {decoder_scale!r} (transition|output)")


def _exact_trial(channel, omega, k, codebook, input_distribution, decoder_scale):
    lik = likelihoods(channel, codebook, k)
    decoded, reachable = ml_decoder(lik)
    prior = _prior(omega, codebook, k, input_distribution)
    cols = np.flatnonzero(reachable)
    correct = math.fsum(prior[decoded[cols]] * lik[decoded[cols], cols])
    error = min(max(1.0 - correct, 0.0), 1.0)

    x_weights = _input_weights(omega, codebook, k)
    tilde_k = reduce(np.kron, [push_state(omega, channel).weights] * k)
    values = _decoder_values(lik, decoded, reachable, tilde_k, decoder_scale)
    gap = math.fsum((x_weights[:, None] * lik * np.abs(lik - values)).ravel())
    outside = max(1.0 - math.fsum(x_weights), 0.0)
    return error, gap, outside


def _monte_carlo_trial(channel, k, codebook, prior, rng, samples):
    words = _strings(codebook, channel.in_dim, k)
    with np.errstate(divide="ignore"):
        log_c = np.log(channel.matrix)
    sent = rng.choice(len(codebook), size=samples, p=prior)
    cumulative = np.cumsum(channel.matrix, axis=1)
    errors = 0
    for s in sent:
        u = rng.random(k)
        y = np.minimum((u[:, None] > cumulative[words[s]]).sum(axis=1), channel.out_dim - 1)
        ll = log_c[words, y[None, :]].sum(axis=1)
        top = ll.max()
        if not np.isfinite(top):
            errors += 1
            continue
        if int(np.argmax(ll >= top - TIE_TOL)) != s:
            errors += 1
    return errors / samples


class CodingRun(NamedTuple):
    summaries: list
    reports: list


def coding_experiment(
    channel,
    omega,
    rate,
    ks,
    trials=1,
    policy="uniform",
    seed=0,
    codebook=None,
    input_distribution="uniform",
    decoder_scale="transition",
    mode="exact",
    samples=1000,
    budget=None,
):
    """Random-codebook transmission over C^(k) with maximum-likelihood decoding.

    Per trial the codebook A_k is drawn with rng = default_rng([seed, k, trial]).
    In exact mode error_prob, gap = Omega(|O_{C_k} - O_{L_k}|) over pairs with
    input in A_k, and the input mass outside A_k are computed by enumerating
    all output strings; monte-carlo mode samples `samples` transmissions and
    reports no gap.
    """
    _check_input(omega, channel)
    if rate <= 0:
        raise ValidationError(f"Rate must be positive, got {rate}")
    if trials < 1:
        raise ValidationError(f"Need at least one trial, got {trials}")
    if mode not in ("exact", "monte-carlo"):
        raise ValidationError(f"Unknown mode {mode!r} (exact|monte-carlo)")
    ks = [ks] if isinstance(ks, (int, np.integer)) else list(ks)
    summaries, reports = [], []
    for k in ks:
        if k < 1:
            raise ValidationError(f"Block length must be >= 1, got {k}")
        r = codebook_size(k, rate)
        if r > channel.in_dim ** k:
            raise RateTooHighError(
                f"Rate {rate} needs {r} codewords but only {channel.in_dim ** k} inputs of length {k} exist"
            )
        if mode == "exact":
            check_budget(channel.out_dim ** k * r, budget, f"coding experiment (k={k}, r={r})")
        trial_policy = "supplied" if codebook is not None else policy
        rows = []
        for trial in range(trials):
            rng = np.random.default_rng([seed, k, trial])
            chosen = select_codebook(channel.in_dim, k, r, trial_policy, rng, codebook)
            if mode == "exact":
                error, gap, outside = _exact_trial(channel, omega, k, chosen, input_distribution, decoder_scale)
            else:
                prior = _prior(omega, chosen, k, input_distribution)
                error = _monte_carlo_trial(channel, k, chosen, prior, rng, samples)
                gap = None
                outside = max(1.0 - math.fsum(_input_weights(omega, chosen, k)), 0.0)
            logger.debug("k=%d trial=%d: error %.6g", k, trial, error)
            rows.append(CodingReport(
                k=k,
                rate=rate,
                codebook_size=r,
                trial=trial,
                seed=seed,
                policy=trial_policy,
                input_distribution=input_distribution,
                decoder_scale=decoder_scale,
                mode=mode,
                error_prob=error,
                gap=gap,
                outside_mass=outside,
            ))
        reports.extend(rows)
        summaries.append(_summarize(k, rate, r, rows))
    return CodingRun(summaries, reports)


def _summarize(k, rate, r, rows):
    errors = [row.error_prob for row in rows]
    gaps = [row.gap for row in rows if row.gap is not None]
    return CodingSummary(
        k=k,
        rate=rate,
        codebook_size=r,
        trials=len(rows),
        mean_error_prob=math.fsum(errors) / len(errors),
        max_error_prob=max(errors),
        mean_gap=math.fsum(gaps) / len(gaps) if gaps else None,
        max_gap=max(gaps, default=None),
        mean_outside_mass=math.fsum(row.outside_mass for row in rows) / len(rows),
    )


def zk_diagnostic(
    channel,
    omega,
    rate,
    eps,
    k,
    codebook=None,
    policy="uniform",
    seed=0,
    trial=0,
    decoder_scale="transition",
    budget=None,
):
    """Omega(Z_k |O_{C_k} - O_{L_k}|) against 2^(-k eps).

    Z_k projects onto pairs with log2(C^(k)(y|x) / omega~^k(y)) > k(R + eps).
    Both O_{C_k} and O_{L_k} take values in [0, 1], so the mass never exceeds
    Omega(Z_k) over the codebook; exceeding it raises ConsistencyError.
    """
    _check_input(omega, channel)
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    r = codebook_size(k, rate)
    check_budget(channel.out_dim ** k * r, budget, f"Z_k diagnostic (k={k}, r={r})")
    rng = np.random.default_rng([seed, k, trial])
    chosen = select_codebook(channel.in_dim, k, r, "supplied" if codebook is not None else policy, rng, codebook)

    lik = likelihoods(channel, chosen, k)
    decoded, reachable = ml_decoder(lik)
    tilde_k = reduce(np.kron, [push_state(omega, channel).weights] * k)
    values = _decoder_values(lik, decoded, reachable, tilde_k, decoder_scale)
    x_weights = _input_weights(omega, chosen, k)

    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(lik > 0, np.log2(lik) - np.log2(tilde_k)[None, :], -np.inf)
    z = log_ratio > k * (rate + eps)
    mass = math.fsum((x_weights[:, None] * lik * np.abs(lik - values))[z])
    bound = 2.0 ** (-k * eps)
    provable = math.fsum((x_weights[:, None] * lik)[z])
    if mass > provable + 1e-12:
        raise ConsistencyError(f"Z_k mass {mass!r} exceeds Omega(Z_k) = {provable!r}")
    logger.debug("Z_k k=%d: %d pairs, mass %.6g, bound %.6g", k, int(z.sum()), mass, bound)
    return ZkReport(
        k=k,
        rate=rate,
        eps=eps,
        codebook_size=r,
        mass=mass,
        bound=bound,
        provable_bound=provable,
        holds=mass <= bound,
    )
