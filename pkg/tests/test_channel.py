import math

import numpy as np
import pytest

from abelian_info.algebra import Algebra
from abelian_info.channel import (
    Channel,
    channel_capacity,
    channel_output,
    codebook_size,
    coding_experiment,
    is_lossless,
    is_useless,
    joint_state,
    likelihoods,
    lossless_partition,
    ml_decoder,
    mutual_information,
    push_state,
    select_codebook,
    zk_diagnostic,
)
from abelian_info.errors import (
    DimensionError,
    InvalidChannelError,
    RateTooHighError,
    ValidationError,
)
from abelian_info.information import shannon_entropy
from abelian_info.states import State

from conftest import random_state

A2 = Algebra(2)
UNIFORM = State(A2, [0.5, 0.5])


def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_channel(rng, m, n):
    matrix = rng.random((m, n)) + 0.05
    return Channel(matrix / matrix.sum(axis=1, keepdims=True))


def test_channel_validation():
    with pytest.raises(InvalidChannelError):
        Channel([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(InvalidChannelError):
        Channel([[1.2, -0.2]])
    with pytest.raises(InvalidChannelError):
        Channel.bsc(1.5)
    with pytest.raises(InvalidChannelError):
        Channel([[0.9, 0.1], [0.5]])
    with pytest.raises(DimensionError):
        push_state(State(Algebra(3), [0.2, 0.3, 0.5]), Channel.bsc(0.1))


def test_channel_map_is_unital():
    channel = Channel([[0.2, 0.3, 0.5], [0.6, 0.4, 0.0]])
    total = sum(channel.apply(channel.output_algebra.basis(j)) for j in range(3))
    assert total.allclose(channel.input_algebra.identity())


def test_push_state():
    omega = State(Algebra(3), [0.2, 0.3, 0.5])
    assert push_state(omega, Channel.identity(3)).allclose(omega)
    assert push_state(UNIFORM, Channel.bsc(0.3)).tolist() == pytest.approx([0.5, 0.5])
    assert push_state(State(A2, [1, 0]), Channel.bsc(0.1)).tolist() == pytest.approx([0.9, 0.1])


def test_push_state_is_a_state(rng):
    for _ in range(100):
        m, n = (int(v) for v in rng.integers(1, 6, size=2))
        tilde = push_state(random_state(rng, m), random_channel(rng, m, n))
        assert tilde.weights.min() >= 0
        assert tilde.weights.sum() == pytest.approx(1)


def test_channel_output():
    assert channel_output(Channel.identity(2)).tolist() == [1, 0, 0, 1]
    p = 0.1
    # coordinate (y, x) at y * m + x
    assert channel_output(Channel.bsc(p)).tolist() == pytest.approx([1 - p, p, p, 1 - p])


def test_channel_output_is_memoryless():
    channel = Channel([[0.7, 0.3], [0.2, 0.8]])
    one = channel_output(channel, 1).coeffs.reshape(2, 2)
    two = channel_output(channel, 2).coeffs.reshape(4, 4)
    for y1 in range(2):
        for y2 in range(2):
            for x1 in range(2):
                for x2 in range(2):
                    assert two[2 * y1 + y2, 2 * x1 + x2] == one[y1, x1] * one[y2, x2]


def test_joint_state():
    joint = joint_state(UNIFORM, Channel.identity(2))
    assert joint.weights.ravel().tolist() == [0.5, 0, 0, 0.5]
    joint = joint_state(UNIFORM, Channel.bsc(0.1))
    assert joint.weights.ravel().tolist() == pytest.approx([0.45, 0.05, 0.05, 0.45])


def test_joint_state_marginals(rng):
    for _ in range(50):
        m, n = (int(v) for v in rng.integers(1, 5, size=2))
        omega, channel = random_state(rng, m), random_channel(rng, m, n)
        joint = joint_state(omega, channel, k=2)
        assert np.allclose(joint.input_marginal.weights, np.kron(omega.weights, omega.weights), atol=1e-12)
        tilde = push_state(omega, channel).weights
        assert np.allclose(joint.output_marginal.weights, np.kron(tilde, tilde), atol=1e-12)


def test_classification():
    useless = Channel.useless([0.3, 0.7], 2)
    assert is_useless(useless) and not is_lossless(useless)
    identity = Channel.identity(3)
    assert is_lossless(identity) and not is_useless(identity)
    assert lossless_partition(identity) == [(0,), (1,), (2,)]
    bsc = Channel.bsc(0.1)
    assert not is_useless(bsc) and not is_lossless(bsc)
    # outputs 0 and 1 only come from input 0, output 3 from input 1, output 2 from nobody
    spread = Channel([[0.5, 0.5, 0, 0], [0, 0, 0, 1]])
    assert lossless_partition(spread) == [(0, 1), (3,)]


def test_mutual_information():
    assert mutual_information(UNIFORM, Channel.useless([0.3, 0.7], 2)).mutual_information == pytest.approx(0, abs=1e-12)
    omega = State(Algebra(3), [0.2, 0.3, 0.5])
    info = mutual_information(omega, Channel.identity(3))
    assert info.mutual_information == pytest.approx(shannon_entropy(omega))
    info = mutual_information(UNIFORM, Channel.bsc(0.1))
    assert info.mutual_information == pytest.approx(0.531004, abs=1e-6)
    assert info.mutual_information == pytest.approx(1 - binary_entropy(0.1))


def test_mutual_information_with_tiny_input_weight():
    q = 2e-9
    info = mutual_information(State(A2, [1 - q, q]), Channel.bsc(0.3))
    assert info.mutual_information == pytest.approx(info.h_y - info.h_y_given_x, abs=1e-12)
    assert 0 < info.mutual_information < info.h_x


def test_mutual_information_bounds(rng):
    for _ in range(200):
        m, n = (int(v) for v in rng.integers(1, 6, size=2))
        omega, channel = random_state(rng, m), random_channel(rng, m, n)
        info = mutual_information(omega, channel)
        assert -1e-12 <= info.mutual_information <= min(info.h_x, info.h_y) + 1e-10
        assert info.h_x - info.h_x_given_y == pytest.approx(info.h_y - info.h_y_given_x, abs=1e-10)
        rank_one = Channel.useless(channel.matrix[0], m)
        assert mutual_information(omega, rank_one).mutual_information == pytest.approx(0, abs=1e-10)


def test_lossless_channels_keep_input_entropy(rng):
    for _ in range(50):
        m = int(rng.integers(2, 5))
        outputs = rng.permutation(2 * m)
        matrix = np.zeros((m, 2 * m))
        for i in range(m):
            weights = rng.random(2) + 0.1
            matrix[i, outputs[2 * i:2 * i + 2]] = weights / weights.sum()
        channel = Channel(matrix)
        assert is_lossless(channel)
        omega = random_state(rng, m)
        assert mutual_information(omega, channel).mutual_information == pytest.approx(shannon_entropy(omega))


def test_capacity():
    cap = channel_capacity(Channel.bsc(0.1))
    assert cap.capacity == pytest.approx(1 - binary_entropy(0.1), abs=1e-9)
    assert cap.input_state.tolist() == pytest.approx([0.5, 0.5])
    assert channel_capacity(Channel.identity(4)).capacity == pytest.approx(2)
    assert channel_capacity(Channel.useless([0.3, 0.7], 3)).capacity == pytest.approx(0, abs=1e-9)


def test_capacity_dominates_mutual_information(rng):
    for _ in range(20):
        channel = random_channel(rng, 3, 3)
        capacity = channel_capacity(channel).capacity
        for _ in range(5):
            assert mutual_information(random_state(rng, 3), channel).mutual_information <= capacity + 1e-6


# ===========================================================
#  Block coding
# ===========================================================

def test_codebook_size():
    assert [codebook_size(k, 0.4) for k in (4, 8, 12)] == [4, 10, 28]
    assert codebook_size(3, 1.0) == 8
    assert codebook_size(1, 0.01) == 2


def test_select_codebook():
    rng = np.random.default_rng(0)
    chosen = select_codebook(2, 4, 5, "uniform", rng)
    assert len(set(chosen.tolist())) == 5 and all(0 <= c < 16 for c in chosen)
    assert select_codebook(2, 3, 3, "lexicographic").tolist() == [0, 1, 2]
    assert select_codebook(2, 2, 2, codebook=["11", "01"]).tolist() == [1, 3]
    with pytest.raises(ValidationError):
        select_codebook(2, 2, 2, codebook=["11", "11"])
    with pytest.raises(RateTooHighError):
        select_codebook(2, 2, 5)


def test_ml_decoder_breaks_ties_low():
    lik = likelihoods(Channel.useless([0.5, 0.5], 2), np.array([0, 3]), 2)
    decoded, reachable = ml_decoder(lik)
    assert decoded.tolist() == [0, 0, 0, 0]
    assert reachable.all()


def test_identity_channel_decodes_exactly():
    run = coding_experiment(Channel.identity(2), UNIFORM, 0.5, [2, 4, 6], trials=3, seed=1)
    for summary in run.summaries:
        assert summary.mean_error_prob == 0
        assert summary.mean_gap == pytest.approx(0, abs=1e-12)
    assert len(run.reports) == 9


def test_useless_channel_errors():
    run = coding_experiment(Channel.useless([0.5, 0.5], 2), UNIFORM, 0.5, 4, trials=2, seed=3)
    r = run.summaries[0].codebook_size
    assert run.summaries[0].mean_error_prob == pytest.approx((r - 1) / r)


def test_coding_error_decreases_with_block_length():
    run = coding_experiment(Channel.bsc(0.05), UNIFORM, 0.4, [4, 8, 12], trials=50, seed=7)
    errors = [s.mean_error_prob for s in run.summaries]
    assert [s.codebook_size for s in run.summaries] == [4, 10, 28]
    assert errors[0] > errors[1] > errors[2]


def test_coding_experiment_is_reproducible():
    kwargs = dict(trials=4, seed=11, policy="uniform")
    first = coding_experiment(Channel.bsc(0.1), UNIFORM, 0.5, [4, 6], **kwargs)
    second = coding_experiment(Channel.bsc(0.1), UNIFORM, 0.5, [4, 6], **kwargs)
    assert [r.model_dump() for r in first.reports] == [r.model_dump() for r in second.reports]


def test_coding_options():
    channel = Channel.bsc(0.1)
    omega = State(A2, [0.3, 0.7])
    exact = coding_experiment(channel, omega, 0.5, 4, trials=2, seed=5, input_distribution="state",
                              decoder_scale="output")
    report = exact.reports[0]
    assert report.input_distribution == "state" and report.decoder_scale == "output"
    assert 0 <= report.error_prob <= 1
    assert 0 <= report.outside_mass <= 1
    sampled = coding_experiment(channel, omega, 0.5, 4, trials=2, seed=5, mode="monte-carlo", samples=200)
    assert sampled.reports[0].gap is None
    assert sampled.summaries[0].mean_gap is None
    with pytest.raises(RateTooHighError):
        coding_experiment(channel, omega, 1.5, 2)
    with pytest.raises(ValidationError):
        coding_experiment(channel, omega, 0.5, 4, mode="approximate")


def test_monte_carlo_tracks_exact_error():
    channel = Channel.bsc(0.2)
    kwargs = dict(trials=1, seed=2, policy="lexicographic")
    exact = coding_experiment(channel, UNIFORM, 0.5, 4, **kwargs).summaries[0].mean_error_prob
    sampled = coding_experiment(channel, UNIFORM, 0.5, 4, mode="monte-carlo", samples=4000, **kwargs)
    assert sampled.summaries[0].mean_error_prob == pytest.approx(exact, abs=0.05)


def test_zk_diagnostic():
    channel = Channel.bsc(0.05)
    for k in (4, 8, 12):
        for trial in range(5):
            report = zk_diagnostic(channel, UNIFORM, 0.4, 0.1, k, seed=7, trial=trial)
            assert report.holds
            assert report.mass <= report.provable_bound + 1e-12
            assert report.bound == pytest.approx(2 ** (-0.1 * k))
    lossless = zk_diagnostic(Channel.identity(2), UNIFORM, 0.5, 0.1, 4)
    assert lossless.mass == 0


def test_zk_diagnostic_on_random_channels(rng):
    for _ in range(20):
        channel = random_channel(rng, 2, 3)
        omega = random_state(rng, 2)
        report = zk_diagnostic(channel, omega, 0.3, 0.05, 5, seed=int(rng.integers(1000)))
        assert report.mass <= report.provable_bound + 1e-12
