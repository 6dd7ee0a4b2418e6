import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icl_lab import (
    CategoricalDistribution,
    Context,
    EtaModel,
    IclPromptSamples,
    LabeledDataset,
    ParameterError,
    TrainConfig,
    Vocabulary,
    decode_sequences,
    empirical_distribution,
    encode_sequences,
    icl_classify_prob,
    icl_sequence_dist,
    icl_textgen_dist,
    l1_distance,
    mix_probability,
    mix_with_uniform,
)


class TestEtaModel:
    def test_none_requires_zero(self):
        with pytest.raises(ParameterError):
            EtaModel(eta=0.1, kind="none")

    def test_rejects_eta_one(self):
        with pytest.raises(ParameterError):
            EtaModel.uniform_mix(1.0)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ParameterError):
            EtaModel(eta=0.1, kind="dirichlet")


class TestTextgenOracle:
    def test_zero_eta_equals_empirical(self):
        prompt = IclPromptSamples(per_context={0: [0, 0, 1, 1]})
        out = icl_textgen_dist(prompt, Context(0), Vocabulary.of_size(2))
        assert list(out.probs) == [0.5, 0.5]

    def test_uniform_mix_arithmetic(self):
        prompt = IclPromptSamples(per_context={0: [0, 0, 0]})
        out = icl_textgen_dist(prompt, Context(0), Vocabulary.of_size(2), EtaModel.uniform_mix(0.2))
        assert out.probs == pytest.approx([0.9, 0.1])

    def test_missing_context(self):
        prompt = IclPromptSamples(per_context={0: [0]})
        with pytest.raises(ParameterError):
            icl_textgen_dist(prompt, Context(5), Vocabulary.of_size(2))

    def test_zero_eta_identity_on_random_inputs(self):
        rng = np.random.default_rng(0)
        vocab = Vocabulary.of_size(6)
        for _ in range(25):
            samples = rng.integers(0, 6, size=rng.integers(1, 40))
            prompt = IclPromptSamples(per_context={1: samples})
            out = icl_textgen_dist(prompt, Context(1), vocab)
            assert l1_distance(out, empirical_distribution(samples, vocab)) == 0.0


class TestClassifyOracle:
    def test_single_class_subset_confident_inside_hull(self):
        rng = np.random.default_rng(1)
        features = rng.standard_normal((12, 2)) + 1.0
        subset = LabeledDataset(features, np.ones(12, dtype=np.int64))
        cfg = TrainConfig(max_iters=300)
        for point in features:
            assert icl_classify_prob(subset, point, cfg) > 0.5
        # convex combinations stay on the confident side too
        weights = rng.dirichlet(np.ones(12), size=10)
        for w in weights:
            assert icl_classify_prob(subset, w @ features, cfg) > 0.5

    def test_mixture_arithmetic(self):
        assert mix_probability(1.0, EtaModel.uniform_mix(0.2)) == pytest.approx(0.9)
        assert mix_probability(0.5, EtaModel.uniform_mix(0.7)) == pytest.approx(0.5)

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        subset = LabeledDataset(
            rng.standard_normal((10, 3)), rng.integers(0, 2, 10).astype(np.int64)
        )
        query = rng.standard_normal(3)
        a = icl_classify_prob(subset, query, TrainConfig(max_iters=100))
        b = icl_classify_prob(subset, query, TrainConfig(max_iters=100))
        assert a == b


class TestSequenceOracle:
    def test_length_one_reduces_to_textgen(self):
        samples = [0, 1, 1, 0, 1]
        vocab = Vocabulary.of_size(2)
        tokens = IclPromptSamples(per_context={0: samples})
        seqs = IclPromptSamples(per_context={0: [[s] for s in samples]})
        a = icl_textgen_dist(tokens, Context(0), vocab)
        b = icl_sequence_dist(seqs, Context(0), vocab, 1)
        assert np.array_equal(a.probs, b.probs)

    def test_counting_example(self):
        prompt = IclPromptSamples(per_context={0: [(0, 0), (0, 0), (1, 1), (1, 1)]})
        out = icl_sequence_dist(prompt, Context(0), Vocabulary.of_size(2), 2)
        assert out.probs == pytest.approx([0.5, 0.0, 0.0, 0.5])

    def test_identical_samples_give_point_mass(self):
        prompt = IclPromptSamples(per_context={0: [(1, 0)] * 7})
        out = icl_sequence_dist(prompt, Context(0), Vocabulary.of_size(2), 2)
        assert out.probs == pytest.approx([0.0, 0.0, 1.0, 0.0])

    def test_explosion_limit(self):
        prompt = IclPromptSamples(per_context={0: [(0, 0)]})
        with pytest.raises(ParameterError):
            icl_sequence_dist(prompt, Context(0), Vocabulary.of_size(2), 2, sequence_limit=3)

    def test_first_coordinate_marginal_matches_textgen(self):
        rng = np.random.default_rng(3)
        vocab = Vocabulary.of_size(3)
        seqs = rng.integers(0, 3, size=(50, 2))
        joint = icl_sequence_dist(
            IclPromptSamples(per_context={0: seqs}), Context(0), vocab, 2
        )
        marginal = joint.probs.reshape(3, 3).sum(axis=1)
        firsts = icl_textgen_dist(
            IclPromptSamples(per_context={0: seqs[:, 0]}), Context(0), vocab
        )
        assert marginal == pytest.approx(firsts.probs)

    def test_encode_decode_round_trip(self):
        rng = np.random.default_rng(4)
        seqs = rng.integers(0, 5, size=(30, 3))
        codes = encode_sequences(seqs, 5, 3)
        assert np.array_equal(decode_sequences(codes, 5, 3), seqs)

    def test_wrong_length_rejected(self):
        with pytest.raises(ParameterError):
            encode_sequences([(0, 1, 0)], 2, 2)


@settings(max_examples=150)
@given(
    st.integers(2, 10),
    st.lists(st.integers(0, 9), min_size=1, max_size=50),
    st.floats(0.0, 0.99),
)
def test_oracle_outputs_valid_and_close_to_empirical(vocab_size, raw_samples, eta):
    """Outputs are distributions; the uniform mix moves L1 mass at most 2*eta."""
    samples = [s % vocab_size for s in raw_samples]
    vocab = Vocabulary.of_size(vocab_size)
    prompt = IclPromptSamples(per_context={0: samples})
    eta_model = EtaModel.uniform_mix(eta) if eta > 0 else EtaModel.none()
    out = icl_textgen_dist(prompt, Context(0), vocab, eta_model)
    assert out.probs.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(out.probs >= 0)
    empirical = empirical_distribution(samples, vocab)
    assert l1_distance(out, empirical) <= 2 * eta + 1e-12


def test_mix_with_uniform_on_point_mass():
    point = CategoricalDistribution.point_mass(0, 4)
    mixed = mix_with_uniform(point, EtaModel.uniform_mix(0.4))
    assert mixed.probs == pytest.approx([0.7, 0.1, 0.1, 0.1])
