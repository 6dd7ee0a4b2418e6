"""Idealized in-context responder.

Given prompt samples, the responder returns exactly the behavior the
verification experiments assume: the empirical distribution of the samples
for generation, or a locally trained logistic model for classification.  An
injectable error knob degrades either output by mixing toward uniform, which
lets experiments chart how guarantees decay as responder fidelity drops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .classify import LabeledDataset, TrainConfig, predict_prob, train_logistic
from .distributions import (
    CategoricalDistribution,
    Context,
    Vocabulary,
    empirical_distribution,
)
from .errors import ParameterError

ETA_NONE = "none"
ETA_UNIFORM_MIX = "uniform_mix"

# Dense sequence distributions refuse to materialize beyond this many outcomes.
DEFAULT_SEQUENCE_LIMIT = 10**6


@dataclass(frozen=True)
class EtaModel:
    """Responder error knob: mix weight ``eta`` toward the uniform distribution."""

    eta: float = 0.0
    kind: str = ETA_NONE

    def __post_init__(self):
        if self.kind not in (ETA_NONE, ETA_UNIFORM_MIX):
            raise ParameterError(f"unknown eta kind {self.kind!r}")
        if self.kind == ETA_NONE and self.eta != 0.0:
            raise ParameterError("eta must be 0 when kind is 'none'")
        if not 0.0 <= self.eta < 1.0:
            raise ParameterError(f"eta must be in [0, 1), got {self.eta}")

    @classmethod
    def none(cls) -> "EtaModel":
        return cls()

    @classmethod
    def uniform_mix(cls, eta: float) -> "EtaModel":
        return cls(eta=eta, kind=ETA_UNIFORM_MIX)


@dataclass(frozen=True)
class IclPromptSamples:
    """Prompt contents: per-context sample lists and/or a labeled subset."""

    per_context: Mapping[int, object] = field(default_factory=dict)
    subset: LabeledDataset | None = None

    def samples_for(self, context_id: int):
        if context_id not in self.per_context:
            raise ParameterError(f"prompt has no samples for context {context_id}")
        samples = self.per_context[context_id]
        if len(samples) == 0:
            raise ParameterError(f"prompt sample list for context {context_id} is empty")
        return samples


def mix_with_uniform(
    dist: CategoricalDistribution, eta_model: EtaModel
) -> CategoricalDistribution:
    """(1 - eta) * dist + eta * uniform; identity when the knob is off."""
    if eta_model.kind == ETA_NONE:
        return dist
    eta = eta_model.eta
    return CategoricalDistribution((1.0 - eta) * dist.probs + eta / dist.size)


def mix_probability(p, eta_model: EtaModel):
    """Scalar/array counterpart of :func:`mix_with_uniform`: mixes toward 1/2."""
    if eta_model.kind == ETA_NONE:
        return p
    return (1.0 - eta_model.eta) * p + eta_model.eta * 0.5


def icl_textgen_dist(
    prompt: IclPromptSamples,
    context: Context,
    vocab: Vocabulary,
    eta: EtaModel = EtaModel.none(),
) -> CategoricalDistribution:
    """Next-token distribution the responder produces for ``context``.

    With the error knob off this is exactly the empirical distribution of the
    prompt samples.
    """
    samples = prompt.samples_for(context.id)
    return mix_with_uniform(empirical_distribution(samples, vocab), eta)


def icl_classify_prob(
    subset: LabeledDataset,
    query,
    cfg: TrainConfig = TrainConfig(),
    eta: EtaModel = EtaModel.none(),
) -> float:
    """Class-1 probability from a logistic model trained on the prompt subset."""
    model = train_logistic(subset, cfg)
    return float(mix_probability(predict_prob(model, query), eta))


def encode_sequences(sequences, vocab_size: int, length: int) -> np.ndarray:
    """Map length-``length`` token tuples to integer codes in [0, vocab_size**length)."""
    arr = np.asarray(sequences, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != length:
        raise ParameterError(f"samples must be sequences of exactly {length} token indices")
    if arr.size and (arr.min() < 0 or arr.max() >= vocab_size):
        raise IndexError(f"token index out of range [0, {vocab_size})")
    weights = vocab_size ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return arr @ weights


def decode_sequences(codes, vocab_size: int, length: int) -> np.ndarray:
    """Inverse of :func:`encode_sequences`; returns an (n, length) index array."""
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, length), dtype=np.int64)
    rest = codes.copy()
    for pos in range(length - 1, -1, -1):
        out[:, pos] = rest % vocab_size
        rest //= vocab_size
    return out


def icl_sequence_dist(
    prompt: IclPromptSamples,
    context: Context,
    vocab: Vocabulary,
    length: int,
    eta: EtaModel = EtaModel.none(),
    sequence_limit: int = DEFAULT_SEQUENCE_LIMIT,
) -> CategoricalDistribution:
    """Joint distribution over all length-``length`` sequences, stored densely.

    The support has ``vocab.size ** length`` outcomes; anything past
    ``sequence_limit`` is refused rather than approximated, so reduce the
    vocabulary size or the sequence length to stay exact.
    """
    if length < 1:
        raise ParameterError(f"sequence length must be >= 1, got {length}")
    space = vocab.size**length
    if space > sequence_limit:
        raise ParameterError(
            f"sequence space V^l = {vocab.size}^{length} = {space} exceeds the "
            f"limit {sequence_limit}; use a smaller vocabulary or shorter length"
        )
    samples = prompt.samples_for(context.id)
    codes = encode_sequences(samples, vocab.size, length)
    counts = np.bincount(codes, minlength=space)
    empirical = CategoricalDistribution(counts / codes.size)
    return mix_with_uniform(empirical, eta)
