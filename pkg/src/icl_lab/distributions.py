"""Finite categorical distributions: construction, sampling, estimation, L1 metric.

The canonical distance between two distributions here is the plain L1 sum
``sum_v |p(v) - q(v)|`` (range [0, 2]); the conventional total-variation
normalization is available as :func:`tv_distance` = L1 / 2.  All randomness
flows through an explicit ``numpy.random.Generator`` so every operation is a
pure function of its inputs and the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# Distributions whose entries sum to 1 within this tolerance are renormalized
# on construction; anything further off is rejected.
PROB_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Vocabulary:
    """Ordered collection of distinct token identifiers."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise ParameterError("vocabulary must contain at least one token")
        if len(set(self.tokens)) != len(self.tokens):
            raise ParameterError("vocabulary tokens must be distinct")

    @classmethod
    def of_size(cls, size: int) -> "Vocabulary":
        """Synthetic vocabulary of ``size`` generic tokens."""
        if size < 1:
            raise ParameterError(f"vocabulary size must be >= 1, got {size}")
        return cls(tuple(f"tok{i}" for i in range(size)))

    @property
    def size(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class CategoricalDistribution:
    """Probability vector over a finite support.

    Entries must be non-negative and sum to 1 within ``PROB_SUM_TOLERANCE``;
    the stored vector is renormalized to sum exactly (up to rounding) to 1 and
    frozen against mutation.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ParameterError("probability vector must be one-dimensional and non-empty")
        if not np.all(np.isfinite(probs)):
            raise ParameterError("probability vector contains non-finite entries")
        if np.any(probs < 0.0) or np.any(probs > 1.0 + PROB_SUM_TOLERANCE):
            raise ParameterError("probability entries must lie in [0, 1]")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise ParameterError(
                f"probabilities sum to {total!r}, outside tolerance {PROB_SUM_TOLERANCE} of 1"
            )
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return int(self.probs.size)

    @classmethod
    def point_mass(cls, index: int, size: int) -> "CategoricalDistribution":
        if not 0 <= index < size:
            raise ParameterError(f"point-mass index {index} out of range for size {size}")
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)


@dataclass(frozen=True)
class Context:
    """A conditioning context, identified by its index within a task."""

    id: int
    label: object = None


@dataclass(frozen=True)
class SyntheticTask:
    """Ground-truth next-token distributions, one per context."""

    vocab: Vocabulary
    contexts: tuple[Context, ...]
    dists: tuple[CategoricalDistribution, ...]

    def __post_init__(self):
        if len(self.contexts) != len(self.dists):
            raise ParameterError("need exactly one distribution per context")
        if len(self.contexts) < 1:
            raise ParameterError("task must have at least one context")
        ids = [c.id for c in self.contexts]
        if len(set(ids)) != len(ids):
            raise ParameterError("context ids must be unique within a task")
        for dist in self.dists:
            if dist.size != self.vocab.size:
                raise ParameterError(
                    f"distribution support {dist.size} does not match vocabulary size {self.vocab.size}"
                )

    @property
    def num_contexts(self) -> int:
        return len(self.contexts)


def l1_distance(p: CategoricalDistribution, q: CategoricalDistribution) -> float:
    """Sum of absolute probability differences; 0 iff p == q, at most 2."""
    if p.size != q.size:
        raise ParameterError(f"distribution sizes differ: {p.size} vs {q.size}")
    return float(np.abs(p.probs - q.probs).sum())


def tv_distance(p: CategoricalDistribution, q: CategoricalDistribution) -> float:
    """Total-variation distance under the standard 1/2 normalization."""
    return 0.5 * l1_distance(p, q)


def empirical_distribution(samples, vocab: Vocabulary) -> CategoricalDistribution:
    """Frequency estimate from i.i.d. token indices. Raw counts, no smoothing."""
    idx = np.asarray(samples, dtype=np.int64)
    if idx.size == 0:
        raise ParameterError("cannot estimate a distribution from an empty sample list")
    if idx.ndim != 1:
        raise ParameterError("samples must be a flat sequence of token indices")
    if idx.min() < 0 or idx.max() >= vocab.size:
        raise IndexError(
            f"token index out of range [0, {vocab.size}): min {idx.min()}, max {idx.max()}"
        )
    counts = np.bincount(idx, minlength=vocab.size)
    return CategoricalDistribution(counts / idx.size)


def sample_tokens(dist: CategoricalDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. token indices by inverse-CDF over the probability vector."""
    if n < 1:
        raise ParameterError(f"sample count must be >= 1, got {n}")
    cdf = np.cumsum(dist.probs)
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    # Guard against u landing beyond the final cumsum entry (rounding).
    return np.minimum(idx, dist.size - 1).astype(np.int64)


def random_distribution(
    size: int, concentration: float, rng: np.random.Generator
) -> CategoricalDistribution:
    """Symmetric Dirichlet-style draw via normalized Gamma variates.

    Small ``concentration`` gives skewed vectors (mass on few entries); large
    values approach the uniform vector.
    """
    if size < 1:
        raise ParameterError(f"support size must be >= 1, got {size}")
    if concentration <= 0:
        raise ParameterError(f"concentration must be positive, got {concentration}")
    draws = rng.gamma(concentration, 1.0, size=size)
    total = draws.sum()
    while not np.isfinite(total) or total <= 0.0:
        # All gamma draws can underflow to zero for very small concentration.
        draws = rng.gamma(concentration, 1.0, size=size)
        total = draws.sum()
    return CategoricalDistribution(draws / total)


def random_task(
    vocab_size: int, num_contexts: int, concentration: float, rng: np.random.Generator
) -> SyntheticTask:
    """Generate a synthetic task: one random distribution per context."""
    if vocab_size < 2:
        raise ParameterError(f"vocabulary size must be >= 2, got {vocab_size}")
    if num_contexts < 1:
        raise ParameterError(f"context count must be >= 1, got {num_contexts}")
    vocab = Vocabulary.of_size(vocab_size)
    dists = tuple(random_distribution(vocab_size, concentration, rng) for _ in range(num_contexts))
    contexts = tuple(Context(id=i) for i in range(num_contexts))
    return SyntheticTask(vocab=vocab, contexts=contexts, dists=dists)
