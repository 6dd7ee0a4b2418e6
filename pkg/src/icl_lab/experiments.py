"""Monte Carlo verification runs for every sample-size rule.

Each experiment runs ``trials`` independent trials.  Trial ``i`` draws all of
its randomness from a stream derived from ``(seed, i)``, so results do not
depend on execution order and the whole run is a pure function of the config.
Trials may execute in parallel; the ``ICL_LAB_THREADS`` environment variable
caps the worker count (default 1).
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    MODE_EXACT,
    MODES,
    BoundParams,
    bounded_textgen_size,
    coreset_size,
    knn_context_size,
    subset_penalty,
    textgen_samples_per_context,
)
from .classify import (
    LabeledDataset,
    LinearModel,
    TrainConfig,
    knn_select,
    predict_prob,
    predict_probs,
    select_coreset,
    train_logistic,
)
from .distributions import (
    Context,
    Vocabulary,
    l1_distance,
    random_distribution,
    random_task,
    sample_tokens,
)
from .errors import DivergenceError, ParameterError
from .oracle import (
    DEFAULT_SEQUENCE_LIMIT,
    EtaModel,
    IclPromptSamples,
    decode_sequences,
    icl_sequence_dist,
    icl_textgen_dist,
    mix_probability,
)
from .reports import (
    BoundReport,
    TrialResult,
    build_report,
    fit_log_log_slope,
    write_csv_report,
    write_json_report,
)

KINDS = ("textgen", "bounded_textgen", "coreset", "knn", "subset_penalty")
THREADS_ENV_VAR = "ICL_LAB_THREADS"

# Evaluation-set sizes used when the config leaves eval_points unset:
# classification sup errors scan a large point cloud, k-NN trains one local
# model per query so its default is small.
DEFAULT_EVAL_POINTS = {"coreset": 10_000, "knn": 16}


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one verification run (see README for the JSON schema)."""

    kind: str
    params: BoundParams
    trials: int = 100
    seed: int = 0
    eta: EtaModel = EtaModel.none()
    eval_points: int | None = None
    output_path: str | None = None
    mode: str = MODE_EXACT
    concentration: float = 1.0
    samples_override: int | None = None
    dataset_size: int = 2000
    cluster_separation: float = 1.5
    noise_scale: float = 1.0
    planted_norm: float = 2.0
    coreset_strategy: str = "uniform"
    coreset_sizes: tuple[int, ...] | None = None
    knn_sizes: tuple[int, ...] = (16, 64, 256, 1024)
    subset_sizes: tuple[int, ...] = (100, 1000, 10_000, 100_000)
    train: TrainConfig = TrainConfig()
    sequence_limit: int = DEFAULT_SEQUENCE_LIMIT

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.eval_points is not None and self.eval_points < 1:
            raise ParameterError(f"eval_points must be >= 1, got {self.eval_points}")
        if self.mode not in MODES:
            raise ParameterError(f"unknown bound mode {self.mode!r}; expected one of {MODES}")
        if self.concentration <= 0:
            raise ParameterError(f"concentration must be positive, got {self.concentration}")
        if self.samples_override is not None and self.samples_override < 1:
            raise ParameterError(f"samples_override must be >= 1, got {self.samples_override}")
        if self.dataset_size < 2:
            raise ParameterError(f"dataset_size must be >= 2, got {self.dataset_size}")
        if self.cluster_separation < 0 or self.noise_scale <= 0 or self.planted_norm <= 0:
            raise ParameterError("cluster_separation must be >= 0; noise_scale, planted_norm > 0")
        if self.coreset_strategy not in ("uniform", "sensitivity"):
            raise ParameterError(f"unknown coreset strategy {self.coreset_strategy!r}")
        for name in ("coreset_sizes", "knn_sizes", "subset_sizes"):
            sizes = getattr(self, name)
            if sizes is None:
                continue
            sizes = tuple(int(s) for s in sizes)
            if not sizes or any(s < 1 for s in sizes):
                raise ParameterError(f"{name} entries must be integers >= 1, got {sizes!r}")
            object.__setattr__(self, name, sizes)
        if self.sequence_limit < 1:
            raise ParameterError(f"sequence_limit must be >= 1, got {self.sequence_limit}")

    def resolved_eval_points(self) -> int:
        if self.eval_points is not None:
            return self.eval_points
        return DEFAULT_EVAL_POINTS.get(self.kind, 1000)

    def to_dict(self) -> dict:
        raw = dataclasses.asdict(self)
        for key in ("coreset_sizes", "knn_sizes", "subset_sizes"):
            if raw[key] is not None:
                raw[key] = list(raw[key])
        return raw

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        if "params" not in data:
            raise ParameterError("config is missing the 'params' section")
        data["params"] = BoundParams(**dict(data["params"]))
        if "eta" in data and not isinstance(data["eta"], EtaModel):
            data["eta"] = EtaModel(**dict(data["eta"]))
        if "train" in data and not isinstance(data["train"], TrainConfig):
            data["train"] = TrainConfig(**dict(data["train"]))
        for key in ("coreset_sizes", "knn_sizes", "subset_sizes"):
            if data.get(key) is not None:
                data[key] = tuple(int(s) for s in data[key])
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as handle:
            try:
                payload = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ParameterError(f"config file {path} must contain a JSON object")
        return cls.from_dict(payload)


def max_workers() -> int:
    """Worker cap from ``ICL_LAB_THREADS``; 1 when unset."""
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ParameterError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for trial ``trial_index``, a pure function of (seed, index)."""
    root = np.random.SeedSequence(entropy=seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(trial_index,))
    return np.random.default_rng(root)


def _run_trials(trials: int, fn) -> list:
    workers = max_workers()
    if workers == 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def _finalize(cfg: ExperimentConfig, trials, extras: dict) -> BoundReport:
    # The echoed config describes the experiment, not the delivery location,
    # so reports written to different paths stay byte-identical.
    echo = dict(cfg.to_dict(), output_path=None)
    report = build_report(echo, trials, cfg.params.delta, extras)
    if cfg.output_path is not None:
        json_path = Path(cfg.output_path)
        write_json_report(report, json_path)
        write_csv_report(report, json_path.with_suffix(".csv"))
    return report


def _median_by_sweep(rows: list[TrialResult]) -> dict[int, float]:
    grouped: dict[int, list[float]] = {}
    for row in rows:
        grouped.setdefault(row.sweep_value, []).append(row.sup_error)
    return {value: float(np.median(errs)) for value, errs in sorted(grouped.items())}


def _sweep_slope(medians: dict[int, float]) -> float | None:
    points = [(k, v) for k, v in medians.items() if v > 0]
    if len(points) < 2:
        return None
    return fit_log_log_slope([p[0] for p in points], [p[1] for p in points])


def run_textgen_experiment(cfg: ExperimentConfig) -> BoundReport:
    """Estimate every context's next-token distribution from samples; check the
    worst-context L1 error against epsilon with the promised failure rate."""
    _require_kind(cfg, "textgen")
    p = cfg.params
    bound = textgen_samples_per_context(p, cfg.mode)
    per_context = cfg.samples_override or bound.per_context
    threshold = p.epsilon + 2.0 * cfg.eta.eta

    def one_trial(i: int) -> TrialResult:
        rng = trial_rng(cfg.seed, i)
        task = random_task(p.vocab_size, p.num_contexts, cfg.concentration, rng)
        sup = 0.0
        for ctx, truth in zip(task.contexts, task.dists):
            samples = sample_tokens(truth, per_context, rng)
            prompt = IclPromptSamples(per_context={ctx.id: samples})
            estimate = icl_textgen_dist(prompt, ctx, task.vocab, cfg.eta)
            sup = max(sup, l1_distance(estimate, truth))
        return TrialResult(i, sup, sup > threshold)

    rows = _run_trials(cfg.trials, one_trial)
    extras = {
        "samples_per_context": per_context,
        "total_samples_per_trial": per_context * p.num_contexts,
        "failure_threshold": threshold,
        "bound_formula": bound.formula_text,
        "bound_mode": cfg.mode,
    }
    return _finalize(cfg, rows, extras)


def run_bounded_textgen_experiment(cfg: ExperimentConfig) -> BoundReport:
    """Same check as :func:`run_textgen_experiment` but over the joint
    distribution of length-l sequences, estimated from whole-sequence samples."""
    _require_kind(cfg, "bounded_textgen")
    p = cfg.params
    space = p.vocab_size**p.output_len
    if space > cfg.sequence_limit:
        raise ParameterError(
            f"sequence space {p.vocab_size}^{p.output_len} = {space} exceeds the "
            f"limit {cfg.sequence_limit}"
        )
    samples_per_context = cfg.samples_override or bounded_textgen_size(p)
    threshold = p.epsilon + 2.0 * cfg.eta.eta
    vocab = Vocabulary.of_size(p.vocab_size)

    def one_trial(i: int) -> TrialResult:
        rng = trial_rng(cfg.seed, i)
        truths = [
            random_distribution(space, cfg.concentration, rng) for _ in range(p.num_contexts)
        ]
        sup = 0.0
        for ctx_id, truth in enumerate(truths):
            codes = sample_tokens(truth, samples_per_context, rng)
            sequences = decode_sequences(codes, p.vocab_size, p.output_len)
            prompt = IclPromptSamples(per_context={ctx_id: sequences})
            estimate = icl_sequence_dist(
                prompt, Context(ctx_id), vocab, p.output_len, cfg.eta, cfg.sequence_limit
            )
            sup = max(sup, l1_distance(estimate, truth))
        return TrialResult(i, sup, sup > threshold)

    rows = _run_trials(cfg.trials, one_trial)
    extras = {
        "samples_per_context": samples_per_context,
        "sequence_space": space,
        "failure_threshold": threshold,
        "constant": p.constant,
    }
    return _finalize(cfg, rows, extras)


def cluster_dataset(
    n: int, dim: int, separation: float, noise: float, rng: np.random.Generator
) -> tuple[LabeledDataset, LinearModel]:
    """Two symmetric Gaussian blobs at +/- separation along the first axis.

    Labels mark the generating blob.  The posterior class-1 probability is
    exactly logistic with weights ``2 * separation / noise^2`` on the first
    coordinate, returned as the planted reference model.
    """
    labels = rng.integers(0, 2, size=n)
    centers = np.zeros((n, dim))
    centers[:, 0] = (2 * labels - 1) * separation
    features = centers + noise * rng.standard_normal((n, dim))
    planted_w = np.zeros(dim)
    planted_w[0] = 2.0 * separation / noise**2
    return LabeledDataset(features, labels), LinearModel(planted_w, 0.0)


def planted_linear_dataset(
    n: int, dim: int, weight_norm: float, rng: np.random.Generator
) -> tuple[LabeledDataset, LinearModel]:
    """Standard-normal inputs with Bernoulli labels from a planted logistic model."""
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    planted = LinearModel(weight_norm * direction, 0.0)
    features = rng.standard_normal((n, dim))
    probs = predict_probs(planted, features)
    labels = (rng.random(n) < probs).astype(np.int64)
    return LabeledDataset(features, labels), planted


def run_coreset_experiment(cfg: ExperimentConfig) -> BoundReport:
    """Train on coresets of swept sizes and compare predicted probabilities
    against the full-data model over a large evaluation cloud."""
    _require_kind(cfg, "coreset")
    p = cfg.params
    sizes = cfg.coreset_sizes or (coreset_size(p),)
    if max(sizes) > cfg.dataset_size:
        raise ParameterError(
            f"coreset sizes {sizes} exceed dataset_size {cfg.dataset_size}"
        )
    threshold = p.epsilon + 2.0 * cfg.eta.eta
    eval_draws = cfg.resolved_eval_points()

    def one_trial(i: int) -> list[TrialResult]:
        rng = trial_rng(cfg.seed, i)
        data, _ = cluster_dataset(
            cfg.dataset_size, p.input_dim, cfg.cluster_separation, cfg.noise_scale, rng
        )
        full_model = train_logistic(data, cfg.train)
        eval_cloud, _ = cluster_dataset(
            eval_draws, p.input_dim, cfg.cluster_separation, cfg.noise_scale, rng
        )
        eval_points = np.vstack([eval_cloud.features, data.features])
        full_probs = predict_probs(full_model, eval_points)
        rows = []
        for j, size in enumerate(sizes):
            index = i * len(sizes) + j
            core = select_coreset(data, size, cfg.coreset_strategy, rng)
            detail = "single-class subset; guarantee vacuous" if core.is_single_class() else ""
            try:
                local_model = train_logistic(core, cfg.train)
            except DivergenceError as exc:
                rows.append(TrialResult(index, float("inf"), True, size, str(exc)))
                continue
            local_probs = mix_probability(predict_probs(local_model, eval_points), cfg.eta)
            sup = float(np.max(np.abs(local_probs - full_probs)))
            rows.append(TrialResult(index, sup, sup > threshold, size, detail))
        return rows

    nested = _run_trials(cfg.trials, one_trial)
    rows = [row for trial_rows in nested for row in trial_rows]
    medians = _median_by_sweep(rows)
    extras = {
        "sizes": list(sizes),
        "median_sup_error_by_size": {str(k): v for k, v in medians.items()},
        "failure_threshold": threshold,
        "strategy": cfg.coreset_strategy,
        "eval_points": eval_draws + cfg.dataset_size,
    }
    return _finalize(cfg, rows, extras)


def run_knn_experiment(cfg: ExperimentConfig) -> BoundReport:
    """Per-query local models on k nearest neighbors, compared to the planted
    model; sweeps k and fits the error-decay slope."""
    _require_kind(cfg, "knn")
    p = cfg.params
    ks = cfg.knn_sizes or (knn_context_size(p),)
    if max(ks) > cfg.dataset_size:
        raise ParameterError(f"knn sizes {ks} exceed dataset_size {cfg.dataset_size}")
    threshold = p.epsilon + 2.0 * cfg.eta.eta
    queries_per_trial = cfg.resolved_eval_points()

    def one_trial(i: int) -> list[TrialResult]:
        rng = trial_rng(cfg.seed, i)
        data, planted = planted_linear_dataset(
            cfg.dataset_size, p.input_dim, cfg.planted_norm, rng
        )
        queries = rng.standard_normal((queries_per_trial, p.input_dim))
        truth = predict_probs(planted, queries)
        rows = []
        for j, k in enumerate(ks):
            index = i * len(ks) + j
            degenerate = 0
            worst = 0.0
            for q in range(queries_per_trial):
                neighborhood = knn_select(data, queries[q], k)
                if neighborhood.is_single_class():
                    degenerate += 1
                local_model = train_logistic(neighborhood, cfg.train)
                prob = mix_probability(predict_prob(local_model, queries[q]), cfg.eta)
                worst = max(worst, abs(prob - truth[q]))
            detail = f"{degenerate} single-class neighborhoods" if degenerate else ""
            rows.append(TrialResult(index, worst, worst > threshold, k, detail))
        return rows

    nested = _run_trials(cfg.trials, one_trial)
    rows = [row for trial_rows in nested for row in trial_rows]
    medians = _median_by_sweep(rows)
    extras = {
        "k_values": list(ks),
        "median_sup_error_by_k": {str(k): v for k, v in medians.items()},
        "log_log_slope": _sweep_slope(medians),
        "failure_threshold": threshold,
        "queries_per_trial": queries_per_trial,
    }
    return _finalize(cfg, rows, extras)


def run_subset_penalty_experiment(cfg: ExperimentConfig) -> BoundReport:
    """Single-context estimation error versus sample count: sweeps a size grid
    and fits the log-log decay slope (about -1/2 for i.i.d. sampling)."""
    _require_kind(cfg, "subset_penalty")
    p = cfg.params
    sizes = tuple(sorted(cfg.subset_sizes))
    vocab = Vocabulary.of_size(p.vocab_size)
    context = Context(0)

    def one_trial(i: int) -> list[TrialResult]:
        rng = trial_rng(cfg.seed, i)
        truth = random_distribution(p.vocab_size, cfg.concentration, rng)
        draws = sample_tokens(truth, max(sizes), rng)
        rows = []
        for j, n in enumerate(sizes):
            index = i * len(sizes) + j
            prompt = IclPromptSamples(per_context={context.id: draws[:n]})
            estimate = icl_textgen_dist(prompt, context, vocab, cfg.eta)
            err = l1_distance(estimate, truth)
            allowed = subset_penalty(n, p.constant) + 2.0 * cfg.eta.eta
            rows.append(TrialResult(index, err, err > allowed, n))
        return rows

    nested = _run_trials(cfg.trials, one_trial)
    rows = [row for trial_rows in nested for row in trial_rows]
    medians = _median_by_sweep(rows)
    extras = {
        "subset_sizes": list(sizes),
        "median_l1_by_size": {str(k): v for k, v in medians.items()},
        "log_log_slope": _sweep_slope(medians),
        "penalty_constant": p.constant,
    }
    return _finalize(cfg, rows, extras)


_RUNNERS = {
    "textgen": run_textgen_experiment,
    "bounded_textgen": run_bounded_textgen_experiment,
    "coreset": run_coreset_experiment,
    "knn": run_knn_experiment,
    "subset_penalty": run_subset_penalty_experiment,
}


def run_experiment(cfg: ExperimentConfig) -> BoundReport:
    """Dispatch to the runner matching ``cfg.kind``."""
    return _RUNNERS[cfg.kind](cfg)


def _require_kind(cfg: ExperimentConfig, kind: str):
    if cfg.kind != kind:
        raise ParameterError(f"config kind is {cfg.kind!r}, expected {kind!r}")
