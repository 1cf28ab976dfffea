"""Smoothed Markov model over step sequences.

Contexts are padded with START and every sequence is closed with END, so
the model scores complete paths. Unseen higher-order contexts back off to
lower orders; additive smoothing keeps every next step possible when
smoothing_lambda > 0. With smoothing_lambda == 0 the model is the plain
empirical estimator and unseen transitions have probability zero.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Sequence

from .corpus import StepLibrary
from .errors import EmptyCorpus, UnknownStep
from .jsonio import read_json, write_json

START = -1
END = -2


@dataclass
class PathModelConfig:
    order: int = 2
    smoothing_lambda: float = 0.1

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        if self.smoothing_lambda < 0:
            raise ValueError("smoothing_lambda must be non-negative")


@dataclass
class PathModel:
    library: StepLibrary
    config: PathModelConfig
    counts: dict[tuple[int, ...], Counter]
    totals: dict[tuple[int, ...], int]

    @property
    def vocabulary_size(self) -> int:
        # Next-token support: every library step plus END.
        return len(self.library.steps) + 1


def train_path_model(
    sequences, library: StepLibrary, cfg: PathModelConfig | None = None
) -> PathModel:
    """Count transitions of every order from 1 up to cfg.order."""
    cfg = cfg or PathModelConfig()
    sequences = list(sequences)
    if not sequences:
        raise EmptyCorpus("path model training needs at least one sequence")
    counts: dict[tuple[int, ...], Counter] = defaultdict(Counter)
    for seq in sequences:
        step_ids = list(seq.step_ids)
        _check_steps(step_ids, library)
        tokens = [START] * cfg.order + step_ids + [END]
        for pos in range(cfg.order, len(tokens)):
            nxt = tokens[pos]
            for k in range(1, cfg.order + 1):
                counts[tuple(tokens[pos - k : pos])][nxt] += 1
    totals = {ctx: sum(counter.values()) for ctx, counter in counts.items()}
    return PathModel(library, cfg, dict(counts), totals)


def next_step_distribution(model: PathModel, prefix: Sequence[int]) -> dict[int, float]:
    """Probability of every next step (and END) given a path prefix.

    The returned dict covers all library step ids plus END and sums to 1.
    """
    prefix = list(prefix)
    _check_steps(prefix, model.library)
    ctx = _effective_context(model, prefix)
    support = [step.step_id for step in model.library.steps] + [END]
    return {nxt: _transition_prob(model, ctx, nxt) for nxt in support}


def sequence_nll(model: PathModel, step_ids: Sequence[int]) -> float:
    """Negative log likelihood of a complete path, including the END move.

    Returns math.inf when an unsmoothed model assigns probability zero.
    """
    step_ids = list(step_ids)
    _check_steps(step_ids, model.library)
    nll = 0.0
    prefix: list[int] = []
    for nxt in step_ids + [END]:
        prob = _transition_prob(model, _effective_context(model, prefix), nxt)
        if prob <= 0.0:
            return math.inf
        nll -= math.log(prob)
        if nxt != END:
            prefix.append(nxt)
    return nll


def _check_steps(step_ids: Sequence[int], library: StepLibrary) -> None:
    for step_id in step_ids:
        if not library.has(step_id):
            raise UnknownStep(f"step id {step_id} not in library for task {library.task_id!r}")


def _effective_context(model: PathModel, prefix: list[int]) -> tuple[int, ...]:
    # Highest order whose context was observed; order 1 is the floor even
    # when unseen, where smoothing alone decides the distribution.
    tokens = [START] * model.config.order + prefix
    for k in range(model.config.order, 1, -1):
        ctx = tuple(tokens[len(tokens) - k :])
        if model.totals.get(ctx, 0) > 0:
            return ctx
    return tuple(tokens[len(tokens) - 1 :])


def _transition_prob(model: PathModel, ctx: tuple[int, ...], nxt: int) -> float:
    lam = model.config.smoothing_lambda
    total = model.totals.get(ctx, 0)
    counter = model.counts.get(ctx)
    count = counter[nxt] if counter is not None else 0
    if lam == 0.0:
        if total == 0:
            return 1.0 / model.vocabulary_size
        return count / total
    return (count + lam) / (total + lam * model.vocabulary_size)


def model_to_json(model: PathModel) -> dict:
    contexts = []
    for ctx in sorted(model.counts):
        counter = model.counts[ctx]
        counts = {
            ("END" if nxt == END else str(nxt)): counter[nxt] for nxt in sorted(counter)
        }
        contexts.append({"ctx": list(ctx), "counts": counts})
    return {
        "order": model.config.order,
        "lambda": model.config.smoothing_lambda,
        "contexts": contexts,
    }


def model_from_json(data: dict, library: StepLibrary) -> PathModel:
    cfg = PathModelConfig(order=int(data["order"]), smoothing_lambda=float(data["lambda"]))
    counts: dict[tuple[int, ...], Counter] = {}
    for entry in data["contexts"]:
        ctx = tuple(int(t) for t in entry["ctx"])
        counter: Counter = Counter()
        for key, value in entry["counts"].items():
            counter[END if key == "END" else int(key)] = int(value)
        counts[ctx] = counter
    totals = {ctx: sum(counter.values()) for ctx, counter in counts.items()}
    return PathModel(library, cfg, counts, totals)


def save_model(model: PathModel, path) -> None:
    write_json(model_to_json(model), path)


def load_model(path, library: StepLibrary) -> PathModel:
    return model_from_json(read_json(path), library)
