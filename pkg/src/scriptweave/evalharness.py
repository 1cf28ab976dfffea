"""Next-step prediction and sequence completion evaluation.

Sequences are split at the video level into train and test; every proper
prefix of a test sequence becomes an evaluation example. Identical
prefixes from different videos merge into one example whose gold sets
union, so a prediction is correct when it matches any observed
continuation.

Acc@3 is a hit rate: it counts an example as correct when any of the top
three predictions lands in the gold set. Completion distances are
unit-cost edit distances over step ids, taken against the nearest gold
completion and normalized by the longer of the two sequences.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import StepLibrary, levenshtein
from .errors import LengthMismatch, MissingLinearData, TooFewSequences
from .grounding import GroundedSequence
from .pathmodel import END, PathModel, next_step_distribution


@dataclass
class EvalExample:
    prefix: tuple[int, ...]
    gold_next: set[int] = field(default_factory=set)
    gold_completions: set[tuple[int, ...]] = field(default_factory=set)


@dataclass
class EvalSplit:
    train: list[GroundedSequence]
    test_examples: list[EvalExample]


def build_eval_splits(
    sequences: Sequence[GroundedSequence],
    train_fraction: float = 0.40,
    rng_seed: int = 0,
) -> EvalSplit:
    """Shuffle sequences, split by video, and expand test prefixes.

    The train side receives floor(train_fraction * n) sequences, clamped
    so both sides stay non-empty. Test examples are ordered by prefix for
    reproducibility.
    """
    sequences = list(sequences)
    if len(sequences) < 2:
        raise TooFewSequences("need at least two sequences to split")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be strictly between 0 and 1")
    order = list(sequences)
    random.Random(rng_seed).shuffle(order)
    n_train = min(max(int(len(order) * train_fraction), 1), len(order) - 1)
    train, test = order[:n_train], order[n_train:]

    examples: dict[tuple[int, ...], EvalExample] = {}
    for seq in test:
        ids = seq.step_ids
        for cut in range(1, len(ids)):
            prefix = tuple(ids[:cut])
            example = examples.setdefault(prefix, EvalExample(prefix))
            example.gold_next.add(ids[cut])
            example.gold_completions.add(tuple(ids[cut:]))
    ordered = [examples[prefix] for prefix in sorted(examples)]
    return EvalSplit(train, ordered)


def next_step_metrics(predictions: Sequence[Sequence[int]], split: EvalSplit) -> dict[str, float]:
    """Macro-averaged Acc@1, Acc@3 (hit rate), Prec@3, Rec@3, F1@3.

    predictions[i] is a ranked list of step ids for test example i.
    """
    if len(predictions) != len(split.test_examples):
        raise LengthMismatch(
            f"{len(predictions)} predictions for {len(split.test_examples)} examples"
        )
    if not predictions:
        return {"Acc@1": 0.0, "Acc@3": 0.0, "Prec@3": 0.0, "Rec@3": 0.0, "F1@3": 0.0}
    acc1 = acc3 = prec3 = rec3 = f13 = 0.0
    for ranked, example in zip(predictions, split.test_examples):
        gold = example.gold_next
        top3 = set(ranked[:3])
        hits = len(top3 & gold)
        acc1 += 1.0 if ranked and ranked[0] in gold else 0.0
        acc3 += 1.0 if hits else 0.0
        precision = hits / 3
        recall = hits / len(gold)
        prec3 += precision
        rec3 += recall
        if precision + recall > 0:
            f13 += 2 * precision * recall / (precision + recall)
    n = len(predictions)
    return {
        "Acc@1": acc1 / n,
        "Acc@3": acc3 / n,
        "Prec@3": prec3 / n,
        "Rec@3": rec3 / n,
        "F1@3": f13 / n,
    }


def completion_metrics(predictions: Sequence[Sequence[int]], split: EvalSplit) -> dict[str, float]:
    """Exact-match rate and edit distances against the nearest gold completion."""
    if len(predictions) != len(split.test_examples):
        raise LengthMismatch(
            f"{len(predictions)} predictions for {len(split.test_examples)} examples"
        )
    if not predictions:
        return {"Acc@1": 0.0, "EditDist": 0.0, "NormalizedEditDist": 0.0}
    acc = dist_sum = norm_sum = 0.0
    for predicted, example in zip(predictions, split.test_examples):
        predicted = list(predicted)
        best: tuple[int, float] | None = None
        for gold in sorted(example.gold_completions):
            distance = levenshtein(predicted, list(gold))
            longest = max(len(predicted), len(gold))
            normalized = distance / longest if longest else 0.0
            if best is None or (distance, normalized) < best:
                best = (distance, normalized)
        assert best is not None  # gold_completions is never empty
        acc += 1.0 if best[0] == 0 else 0.0
        dist_sum += best[0]
        norm_sum += best[1]
    n = len(predictions)
    return {"Acc@1": acc / n, "EditDist": dist_sum / n, "NormalizedEditDist": norm_sum / n}


def baseline_predict(
    kind: str,
    split: EvalSplit,
    library: StepLibrary,
    linear_sequences: Sequence[Sequence[int]] | None = None,
    rng_seed: int = 0,
) -> list[list[int]]:
    """Ranked next-step predictions for the random or linear baseline.

    random: a uniform shuffle of the steps not in the prefix. linear:
    the continuation read off the best-matching source document order
    containing the prefix tail (skipping already-used steps), padded with
    the remaining steps in random order; falls back to random when no
    document contains the tail.
    """
    rng = random.Random(rng_seed)
    all_ids = library.step_ids()
    if kind not in ("random", "linear"):
        raise ValueError(f"unknown baseline {kind!r}")
    if kind == "linear" and linear_sequences is None:
        raise MissingLinearData("linear baseline needs source document step orders")

    predictions = []
    for example in split.test_examples:
        used = set(example.prefix)
        remaining = [step_id for step_id in all_ids if step_id not in used]
        if kind == "random":
            ranked = remaining[:]
            rng.shuffle(ranked)
        else:
            ranked = _linear_ranking(example.prefix, remaining, linear_sequences, rng)
        predictions.append(ranked)
    return predictions


def _linear_ranking(prefix, remaining, docs, rng: random.Random) -> list[int]:
    tail = prefix[-1]
    used = set(prefix)
    for doc in docs:
        doc = list(doc)
        if tail not in doc:
            continue
        continuation = [s for s in doc[doc.index(tail) + 1 :] if s not in used]
        if continuation:
            rest = [s for s in remaining if s not in continuation]
            rng.shuffle(rest)
            return continuation + rest
    fallback = list(remaining)
    rng.shuffle(fallback)
    return fallback


def baseline_complete(
    kind: str,
    split: EvalSplit,
    library: StepLibrary,
    linear_sequences: Sequence[Sequence[int]] | None = None,
    rng_seed: int = 0,
) -> list[list[int]]:
    """Completion predictions for the baselines.

    random: a random-length random continuation over unused steps.
    linear: the rest of the best-matching document order, falling back
    to random.
    """
    rng = random.Random(rng_seed)
    all_ids = library.step_ids()
    if kind not in ("random", "linear"):
        raise ValueError(f"unknown baseline {kind!r}")
    if kind == "linear" and linear_sequences is None:
        raise MissingLinearData("linear baseline needs source document step orders")

    predictions = []
    for example in split.test_examples:
        used = set(example.prefix)
        remaining = [step_id for step_id in all_ids if step_id not in used]
        if kind == "linear":
            completion = _linear_completion(example.prefix, remaining, linear_sequences)
            if completion is not None:
                predictions.append(completion)
                continue
        shuffled = remaining[:]
        rng.shuffle(shuffled)
        length = rng.randint(1, len(shuffled)) if shuffled else 0
        predictions.append(shuffled[:length])
    return predictions


def _linear_completion(prefix, remaining, docs) -> list[int] | None:
    tail = prefix[-1]
    used = set(prefix)
    for doc in docs:
        doc = list(doc)
        if tail not in doc:
            continue
        continuation = [s for s in doc[doc.index(tail) + 1 :] if s not in used]
        if continuation:
            return continuation
    return None


def model_predict_next(model: PathModel, split: EvalSplit) -> list[list[int]]:
    """Rank unused library steps by model probability for each example."""
    predictions = []
    for example in split.test_examples:
        dist = next_step_distribution(model, list(example.prefix))
        used = set(example.prefix)
        candidates = [step_id for step_id in dist if step_id != END and step_id not in used]
        candidates.sort(key=lambda step_id: (-dist[step_id], step_id))
        predictions.append(candidates)
    return predictions


def greedy_completion(
    model: PathModel, prefix: Sequence[int] = (), max_steps: int | None = None
) -> list[int]:
    """Most-likely continuation of a prefix until END, banning repeats.

    Ties go to END first, then the lowest step id, so the result is
    deterministic. Returns only the continuation, without the prefix.
    """
    cap = max_steps if max_steps is not None else 2 * len(model.library.steps)
    sequence = list(prefix)
    completion: list[int] = []
    for _ in range(cap):
        dist = next_step_distribution(model, sequence)
        choices = [
            (step_id, prob)
            for step_id, prob in dist.items()
            if step_id == END or step_id not in sequence
        ]
        choices.sort(key=lambda item: (-item[1], item[0]))
        nxt = choices[0][0]
        if nxt == END:
            break
        sequence.append(nxt)
        completion.append(nxt)
    return completion


def model_complete(
    model: PathModel, split: EvalSplit, max_steps: int | None = None
) -> list[list[int]]:
    """Greedy most-likely continuation for every test example."""
    return [greedy_completion(model, example.prefix, max_steps) for example in split.test_examples]


def metrics_table(rows: dict[str, dict[str, dict[str, float]]]) -> str:
    """Fixed-width report with one section per metric family."""

    def section(title: str, family: str, columns: list[str]) -> list[str]:
        widths = [max(len(c) + 2, 10) for c in columns]
        header = f"{'system':<12}" + "".join(f"{c:>{w}}" for c, w in zip(columns, widths))
        lines = [title, header, "-" * len(header)]
        for system in sorted(rows):
            values = rows[system][family]
            lines.append(
                f"{system:<12}" + "".join(f"{values[c]:>{w}.3f}" for c, w in zip(columns, widths))
            )
        return lines

    lines = section("next step", "next_step", ["Acc@1", "Acc@3", "Prec@3", "Rec@3", "F1@3"])
    lines.append("")
    lines += section("completion", "completion", ["Acc@1", "EditDist", "NormalizedEditDist"])
    return "\n".join(lines) + "\n"
