"""Step-constrained decoding over the path model.

A prefix trie over the whitespace tokens of every library step pins the
surface forms a decoder may emit: token by token, the only legal
continuations are edges of the trie, and a step boundary is only legal at
a node where a library step actually ends. Scoring happens at step
granularity through the path model, so beam items carry step id
sequences and their accumulated log probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import StepLibrary
from .errors import EmptyLibrary, NoCompletion
from .pathmodel import END, PathModel, next_step_distribution

END_TOKEN = "<eos>"


@dataclass
class DecodeConfig:
    beam_width: int = 40
    max_steps: int | None = None  # None: twice the library size
    separator: str = "<->"
    keep_duplicates: bool = False

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be at least 1")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")


@dataclass
class TrieNode:
    children: dict[str, "TrieNode"] = field(default_factory=dict)
    step_id: int | None = None  # set on nodes where a full step ends


class PrefixTrie:
    """Token trie over the normalized texts of a step library."""

    def __init__(self, library: StepLibrary):
        if not library.steps:
            raise EmptyLibrary("cannot build a trie over an empty library")
        self.library = library
        self.root = TrieNode()
        self._token_paths: dict[int, tuple[str, ...]] = {}
        for step in library.steps:
            tokens = tuple(step.normalized_text.split())
            node = self.root
            for token in tokens:
                node = node.children.setdefault(token, TrieNode())
            if node.step_id is not None:
                raise ValueError(
                    f"steps {node.step_id} and {step.step_id} share the token "
                    f"sequence {' '.join(tokens)!r}"
                )
            node.step_id = step.step_id
            self._token_paths[step.step_id] = tokens

    def token_path(self, step_id: int) -> tuple[str, ...]:
        return self._token_paths[step_id]

    def lookup(self, tokens) -> TrieNode | None:
        node = self.root
        for token in tokens:
            node = node.children.get(token)
            if node is None:
                return None
        return node

    def allowed_tokens(self, tokens) -> set[str]:
        """Legal next tokens after a token prefix.

        Includes END_TOKEN when the prefix is exactly a full step, which
        is the explicit end marker separating a step from any longer step
        sharing its tokens as a prefix.
        """
        node = self.lookup(tokens)
        if node is None:
            return set()
        allowed = set(node.children)
        if node.step_id is not None:
            allowed.add(END_TOKEN)
        return allowed


def build_prefix_trie(library: StepLibrary) -> PrefixTrie:
    return PrefixTrie(library)


def constrained_beam_search(
    model: PathModel, trie: PrefixTrie, cfg: DecodeConfig | None = None
) -> list[tuple[list[int], float]]:
    """Decode the most likely step paths, banning repeated steps.

    Returns up to beam_width completed paths sorted by log probability
    (descending, ties by sequence). Each path ends when the model emits
    END; its score is the raw accumulated log probability, the negation
    of sequence_nll for that path. Raises NoCompletion when nothing
    reaches END within max_steps.
    """
    cfg = cfg or DecodeConfig()
    if trie.library.texts() != model.library.texts():
        raise ValueError("trie and model were built over different libraries")
    max_steps = cfg.max_steps if cfg.max_steps is not None else 2 * len(model.library.steps)

    active: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
    finished: list[tuple[tuple[int, ...], float]] = []
    for depth in range(max_steps + 1):
        if not active:
            break
        expanded: list[tuple[tuple[int, ...], float]] = []
        for seq, logprob in active:
            dist = next_step_distribution(model, list(seq))
            for nxt in sorted(dist):
                prob = dist[nxt]
                if prob <= 0.0:
                    continue
                if nxt == END:
                    finished.append((seq, logprob + math.log(prob)))
                elif nxt not in seq and depth < max_steps:
                    expanded.append((seq + (nxt,), logprob + math.log(prob)))
        expanded.sort(key=lambda item: (-item[1], item[0]))
        active = expanded[: cfg.beam_width]

    if not finished:
        raise NoCompletion(f"no path reached END within {max_steps} steps")
    if not cfg.keep_duplicates:
        best: dict[tuple[int, ...], float] = {}
        for seq, logprob in finished:
            if seq not in best or logprob > best[seq]:
                best[seq] = logprob
        finished = list(best.items())
    finished.sort(key=lambda item: (-item[1], item[0]))
    return [(list(seq), logprob) for seq, logprob in finished[: cfg.beam_width]]


def render_path(library: StepLibrary, step_ids, separator: str = "<->") -> str:
    """Human-readable surface form: each step text followed by the separator."""
    parts = [library.steps[step_id].normalized_text + " " + separator for step_id in step_ids]
    return " ".join(parts)


def decoded_to_rows(task_id: str, results) -> list[dict]:
    return [
        {"task_id": task_id, "steps": list(steps), "logprob": float(logprob)}
        for steps, logprob in results
    ]


def rows_to_decoded(rows) -> list[tuple[list[int], float]]:
    return [([int(s) for s in row["steps"]], float(row["logprob"])) for row in rows]
