"""Command-line pipeline driver.

Each subcommand reads its inputs and the artifacts of earlier stages
from a shared output directory and writes its own artifacts there:

    library   library.json
    ground    library.grounded.json, grounded.jsonl
    stats     stats.json
    train     pathmodel.json
    losses    losses.json
    decode    decoded.jsonl
    graph     graph.json, graph.dot
    eval      metrics.json, metrics.txt

Settings merge with increasing precedence: built-in defaults, then a
``key = value`` config file (values parsed as JSON, bare words kept as
strings, full-line # comments allowed), then SCRIPTWEAVE_* environment
variables, then command-line flags. A seed is required; given the same
inputs, settings, and seed every artifact is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from . import corpus as corpuslib
from .contrastive import (
    ContrastiveBatch,
    LossConfig,
    NegativeGenConfig,
    curriculum_mixture,
    draw_negative_method,
    generate_negative,
    path_level_losses,
    sequence_representation,
)
from .corpus import corpus_statistics, load_candidate_docs, load_raw_records, load_tasks
from .decoder import DecodeConfig, build_prefix_trie, constrained_beam_search, decoded_to_rows
from .errors import BadConfig, DegenerateInput, EmptySequence, ScriptweaveError
from .evalharness import (
    baseline_complete,
    baseline_predict,
    build_eval_splits,
    completion_metrics,
    greedy_completion,
    metrics_table,
    model_complete,
    model_predict_next,
    next_step_metrics,
)
from .graphgen import classify_relations, export_graph, induce_graph, save_graph
from .grounding import (
    GroundingConfig,
    ground_asr_sequence,
    ground_labelled_sequence,
    load_grounded,
    match_task_documents,
    prune_unused_steps,
    save_grounded,
    video_passes_task_filter,
)
from .jsonio import read_jsonl, write_json, write_jsonl
from .pathmodel import PathModelConfig, load_model, save_model, sequence_nll, train_path_model
from .similarity import HttpEmbeddingProvider, TfidfSimilarity

ENV_PREFIX = "SCRIPTWEAVE_"

LIBRARY_FILE = "library.json"
GROUNDED_LIBRARY_FILE = "library.grounded.json"
GROUNDED_FILE = "grounded.jsonl"
STATS_FILE = "stats.json"
MODEL_FILE = "pathmodel.json"
LOSSES_FILE = "losses.json"
DECODED_FILE = "decoded.jsonl"
GRAPH_JSON_FILE = "graph.json"
GRAPH_DOT_FILE = "graph.dot"
METRICS_JSON_FILE = "metrics.json"
METRICS_TEXT_FILE = "metrics.txt"


@dataclass
class PipelineConfig:
    """Every tunable the pipeline understands, with its default."""

    tasks_path: str | None = None
    docs_path: str | None = None
    corpus_path: str | None = None
    out_dir: str = "out"
    seed: int | None = None
    task: str | None = None
    embedding_url: str | None = None
    embedding_timeout: float = 10.0
    # step library / grounding
    top_m_docs: int = 10
    keyword_threshold: float = 0.85
    relaxed_keyword_threshold: float = 0.75
    k1: float = 0.35
    k2: float = 0.75
    k3: float = 0.40
    asr_min_words: int = 10
    stop_words: tuple[str, ...] = ("subscribe", "channel", "sponsor")
    prune_unused: bool = True
    # corpus statistics
    frequency_threshold: int = 10
    # path model
    order: int = 2
    smoothing_lambda: float = 0.1
    # losses
    epoch: int = 0
    num_negatives: int = 3
    max_shuffle_attempts: int = 100
    temperature: float = 0.1
    alpha: float = 1.0
    # decoding / graph
    beam_width: int = 40
    max_steps: int | None = None
    separator: str = "<->"
    prune_threshold: float = 0.175
    # evaluation
    train_fraction: float = 0.40

    def grounding(self) -> GroundingConfig:
        return GroundingConfig(
            top_m_docs=self.top_m_docs,
            keyword_threshold=self.keyword_threshold,
            relaxed_keyword_threshold=self.relaxed_keyword_threshold,
            k1=self.k1,
            k2=self.k2,
            k3=self.k3,
            asr_min_words=self.asr_min_words,
            stop_words=tuple(self.stop_words),
        )

    def pathmodel(self) -> PathModelConfig:
        return PathModelConfig(order=self.order, smoothing_lambda=self.smoothing_lambda)

    def decode(self) -> DecodeConfig:
        return DecodeConfig(
            beam_width=self.beam_width, max_steps=self.max_steps, separator=self.separator
        )

    def negatives(self) -> NegativeGenConfig:
        return NegativeGenConfig(
            num_negatives=self.num_negatives,
            max_shuffle_attempts=self.max_shuffle_attempts,
            rng_seed=self.seed if self.seed is not None else 0,
        )

    def loss(self) -> LossConfig:
        return LossConfig(temperature=self.temperature, alpha=self.alpha)


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}
_INT_FIELDS = {
    "seed",
    "top_m_docs",
    "asr_min_words",
    "frequency_threshold",
    "order",
    "epoch",
    "num_negatives",
    "max_shuffle_attempts",
    "beam_width",
    "max_steps",
}
_FLOAT_FIELDS = {
    "embedding_timeout",
    "keyword_threshold",
    "relaxed_keyword_threshold",
    "k1",
    "k2",
    "k3",
    "smoothing_lambda",
    "temperature",
    "alpha",
    "prune_threshold",
    "train_fraction",
}
_BOOL_FIELDS = {"prune_unused"}
_LIST_FIELDS = {"stop_words"}


def _parse_setting(raw: str):
    """JSON first; anything that does not parse stays a plain string."""
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _coerce(key: str, value):
    if key not in _FIELDS:
        raise BadConfig(f"unknown setting {key!r}")
    if value is None:
        return None
    if key in _BOOL_FIELDS:
        if isinstance(value, bool):
            return value
        raise BadConfig(f"setting {key!r} must be true or false, got {value!r}")
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise BadConfig(f"setting {key!r} must be an integer, got {value!r}")
        return value
    if key in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BadConfig(f"setting {key!r} must be a number, got {value!r}")
        return float(value)
    if key in _LIST_FIELDS:
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
            raise BadConfig(f"setting {key!r} must be a list of strings, got {value!r}")
        return tuple(value)
    if not isinstance(value, str):
        raise BadConfig(f"setting {key!r} must be a string, got {value!r}")
    return value


def read_config_file(path: str | Path) -> dict:
    """Parse a ``key = value`` settings file into coerced values."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise BadConfig(f"config file not found: {path}") from None
    settings = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise BadConfig(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip().replace("-", "_")
        if not key:
            raise BadConfig(f"{path}:{lineno}: empty setting name")
        settings[key] = _coerce(key, _parse_setting(raw))
    return settings


def _env_settings(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    settings = {}
    for key in _FIELDS:
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            settings[key] = _coerce(key, _parse_setting(raw))
    return settings


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Merge defaults, config file, environment, and flags (in that order)."""
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    merged.update(_env_settings())
    for key in _FIELDS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = _coerce(key, flag)
    return PipelineConfig(**merged)


def _require(cfg: PipelineConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise BadConfig(f"setting {name!r} is required (flag, config file, or env)")


def _out_path(cfg: PipelineConfig, name: str) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _select_task(cfg: PipelineConfig) -> corpuslib.TaskSpec:
    _require(cfg, "tasks_path")
    tasks = load_tasks(cfg.tasks_path)
    if not tasks:
        raise BadConfig(f"no tasks in {cfg.tasks_path}")
    if cfg.task is None:
        if len(tasks) == 1:
            return tasks[0]
        raise BadConfig("multiple tasks in the task file; pick one with --task")
    for task in tasks:
        if task.task_id == cfg.task:
            return task
    raise BadConfig(f"task {cfg.task!r} not found in {cfg.tasks_path}")


def _provider(cfg: PipelineConfig, corpus_texts):
    if cfg.embedding_url:
        return HttpEmbeddingProvider(cfg.embedding_url, timeout=cfg.embedding_timeout)
    return TfidfSimilarity(corpus_texts)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_library(cfg: PipelineConfig) -> int:
    _require(cfg, "seed", "docs_path")
    task = _select_task(cfg)
    docs = load_candidate_docs(cfg.docs_path)
    provider = _provider(cfg, [title for title, _ in docs] + [task.task_name])
    ranked = match_task_documents(task, docs, provider, cfg.grounding())
    library = corpuslib.build_step_library(task, ranked, top_m_docs=cfg.top_m_docs)
    path = _out_path(cfg, LIBRARY_FILE)
    corpuslib.save_library(library, path)
    print(f"wrote {path} ({len(library)} steps from {len(ranked)} documents)")
    return 0


def cmd_ground(cfg: PipelineConfig) -> int:
    _require(cfg, "seed", "corpus_path")
    task = _select_task(cfg)
    library = corpuslib.load_library(_out_path(cfg, LIBRARY_FILE))
    records = [r for r in load_raw_records(cfg.corpus_path) if r.task_id == task.task_id]
    gcfg = cfg.grounding()

    corpus_texts = library.texts() + [task.task_name]
    for record in records:
        if record.title:
            corpus_texts.append(record.title)
        corpus_texts.extend(item.text for item in record.items)
    provider = _provider(cfg, corpus_texts)

    grounded = []
    skipped = 0
    for record in records:
        if record.kind == "asr" and record.title is not None:
            if not video_passes_task_filter(record.title, task, provider, gcfg):
                skipped += 1
                continue
        try:
            if record.kind == "labelled":
                grounded.append(ground_labelled_sequence(record, library, provider, gcfg))
            else:
                grounded.append(ground_asr_sequence(record, library, provider, gcfg))
        except EmptySequence:
            skipped += 1

    if cfg.prune_unused:
        library, grounded = prune_unused_steps(library, grounded)
    lib_path = _out_path(cfg, GROUNDED_LIBRARY_FILE)
    corpuslib.save_library(library, lib_path)
    seq_path = _out_path(cfg, GROUNDED_FILE)
    save_grounded(grounded, seq_path)
    print(f"wrote {lib_path} ({len(library)} steps)")
    print(f"wrote {seq_path} ({len(grounded)} sequences, {skipped} videos skipped)")
    return 0


def cmd_stats(cfg: PipelineConfig) -> int:
    _require(cfg, "seed")
    sequences = load_grounded(_out_path(cfg, GROUNDED_FILE))
    stats = corpus_statistics(sequences, frequency_threshold=cfg.frequency_threshold)
    path = _out_path(cfg, STATS_FILE)
    write_json(corpuslib.stats_to_json(stats), path)
    print(f"wrote {path}")
    return 0


def cmd_train(cfg: PipelineConfig) -> int:
    _require(cfg, "seed")
    library = corpuslib.load_library(_out_path(cfg, GROUNDED_LIBRARY_FILE))
    sequences = load_grounded(_out_path(cfg, GROUNDED_FILE))
    model = train_path_model(sequences, library, cfg.pathmodel())
    path = _out_path(cfg, MODEL_FILE)
    save_model(model, path)
    print(f"wrote {path} ({len(model.counts)} contexts)")
    return 0


def cmd_losses(cfg: PipelineConfig) -> int:
    _require(cfg, "seed")
    library = corpuslib.load_library(_out_path(cfg, GROUNDED_LIBRARY_FILE))
    sequences = load_grounded(_out_path(cfg, GROUNDED_FILE))
    model = load_model(_out_path(cfg, MODEL_FILE), library)
    provider = _provider(cfg, library.texts())
    mixture = curriculum_mixture(cfg.epoch)
    rng = random.Random(f"{cfg.seed}:losses")
    valid_set = {tuple(seq.step_ids) for seq in sequences}
    ncfg = cfg.negatives()
    lcfg = cfg.loss()

    generated = greedy_completion(model)
    rows = []
    for seq in sequences:
        nll = sequence_nll(model, seq.step_ids)
        z_p = sequence_representation(seq.step_ids, library, provider)
        z_g = (
            sequence_representation(generated, library, provider) if generated else z_p
        )
        methods = []
        z_negatives = []
        for _ in range(cfg.num_negatives):
            method = draw_negative_method(mixture, rng)
            try:
                negative = generate_negative(seq.step_ids, method, library, valid_set, ncfg, rng)
            except DegenerateInput:
                continue
            methods.append(method)
            z_negatives.append(sequence_representation(negative, library, provider))
        batch = ContrastiveBatch(z_g, z_p, z_negatives)
        contrastive, _, total = path_level_losses(batch, nll, lcfg)
        rows.append(
            {
                "video_id": seq.video_id,
                "nll": nll,
                "contrastive": contrastive,
                "total": total,
                "methods": methods,
            }
        )

    n = len(rows)
    payload = {
        "epoch": cfg.epoch,
        "mixture": {
            "resample": mixture.resample,
            "shuffle": mixture.shuffle,
            "cutswap": mixture.cutswap,
        },
        "alpha": cfg.alpha,
        "temperature": cfg.temperature,
        "sequences": rows,
        "mean_nll": sum(r["nll"] for r in rows) / n if n else 0.0,
        "mean_contrastive": sum(r["contrastive"] for r in rows) / n if n else 0.0,
        "mean_total": sum(r["total"] for r in rows) / n if n else 0.0,
    }
    path = _out_path(cfg, LOSSES_FILE)
    write_json(payload, path)
    print(f"wrote {path} ({n} sequences, epoch {cfg.epoch})")
    return 0


def cmd_decode(cfg: PipelineConfig) -> int:
    _require(cfg, "seed")
    library = corpuslib.load_library(_out_path(cfg, GROUNDED_LIBRARY_FILE))
    model = load_model(_out_path(cfg, MODEL_FILE), library)
    trie = build_prefix_trie(library)
    results = constrained_beam_search(model, trie, cfg.decode())
    path = _out_path(cfg, DECODED_FILE)
    write_jsonl(decoded_to_rows(library.task_id, results), path)
    print(f"wrote {path} ({len(results)} paths)")
    return 0


def cmd_graph(cfg: PipelineConfig, extra_out: str | None = None) -> int:
    _require(cfg, "seed")
    library = corpuslib.load_library(_out_path(cfg, GROUNDED_LIBRARY_FILE))
    rows = read_jsonl(_out_path(cfg, DECODED_FILE))
    paths = [[int(s) for s in row["steps"]] for row in rows]
    graph = induce_graph(
        paths, prune_threshold=cfg.prune_threshold, task_id=library.task_id, library=library
    )
    graph = classify_relations(graph)
    json_path = _out_path(cfg, GRAPH_JSON_FILE)
    save_graph(graph, json_path)
    dot = export_graph(graph, "dot")
    dot_path = _out_path(cfg, GRAPH_DOT_FILE)
    dot_path.write_text(dot, encoding="utf-8")
    if extra_out:
        Path(extra_out).write_text(dot, encoding="utf-8")
        print(f"wrote {extra_out}")
    print(f"wrote {json_path} and {dot_path} ({len(graph.nodes)} steps, {len(graph.edges)} edges)")
    return 0


def cmd_eval(cfg: PipelineConfig) -> int:
    _require(cfg, "seed")
    library = corpuslib.load_library(_out_path(cfg, GROUNDED_LIBRARY_FILE))
    sequences = load_grounded(_out_path(cfg, GROUNDED_FILE))
    split = build_eval_splits(sequences, train_fraction=cfg.train_fraction, rng_seed=cfg.seed)
    model = train_path_model(split.train, library, cfg.pathmodel())

    docs = library.doc_sequences
    systems = {
        "model": (
            model_predict_next(model, split),
            model_complete(model, split, cfg.max_steps),
        ),
        "linear": (
            baseline_predict("linear", split, library, docs, rng_seed=cfg.seed),
            baseline_complete("linear", split, library, docs, rng_seed=cfg.seed),
        ),
        "random": (
            baseline_predict("random", split, library, rng_seed=cfg.seed),
            baseline_complete("random", split, library, rng_seed=cfg.seed),
        ),
    }
    results = {
        name: {
            "next_step": next_step_metrics(ranked, split),
            "completion": completion_metrics(completed, split),
        }
        for name, (ranked, completed) in systems.items()
    }
    payload = {
        "seed": cfg.seed,
        "train_fraction": cfg.train_fraction,
        "num_train": len(split.train),
        "num_test_examples": len(split.test_examples),
        "systems": results,
    }
    json_path = _out_path(cfg, METRICS_JSON_FILE)
    write_json(payload, json_path)
    text_path = _out_path(cfg, METRICS_TEXT_FILE)
    text_path.write_text(metrics_table(results), encoding="utf-8")
    print(f"wrote {json_path} and {text_path}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scriptweave",
        description="Induce step graphs for procedural tasks from video step sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="path to a 'key = value' settings file")
        p.add_argument("--out-dir", dest="out_dir", help="artifact directory (default: out)")
        p.add_argument("--seed", type=int, help="random seed (required)")
        p.add_argument("--task", help="task id when the task file has several")

    p = sub.add_parser("library", help="rank documents and build the step library")
    common(p)
    p.add_argument("--tasks", dest="tasks_path", help="task definitions (jsonl)")
    p.add_argument("--docs", dest="docs_path", help="candidate documents (jsonl)")

    p = sub.add_parser("ground", help="map video sequences onto library steps")
    common(p)
    p.add_argument("--tasks", dest="tasks_path", help="task definitions (jsonl)")
    p.add_argument("--corpus", dest="corpus_path", help="video sequence records (jsonl)")

    p = sub.add_parser("stats", help="ordering statistics over grounded sequences")
    common(p)

    p = sub.add_parser("train", help="fit the path model on grounded sequences")
    common(p)

    p = sub.add_parser("losses", help="report path-level training losses for one epoch")
    common(p)
    p.add_argument("--epoch", type=int, help="epoch for the negative-mixture curriculum")

    p = sub.add_parser("decode", help="beam-search the most likely step paths")
    common(p)

    p = sub.add_parser("graph", help="induce the step graph from decoded paths")
    common(p)
    p.add_argument("--out", dest="extra_out", help="also write the DOT export here")

    p = sub.add_parser("eval", help="next-step and completion metrics with baselines")
    common(p)
    p.add_argument(
        "--split", dest="train_fraction", type=float, help="train fraction (default 0.40)"
    )

    return parser


_COMMANDS = {
    "library": cmd_library,
    "ground": cmd_ground,
    "stats": cmd_stats,
    "train": cmd_train,
    "losses": cmd_losses,
    "decode": cmd_decode,
    "graph": cmd_graph,
    "eval": cmd_eval,
}


def run_command(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = build_config(args)
        if args.command == "graph":
            return cmd_graph(cfg, extra_out=getattr(args, "extra_out", None))
        return _COMMANDS[args.command](cfg)
    except ScriptweaveError as exc:
        error = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
