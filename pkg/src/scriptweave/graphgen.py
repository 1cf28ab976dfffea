"""Graph script induction from decoded paths.

Decoded paths are folded into a directed step graph: edge weight is the
fraction of paths containing that consecutive transition, low-weight
edges are pruned, and nodes cut off from the START-to-END flow are
removed. Surviving structure is labeled with step relations and can be
exported as DOT or JSON.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import StepLibrary
from .errors import EmptyInput, UnsupportedFormat
from .jsonio import read_json, write_json
from .pathmodel import END, START

PRUNE_THRESHOLD = 0.175


@dataclass(frozen=True)
class GraphEdge:
    src: int
    dst: int
    weight: float
    count: int


@dataclass(frozen=True)
class Relation:
    """kind is sequential, interchangeable, or optional.

    steps holds (earlier, later) for sequential, the unordered pair
    (low id first) for interchangeable, and (before, optional, after)
    for optional.
    """

    kind: str
    steps: tuple[int, ...]


@dataclass
class GraphScript:
    task_id: str
    nodes: list[int]  # non-virtual step ids; START/END are implicit
    edges: list[GraphEdge]
    num_paths: int
    relations: list[Relation] = field(default_factory=list)
    labels: dict[int, str] = field(default_factory=dict)


def induce_graph(
    paths: Sequence[Sequence[int]],
    prune_threshold: float = PRUNE_THRESHOLD,
    task_id: str = "",
    library: StepLibrary | None = None,
) -> GraphScript:
    """Accumulate paths into a pruned step graph.

    Each path is anchored as START -> s1 -> ... -> sn -> END. An edge's
    weight is its path count divided by the number of paths; edges with
    weight <= prune_threshold are removed, and afterwards any step not on
    a START-to-END route through surviving edges is dropped along with
    its edges.
    """
    paths = [list(path) for path in paths]
    if not paths:
        raise EmptyInput("graph induction needs at least one path")
    num_paths = len(paths)

    counts: Counter[tuple[int, int]] = Counter()
    for path in paths:
        tokens = [START] + path + [END]
        for a, b in zip(tokens, tokens[1:]):
            counts[(a, b)] += 1

    surviving = {
        edge: count for edge, count in counts.items() if count / num_paths > prune_threshold
    }
    forward = _reachable(surviving, START, reverse=False)
    backward = _reachable(surviving, END, reverse=True)
    kept_nodes = {
        node
        for edge in surviving
        for node in edge
        if node not in (START, END) and node in forward and node in backward
    }
    virtual_ok = kept_nodes | {START, END}
    edges = [
        GraphEdge(src, dst, count / num_paths, count)
        for (src, dst), count in sorted(surviving.items())
        if src in virtual_ok and dst in virtual_ok
    ]
    labels = {}
    if library is not None:
        labels = {node: library.steps[node].normalized_text for node in sorted(kept_nodes)}
    return GraphScript(task_id, sorted(kept_nodes), edges, num_paths, labels=labels)


def _reachable(edges, origin: int, reverse: bool) -> set[int]:
    adjacency: dict[int, list[int]] = {}
    for src, dst in edges:
        if reverse:
            src, dst = dst, src
        adjacency.setdefault(src, []).append(dst)
    seen = {origin}
    frontier = [origin]
    while frontier:
        node = frontier.pop()
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def classify_relations(graph: GraphScript) -> GraphScript:
    """Label step relations from the surviving edge structure.

    A pair is interchangeable when both directions survive. A step j is
    optional between i and k when edges (i,j), (j,k), (i,k) all survive
    and none of the three belongs to an interchangeable pair; the skip
    edge (i,k) then expresses the optionality. Remaining step-to-step
    edges are sequential.
    """
    step_edges = {
        (e.src, e.dst) for e in graph.edges if e.src not in (START, END) and e.dst not in (START, END)
    }
    interchangeable = {
        tuple(sorted((a, b))) for (a, b) in step_edges if (b, a) in step_edges and a != b
    }
    pair_edges = {(a, b) for a, b in interchangeable} | {(b, a) for a, b in interchangeable}

    optional: list[tuple[int, int, int]] = []
    for i, j in step_edges:
        if (i, j) in pair_edges:
            continue
        for j2, k in step_edges:
            if j2 != j or k == i:
                continue
            if (j, k) in pair_edges or (i, k) in pair_edges:
                continue
            if (i, k) in step_edges:
                optional.append((i, j, k))
    skip_edges = {(i, k) for i, _, k in optional}

    sequential = sorted(step_edges - pair_edges - skip_edges)
    relations = (
        [Relation("sequential", pair) for pair in sequential]
        + [Relation("interchangeable", pair) for pair in sorted(interchangeable)]
        + [Relation("optional", triple) for triple in sorted(optional)]
    )
    return GraphScript(
        graph.task_id, list(graph.nodes), list(graph.edges), graph.num_paths, relations, dict(graph.labels)
    )


def export_graph(graph: GraphScript, fmt: str) -> str:
    if fmt == "dot":
        return graph_to_dot(graph)
    if fmt == "json":
        import json

        return json.dumps(graph_to_json(graph), indent=2, sort_keys=True) + "\n"
    raise UnsupportedFormat(f"unknown graph export format {fmt!r}")


def _node_name(graph: GraphScript, node: int) -> str:
    if node == START:
        return "START"
    if node == END:
        return "END"
    return graph.labels.get(node, f"step {node}")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(graph: GraphScript) -> str:
    """Render as Graphviz DOT.

    Interchangeable pairs collapse to one double-headed edge, optional
    skip edges are dashed, everything else is a plain arrow.
    """
    pair_edges = {
        tuple(rel.steps) for rel in graph.relations if rel.kind == "interchangeable"
    }
    both = {(a, b) for a, b in pair_edges} | {(b, a) for a, b in pair_edges}
    skips = {(rel.steps[0], rel.steps[2]) for rel in graph.relations if rel.kind == "optional"}

    lines = ["digraph script {", "  rankdir=LR;"]
    lines.append('  "START" [shape=circle];')
    lines.append('  "END" [shape=doublecircle];')
    for node in graph.nodes:
        lines.append(f"  {_quote(_node_name(graph, node))} [shape=box];")
    emitted_pairs: set[tuple[int, int]] = set()
    for edge in graph.edges:
        src = _quote(_node_name(graph, edge.src))
        dst = _quote(_node_name(graph, edge.dst))
        attrs = [f'label="{edge.weight:.3f}"']
        key = (edge.src, edge.dst)
        if key in both:
            pair = tuple(sorted(key))
            if pair in emitted_pairs:
                continue
            emitted_pairs.add(pair)
            attrs.append("dir=both")
        elif key in skips:
            attrs.append("style=dashed")
        lines.append(f"  {src} -> {dst} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(graph: GraphScript) -> dict:
    def node_key(node: int):
        if node == START:
            return "START"
        if node == END:
            return "END"
        return node

    return {
        "task_id": graph.task_id,
        "num_paths": graph.num_paths,
        "nodes": [
            {"id": node, "label": graph.labels.get(node, "")} for node in graph.nodes
        ],
        "edges": [
            {
                "src": node_key(e.src),
                "dst": node_key(e.dst),
                "weight": e.weight,
                "count": e.count,
            }
            for e in graph.edges
        ],
        "relations": [{"kind": r.kind, "steps": list(r.steps)} for r in graph.relations],
    }


def graph_from_json(data: dict) -> GraphScript:
    def parse_node(value):
        if value == "START":
            return START
        if value == "END":
            return END
        return int(value)

    edges = [
        GraphEdge(parse_node(e["src"]), parse_node(e["dst"]), float(e["weight"]), int(e["count"]))
        for e in data["edges"]
    ]
    relations = [Relation(r["kind"], tuple(int(s) for s in r["steps"])) for r in data["relations"]]
    labels = {int(n["id"]): n["label"] for n in data["nodes"] if n.get("label")}
    return GraphScript(
        data["task_id"],
        [int(n["id"]) for n in data["nodes"]],
        edges,
        int(data["num_paths"]),
        relations,
        labels,
    )


def save_graph(graph: GraphScript, path) -> None:
    write_json(graph_to_json(graph), path)


def load_graph(path) -> GraphScript:
    return graph_from_json(read_json(path))
