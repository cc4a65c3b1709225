"""Causality graphs: validated DAGs, balanced polytrees, and path queries.

An edge (i, j) states that anomalous behavior at node i is typically
caused by anomalous behavior at node j, so the neighbor set of i is its
out-neighborhood, the set of candidate causes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    CycleDetected,
    DuplicateEdge,
    NoSuchPath,
    OverflowRejected,
    SelfLoop,
    UnknownNode,
)

# Node counts must stay indexable with signed 64-bit integers.
_MAX_NODES = 2**63 - 1


@dataclass(frozen=True, eq=False)
class CausalityGraph:
    """Immutable validated DAG. Build instances through :func:`build_graph`."""

    node_count: int
    node_names: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    neighbor_sets: tuple[tuple[int, ...], ...]

    def index(self, name: str) -> int:
        return self.node_names.index(name)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sources(self) -> list[int]:
        """Nodes with no incoming edge."""
        has_incoming = [False] * self.node_count
        for _, cause in self.edges:
            has_incoming[cause] = True
        return [i for i in range(self.node_count) if not has_incoming[i]]


@dataclass(frozen=True)
class PolytreeSpec:
    """Perfectly balanced tree shape: branching factor and height."""

    r: int
    h: int

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"branching factor must be >= 1, got {self.r}")
        if self.h < 0:
            raise ValueError(f"height must be >= 0, got {self.h}")


def _find_cycle(node_count: int, neighbor_sets: list[list[int]]) -> list[int]:
    """Return one directed cycle (list of node indices) via DFS back edges."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * node_count
    for root in range(node_count):
        if color[root] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        path = [root]
        color[root] = GRAY
        while stack:
            node, ptr = stack[-1]
            if ptr < len(neighbor_sets[node]):
                stack[-1] = (node, ptr + 1)
                nxt = neighbor_sets[node][ptr]
                if color[nxt] == GRAY:
                    return path[path.index(nxt):] + [nxt]
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, 0))
                    path.append(nxt)
            else:
                color[node] = BLACK
                stack.pop()
                path.pop()
    return []


def build_graph(node_names: list[str] | tuple[str, ...],
                edges: list[tuple[str, str]] | tuple[tuple[str, str], ...]) -> CausalityGraph:
    """Validate names and edges and return an immutable graph.

    Edges are given as (effect_name, cause_name) pairs. Raises
    UnknownNode, SelfLoop, DuplicateEdge, or CycleDetected on bad input.
    """
    names = tuple(node_names)
    if len(set(names)) != len(names):
        raise ValueError("node names must be distinct")
    if not names:
        raise ValueError("at least one node is required")
    index = {name: i for i, name in enumerate(names)}

    seen: set[tuple[int, int]] = set()
    idx_edges: list[tuple[int, int]] = []
    for effect, cause in edges:
        if effect not in index:
            raise UnknownNode(f"edge ({effect!r}, {cause!r}): unknown node {effect!r}")
        if cause not in index:
            raise UnknownNode(f"edge ({effect!r}, {cause!r}): unknown node {cause!r}")
        pair = (index[effect], index[cause])
        if pair[0] == pair[1]:
            raise SelfLoop(f"edge ({effect!r}, {cause!r}) is a self-loop")
        if pair in seen:
            raise DuplicateEdge(f"edge ({effect!r}, {cause!r}) appears twice")
        seen.add(pair)
        idx_edges.append(pair)

    nbrs: list[list[int]] = [[] for _ in names]
    for eff, cau in idx_edges:
        nbrs[eff].append(cau)
    for lst in nbrs:
        lst.sort()

    cycle = _find_cycle(len(names), nbrs)
    if cycle:
        shown = " -> ".join(names[i] for i in cycle)
        raise CycleDetected(f"directed cycle: {shown}")

    return CausalityGraph(
        node_count=len(names),
        node_names=names,
        edges=tuple(idx_edges),
        neighbor_sets=tuple(tuple(lst) for lst in nbrs),
    )


def polytree_node_count(spec: PolytreeSpec) -> int:
    """Total node count of a perfectly balanced (r, h) tree: sum of r**k."""
    total = 0
    power = 1
    for _ in range(spec.h + 1):
        total += power
        power *= spec.r
        if total > _MAX_NODES:
            raise OverflowRejected(
                f"(r={spec.r}, h={spec.h}) tree exceeds {_MAX_NODES} nodes")
    return total


def leaf_density(spec: PolytreeSpec) -> Fraction:
    """Exact fraction of nodes that are leaves, r**h over the node count."""
    return Fraction(spec.r ** spec.h, polytree_node_count(spec))


def make_polytree(spec: PolytreeSpec) -> CausalityGraph:
    """Perfectly balanced tree with edges directed parent -> child.

    Nodes are indexed in level order with the root at 0, so node k has
    children r*k + 1 .. r*k + r while those indices exist.
    """
    n = polytree_node_count(spec)
    names = tuple(f"n{i}" for i in range(n))
    internal = n - spec.r ** spec.h
    edges = []
    for k in range(internal):
        for child in range(spec.r * k + 1, spec.r * k + spec.r + 1):
            edges.append((names[k], names[child]))
    return build_graph(names, edges)


def enumerate_root_paths(g: CausalityGraph, length: int) -> list[tuple[int, ...]]:
    """All directed paths with exactly `length` edges starting at a source.

    Sources are nodes with no incoming edge; in a downward polytree of
    height h, length=h yields exactly the root-to-leaf paths. Raises
    NoSuchPath when no such path exists.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    paths: list[tuple[int, ...]] = []
    for src in g.sources():
        stack = [(src, (src,))]
        while stack:
            node, prefix = stack.pop()
            if len(prefix) == length + 1:
                paths.append(prefix)
                continue
            for nxt in reversed(g.neighbor_sets[node]):
                stack.append((nxt, prefix + (nxt,)))
    if not paths:
        raise NoSuchPath(f"no directed path with {length} edges from any source")
    return paths


def random_dag(rng: np.random.Generator, node_count: int, edge_prob: float = 0.3) -> CausalityGraph:
    """Random DAG built from a random topological order; used by checks."""
    names = [f"n{i}" for i in range(node_count)]
    order = rng.permutation(node_count)
    edges = []
    for a in range(node_count):
        for b in range(a + 1, node_count):
            if rng.random() < edge_prob:
                edges.append((names[order[a]], names[order[b]]))
    return build_graph(names, edges)


def save_graph_json(path: str | Path, g: CausalityGraph,
                    key_kpis: list[str] | tuple[str, ...] = ()) -> None:
    for name in key_kpis:
        if name not in g.node_names:
            raise UnknownNode(f"key KPI {name!r} is not a graph node")
    payload = {
        "nodes": list(g.node_names),
        "edges": [[g.node_names[e], g.node_names[c]] for e, c in g.edges],
        "key_kpis": list(key_kpis),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_graph_json(path: str | Path) -> tuple[CausalityGraph, list[str]]:
    """Read {"nodes", "edges", "key_kpis"} JSON and validate it.

    Returns the graph plus the (possibly empty) list of key KPI names.
    Validation failures carry the offending edge in the message.
    """
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict) or "nodes" not in raw or "edges" not in raw:
        raise ValueError(f"{path}: expected an object with 'nodes' and 'edges'")
    edges = [tuple(e) for e in raw["edges"]]
    for e in edges:
        if len(e) != 2:
            raise ValueError(f"{path}: malformed edge {e!r}")
    g = build_graph(raw["nodes"], edges)
    key_kpis = list(raw.get("key_kpis") or [])
    for name in key_kpis:
        if name not in g.node_names:
            raise UnknownNode(f"{path}: key KPI {name!r} is not a graph node")
    return g, key_kpis
