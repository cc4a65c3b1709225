"""Synthetic benchmark data: path-shaped anomalies with flip corruption.

Each epoch marks the nodes of one uniformly drawn source-rooted path as
anomalous, then emits binary detector scores where anomalous nodes read
1 flipped to 0 with probability fnr and normal nodes read 0 flipped to
1 with probability fpr. Every epoch draws from its own RNG stream, a
pure function of (seed, epoch), so records can be produced in any order.
"""

from __future__ import annotations

import csv
import functools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import CausalityGraph, enumerate_root_paths
from .refine import ScoreVector


@dataclass(frozen=True)
class ScenarioSpec:
    """Experiment setup. r and h are optional provenance for generated
    polytrees and are echoed into reports; the graph is authoritative."""

    graph: CausalityGraph
    epochs: int
    fpr: float
    fnr: float
    path_length: int
    seed: int = 0
    r: int | None = None
    h: int | None = None

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0.0 <= self.fpr <= 1.0:
            raise ValueError("fpr must lie in [0, 1]")
        if not 0.0 <= self.fnr <= 1.0:
            raise ValueError("fnr must lie in [0, 1]")
        if self.path_length < 0:
            raise ValueError("path_length must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def echo(self) -> dict:
        d = {
            "node_count": self.graph.node_count,
            "edge_count": self.graph.edge_count,
            "epochs": self.epochs,
            "fpr": self.fpr,
            "fnr": self.fnr,
            "path_length": self.path_length,
            "seed": self.seed,
        }
        if self.r is not None:
            d["r"] = self.r
        if self.h is not None:
            d["h"] = self.h
        return d


@dataclass(frozen=True)
class EpochRecord:
    labels: np.ndarray          # 1 marks an anomalous node
    raw_scores: ScoreVector
    missing_set: frozenset[int] = frozenset()


@functools.lru_cache(maxsize=64)
def _path_table(g: CausalityGraph, length: int) -> tuple[tuple[int, ...], ...]:
    # raises NoSuchPath when the graph has no path of this length
    return tuple(enumerate_root_paths(g, length))


def _epoch_streams(seed: int, epoch: int) -> tuple[np.random.Generator, np.random.Generator]:
    root = np.random.SeedSequence(entropy=(seed, epoch))
    path_ss, flip_ss = root.spawn(2)
    return np.random.default_rng(path_ss), np.random.default_rng(flip_ss)


def sample_anomaly_set(spec: ScenarioSpec, epoch: int) -> frozenset[int]:
    """Node set of one path of spec.path_length edges, drawn uniformly."""
    paths = _path_table(spec.graph, spec.path_length)
    path_rng, _ = _epoch_streams(spec.seed, epoch)
    return frozenset(paths[int(path_rng.integers(len(paths)))])


def corrupt_scores(labels: np.ndarray, fpr: float, fnr: float,
                   rng: np.random.Generator) -> ScoreVector:
    """Binary detector output under independent per-node flips."""
    labels = np.asarray(labels)
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be binary")
    u = rng.random(labels.size)
    anomalous = labels == 1
    scores = np.where(anomalous, (u >= fnr).astype(np.float64),
                      (u < fpr).astype(np.float64))
    return ScoreVector(scores)


def _label_vector(g: CausalityGraph, nodes: frozenset[int]) -> np.ndarray:
    labels = np.zeros(g.node_count, dtype=np.int8)
    labels[list(nodes)] = 1
    return labels


def generate(spec: ScenarioSpec) -> list[EpochRecord]:
    """All spec.epochs records; no node is ever marked missing here."""
    _path_table(spec.graph, spec.path_length)  # fail fast on NoSuchPath
    records = []
    for epoch in range(spec.epochs):
        nodes = sample_anomaly_set(spec, epoch)
        labels = _label_vector(spec.graph, nodes)
        _, flip_rng = _epoch_streams(spec.seed, epoch)
        records.append(EpochRecord(labels=labels,
                                   raw_scores=corrupt_scores(labels, spec.fpr, spec.fnr, flip_rng)))
    return records


def generate_arrays(spec: ScenarioSpec) -> tuple[np.ndarray, np.ndarray]:
    """(labels, raw_scores) as (epochs, nodes) matrices; matches generate()."""
    n = spec.graph.node_count
    labels = np.zeros((spec.epochs, n), dtype=np.int8)
    scores = np.zeros((spec.epochs, n), dtype=np.float64)
    paths = _path_table(spec.graph, spec.path_length)
    for epoch in range(spec.epochs):
        path_rng, flip_rng = _epoch_streams(spec.seed, epoch)
        nodes = list(paths[int(path_rng.integers(len(paths)))])
        labels[epoch, nodes] = 1
        scores[epoch] = corrupt_scores(labels[epoch], spec.fpr, spec.fnr, flip_rng).values
    return labels, scores


def write_scenario_csv(spec: ScenarioSpec, records: list[EpochRecord],
                       path: str | Path) -> None:
    """One row per (epoch, node), plus a JSON sidecar echoing the spec."""
    path = Path(path)
    names = spec.graph.node_names
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "node_name", "label", "raw_score"])
        for epoch, rec in enumerate(records):
            for i, name in enumerate(names):
                writer.writerow([epoch, name, int(rec.labels[i]),
                                 repr(float(rec.raw_scores.values[i]))])
    sidecar = path.with_name(path.name + ".spec.json")
    sidecar.write_text(json.dumps(spec.echo(), indent=2) + "\n")
