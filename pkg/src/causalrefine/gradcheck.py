"""Finite-difference verification of the analytic gradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CausalityGraph, random_dag
from .refine import (
    ConfidencePartition,
    LatentPoint,
    RefineConfig,
    ScoreVector,
    gradient,
    objective,
)


def finite_difference_gradient(p: LatentPoint, s: ScoreVector, g: CausalityGraph,
                               part: ConfidencePartition, cfg: RefineConfig,
                               step: float = 1e-6) -> LatentPoint:
    """Central differences of the objective, coordinate by coordinate."""
    def fd_block(vec, rebuild):
        out = np.zeros_like(vec)
        for k in range(vec.size):
            bumped = vec.copy()
            bumped[k] = vec[k] + step
            hi = objective(rebuild(bumped), s, g, part, cfg)
            bumped[k] = vec[k] - step
            lo = objective(rebuild(bumped), s, g, part, cfg)
            out[k] = (hi - lo) / (2.0 * step)
        return out

    gz = fd_block(p.score_logits,
                  lambda v: LatentPoint(v, p.confidence_logits))
    ge = fd_block(p.confidence_logits,
                  lambda v: LatentPoint(p.score_logits, v))
    return LatentPoint(gz, ge)


def relative_errors(analytic: LatentPoint, numeric: LatentPoint) -> np.ndarray:
    """|analytic - numeric| / max(|analytic|, |numeric|, 1) per coordinate.

    The unit floor keeps near-zero coordinates from amplifying the
    finite-difference noise floor into spurious failures.
    """
    a = np.concatenate([analytic.score_logits, analytic.confidence_logits])
    n = np.concatenate([numeric.score_logits, numeric.confidence_logits])
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1.0)
    return np.abs(a - n) / denom


def random_instance(rng: np.random.Generator, max_nodes: int = 31):
    """Random (graph, scores, partition, latent point) check problem."""
    n = int(rng.integers(1, max_nodes + 1))
    g = random_dag(rng, n, edge_prob=float(rng.uniform(0.1, 0.5)))
    s = ScoreVector(rng.random(n))
    roles = rng.random(n)
    key = frozenset(int(i) for i in np.flatnonzero(roles < 0.15))
    missing = frozenset(int(i) for i in np.flatnonzero(roles > 0.85))
    if len(missing) == n:
        missing = frozenset(list(missing)[:-1])
    part = ConfidencePartition(n, key_set=key, missing_set=missing)
    p = LatentPoint(rng.normal(0.0, 1.5, n),
                    rng.normal(0.0, 1.5, len(part.free_set)))
    return g, s, part, p


@dataclass
class GradCheckReport:
    trials: int
    worst_error: float
    failures: list[int]

    @property
    def passed(self) -> bool:
        return not self.failures


def run_gradient_check(trials: int = 100, max_nodes: int = 31,
                       tolerance: float = 1e-5, step: float = 1e-6,
                       seed: int = 0) -> GradCheckReport:
    """Compare analytic and finite-difference gradients on random instances."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cfg = RefineConfig()
    worst = 0.0
    failures = []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
        g, s, part, p = random_instance(rng, max_nodes)
        analytic = gradient(p, s, g, part, cfg)
        numeric = finite_difference_gradient(p, s, g, part, cfg, step)
        err = float(relative_errors(analytic, numeric).max(initial=0.0))
        worst = max(worst, err)
        if err >= tolerance:
            failures.append(trial)
    return GradCheckReport(trials=trials, worst_error=worst, failures=failures)
