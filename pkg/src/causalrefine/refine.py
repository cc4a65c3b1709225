"""Score refinement by penalized gradient descent on a causality DAG.

Raw per-node anomaly scores are replaced by refined scores that stay
close to the input while respecting the graph: a node may not look more
anomalous than the most anomalous of its candidate causes. Refined
scores and per-node confidence weights are parameterized through
sigmoids so the box constraints hold by construction, the neighborhood
constraint enters as a cubed-hinge penalty on the gap to a smooth
maximum of the neighbor scores, and the resulting smooth objective is
minimized with backtracking gradient descent from a seeded Gaussian
start.

Each call solves one epoch. Calls are pure given their inputs, so
epochs can be solved in any order or in parallel; :func:`refine_many`
solves a whole batch of epochs vectorized, row for row identical to
per-epoch :func:`refine` calls.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import _kernels
from .errors import (
    AllScoresMissing,
    DegenerateWeights,
    DimensionMismatch,
    EmptyInput,
    NonFiniteEncountered,
)
from .graph import CausalityGraph

_MAX_HALVINGS = 60     # step underflows to ~1e-18 of the trial size
_MAX_STEP_GROWTH = 2.0 ** 30  # cap on how far accepted steps may outgrow step_size


@dataclass(frozen=True)
class ScoreVector:
    """Per-node anomaly scores in [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("scores must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValueError("scores must be finite")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValueError("scores must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ConfidencePartition:
    """Splits nodes into key (confidence pinned to 1), missing (pinned
    to 0), and free (confidence optimized within [alpha_floor, 1])."""

    node_count: int
    key_set: frozenset[int] = frozenset()
    missing_set: frozenset[int] = frozenset()
    free_set: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        key = frozenset(int(i) for i in self.key_set)
        missing = frozenset(int(i) for i in self.missing_set)
        for i in key | missing:
            if not 0 <= i < self.node_count:
                raise ValueError(f"node index {i} out of range")
        if key & missing:
            raise ValueError(f"key and missing sets overlap: {sorted(key & missing)}")
        if len(missing) == self.node_count:
            raise AllScoresMissing("every node is marked missing")
        object.__setattr__(self, "key_set", key)
        object.__setattr__(self, "missing_set", missing)
        object.__setattr__(
            self, "free_set",
            tuple(i for i in range(self.node_count) if i not in key and i not in missing))


@dataclass(frozen=True)
class RefineConfig:
    """Solver knobs.

    alpha_floor and sharpness follow the framework's standard values;
    penalty_weight expresses full trust in the expert graph. With
    backtracking on, step_size seeds the first trial step; accepted
    steps may then double while the objective keeps dropping and are
    halved whenever it does not. Without backtracking, step_size is
    used as a fixed step.
    """

    alpha_floor: float = 0.2
    penalty_weight: float = 100.0
    sharpness: float = 10.0
    step_size: float = 0.05
    max_iterations: int = 500
    gradient_tolerance: float = 1e-4
    backtracking_enabled: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_floor < 1.0:
            raise ValueError("alpha_floor must lie in (0, 1)")
        if not (np.isfinite(self.penalty_weight) and self.penalty_weight > 0):
            raise ValueError("penalty_weight must be positive and finite")
        if not (np.isfinite(self.sharpness) and self.sharpness > 0):
            raise ValueError("sharpness must be positive and finite")
        if not (np.isfinite(self.step_size) and self.step_size > 0):
            raise ValueError("step_size must be positive and finite")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (np.isfinite(self.gradient_tolerance) and self.gradient_tolerance > 0):
            raise ValueError("gradient_tolerance must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True)
class LatentPoint:
    """Unconstrained optimization variables: one logit per node for the
    refined score, one logit per free node for the confidence weight."""

    score_logits: np.ndarray
    confidence_logits: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.score_logits, dtype=np.float64)
        e = np.asarray(self.confidence_logits, dtype=np.float64)
        if z.ndim != 1 or e.ndim != 1:
            raise ValueError("latent blocks must be one-dimensional")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(e))):
            raise ValueError("latent point must be finite")
        object.__setattr__(self, "score_logits", z)
        object.__setattr__(self, "confidence_logits", e)


@dataclass
class RefineResult:
    refined: np.ndarray       # y, in (0, 1)
    confidence: np.ndarray    # alpha, pinned to 1 / 0 on key / missing nodes
    objective_trace: list[float]
    final_objective: float
    final_gradient_norm: float
    iterations_used: int
    converged: bool


# ---------------------------------------------------------------------------
# penalty geometry, grouped by degree once per graph
#
# Constrained nodes are bucketed by out-degree so the soft maximum runs
# as dense (batch, nodes_of_degree, degree) reductions; neighbor nodes
# are bucketed by in-degree so gradient contributions scatter back with
# plain column assignments. Contiguous reductions along the trailing
# axis keep every row's arithmetic independent of the batch around it.

@dataclass(frozen=True, eq=False)
class _OutGroup:
    cons: np.ndarray      # (C,) constrained node ids sharing one degree
    nbr: np.ndarray       # (C, d) their neighbor node ids
    flat_start: int       # offset of this block in the flat edge layout


@dataclass(frozen=True, eq=False)
class _InGroup:
    nodes: np.ndarray     # (T,) neighbor ids sharing one incoming count
    edge_pos: np.ndarray  # (T, k) positions in the flat edge layout


@dataclass(frozen=True, eq=False)
class _PenaltyPlan:
    cons_total: int
    edge_total: int
    out_groups: tuple[_OutGroup, ...]
    in_groups: tuple[_InGroup, ...]
    # CSR layout consumed by the numba kernels
    cons: np.ndarray      # (C,) constrained node ids
    nbr: np.ndarray       # (E,) neighbor ids, grouped by constrained node
    starts: np.ndarray    # (C+1,) segment bounds into nbr


@functools.lru_cache(maxsize=256)
def _penalty_plan(g: CausalityGraph) -> _PenaltyPlan:
    by_degree: dict[int, list[int]] = {}
    for i in range(g.node_count):
        if g.neighbor_sets[i]:
            by_degree.setdefault(len(g.neighbor_sets[i]), []).append(i)

    out_groups = []
    flat_pos: dict[int, list[int]] = {}  # neighbor node -> flat edge positions
    offset = 0
    for d in sorted(by_degree):
        nodes = by_degree[d]
        nbr = np.array([g.neighbor_sets[i] for i in nodes], dtype=np.intp)
        out_groups.append(_OutGroup(cons=np.array(nodes, dtype=np.intp),
                                    nbr=nbr, flat_start=offset))
        for row, i in enumerate(nodes):
            for col, j in enumerate(g.neighbor_sets[i]):
                flat_pos.setdefault(j, []).append(offset + row * d + col)
        offset += len(nodes) * d

    by_incoming: dict[int, list[tuple[int, list[int]]]] = {}
    for j, positions in flat_pos.items():
        by_incoming.setdefault(len(positions), []).append((j, positions))
    in_groups = []
    for k in sorted(by_incoming):
        entries = sorted(by_incoming[k])
        in_groups.append(_InGroup(
            nodes=np.array([j for j, _ in entries], dtype=np.intp),
            edge_pos=np.array([pos for _, pos in entries], dtype=np.intp)))

    cons_ids = [i for i in range(g.node_count) if g.neighbor_sets[i]]
    nbr_flat = [j for i in cons_ids for j in g.neighbor_sets[i]]
    bounds = np.zeros(len(cons_ids) + 1, dtype=np.intp)
    for pos, i in enumerate(cons_ids):
        bounds[pos + 1] = bounds[pos] + len(g.neighbor_sets[i])
    return _PenaltyPlan(cons_total=sum(len(v) for v in by_degree.values()),
                        edge_total=offset,
                        out_groups=tuple(out_groups), in_groups=tuple(in_groups),
                        cons=np.array(cons_ids, dtype=np.intp),
                        nbr=np.array(nbr_flat, dtype=np.intp),
                        starts=bounds)


# ---------------------------------------------------------------------------
# batched kernels; every array carries a leading batch axis

def _group_terms(y: np.ndarray, grp: _OutGroup, c: float):
    """Soft maximum and hinge gap for one degree bucket.

    Exponentials are shifted by the per-node maximum so their arguments
    never exceed zero.
    """
    yn = y[:, grp.nbr]                       # (B, C, d)
    shift = yn.max(axis=2, keepdims=True)
    ex = np.exp(c * (yn - shift))
    den = ex.sum(axis=2)
    sm = np.einsum("bcd,bcd->bc", yn, ex) / den
    hinge = np.maximum(y[:, grp.cons] - sm, 0.0)
    return yn, ex, den, sm, hinge


def _map_rows(z, eps, free_idx, key_idx, miss_idx, alpha_floor):
    y = expit(z)
    alpha = np.empty_like(y)
    alpha[:, free_idx] = alpha_floor + (1.0 - alpha_floor) * expit(eps)
    alpha[:, key_idx] = 1.0
    alpha[:, miss_idx] = 0.0
    return y, alpha


def _objective_rows(y, alpha, s, plan, mu, c):
    resid = s - y
    den_a = np.sum(alpha, axis=1)
    f = np.einsum("bn,bn->b", alpha, resid * resid) / den_a
    for grp in plan.out_groups:
        hinge = _group_terms(y, grp, c)[4]
        f = f + mu * np.einsum("bc,bc,bc->b", hinge, hinge, hinge)
    return f


def _gradient_rows(y, alpha, s, plan, mu, c, free_idx, alpha_floor):
    resid = y - s
    den_a = np.sum(alpha, axis=1)
    num_a = np.einsum("bn,bn->b", alpha, resid * resid)
    gy = (2.0 * alpha * resid) / den_a[:, None]
    if plan.cons_total:
        edge_val = np.empty((y.shape[0], plan.edge_total))
        for grp in plan.out_groups:
            yn, ex, den, sm, hinge = _group_terms(y, grp, c)
            coeff = 3.0 * mu * hinge * hinge
            gy[:, grp.cons] += coeff
            w = (ex / den[:, :, None]) * (1.0 + c * yn - c * sm[:, :, None])
            w *= -coeff[:, :, None]
            cnt = grp.nbr.size
            edge_val[:, grp.flat_start:grp.flat_start + cnt] = \
                w.reshape(y.shape[0], cnt)
        for grp in plan.in_groups:
            gy[:, grp.nodes] += edge_val[:, grp.edge_pos].sum(axis=2)
    gz = gy * y * (1.0 - y)
    if free_idx.size:
        rf = resid[:, free_idx]
        dalpha = (rf * rf * den_a[:, None] - num_a[:, None]) / (den_a[:, None] ** 2)
        sig = (alpha[:, free_idx] - alpha_floor) / (1.0 - alpha_floor)
        geps = dalpha * (1.0 - alpha_floor) * sig * (1.0 - sig)
    else:
        geps = np.zeros((y.shape[0], 0))
    return gz, geps


# ---------------------------------------------------------------------------
# public single-epoch operations

def map_latent(p: LatentPoint, part: ConfidencePartition,
               alpha_floor: float) -> tuple[np.ndarray, np.ndarray]:
    """Map latent logits to (refined scores, confidence weights)."""
    if p.score_logits.size != part.node_count:
        raise DimensionMismatch("score logits do not match the node count")
    if p.confidence_logits.size != len(part.free_set):
        raise DimensionMismatch("confidence logits do not match the free set")
    free = np.array(part.free_set, dtype=np.intp)
    key = np.array(sorted(part.key_set), dtype=np.intp)
    miss = np.array(sorted(part.missing_set), dtype=np.intp)
    y, alpha = _map_rows(p.score_logits[None, :], p.confidence_logits[None, :],
                         free, key, miss, alpha_floor)
    return y[0], alpha[0]


def smoothmax(values, c: float) -> float:
    """Exponentially weighted average that approaches max(values) as the
    sharpness c grows. Always lies within [min(values), max(values)]."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptyInput("smoothmax of an empty collection")
    shift = v.max()
    ex = np.exp(c * (v - shift))
    return float(np.sum(v * ex) / np.sum(ex))


def fidelity(y: np.ndarray, alpha: np.ndarray, s: ScoreVector) -> float:
    """Confidence-weighted mean squared gap between refined and raw scores."""
    y = np.asarray(y, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if y.shape != alpha.shape or y.size != len(s):
        raise DimensionMismatch("y, alpha, and scores must share one length")
    total = float(np.sum(alpha))
    if total <= 0.0:
        raise DegenerateWeights("confidence weights sum to zero")
    resid = s.values - y
    return float(np.sum(alpha * resid * resid) / total)


def penalty(y: np.ndarray, g: CausalityGraph, mu: float, c: float) -> float:
    """Cubed-hinge charge for nodes scoring above the soft maximum of
    their neighbor scores. Nodes without neighbors contribute nothing."""
    y = np.asarray(y, dtype=np.float64)
    if y.size != g.node_count:
        raise DimensionMismatch("y does not match the node count")
    plan = _penalty_plan(g)
    total = 0.0
    for grp in plan.out_groups:
        hinge = _group_terms(y[None, :], grp, c)[4]
        total += float(np.sum(hinge ** 3))
    return mu * total


def _check_dims(p: LatentPoint, s: ScoreVector, g: CausalityGraph,
                part: ConfidencePartition) -> None:
    if len(s) != g.node_count or part.node_count != g.node_count:
        raise DimensionMismatch("scores and partition must match the graph")
    if p.score_logits.size != g.node_count:
        raise DimensionMismatch("score logits do not match the node count")
    if p.confidence_logits.size != len(part.free_set):
        raise DimensionMismatch("confidence logits do not match the free set")


def objective(p: LatentPoint, s: ScoreVector, g: CausalityGraph,
              part: ConfidencePartition, cfg: RefineConfig) -> float:
    """Fidelity plus penalty at a latent point."""
    _check_dims(p, s, g, part)
    y, alpha = map_latent(p, part, cfg.alpha_floor)
    return fidelity(y, alpha, s) + penalty(y, g, cfg.penalty_weight, cfg.sharpness)


def gradient(p: LatentPoint, s: ScoreVector, g: CausalityGraph,
             part: ConfidencePartition, cfg: RefineConfig) -> LatentPoint:
    """Exact gradient of :func:`objective` with respect to both latent blocks."""
    _check_dims(p, s, g, part)
    free = np.array(part.free_set, dtype=np.intp)
    key = np.array(sorted(part.key_set), dtype=np.intp)
    miss = np.array(sorted(part.missing_set), dtype=np.intp)
    y, alpha = _map_rows(p.score_logits[None, :], p.confidence_logits[None, :],
                         free, key, miss, cfg.alpha_floor)
    gz, geps = _gradient_rows(y, alpha, s.values[None, :], _penalty_plan(g),
                              cfg.penalty_weight, cfg.sharpness, free, cfg.alpha_floor)
    return LatentPoint(gz[0], geps[0])


def gd_step(p: LatentPoint, grad: LatentPoint, step_size: float) -> LatentPoint:
    """One descent update applied to both latent blocks."""
    if grad.score_logits.size != p.score_logits.size \
            or grad.confidence_logits.size != p.confidence_logits.size:
        raise DimensionMismatch("gradient shape does not match the point")
    return LatentPoint(p.score_logits - step_size * grad.score_logits,
                       p.confidence_logits - step_size * grad.confidence_logits)


def check_hard_constraints(y: np.ndarray, g: CausalityGraph,
                           tol: float = 0.0) -> list[tuple[int, float]]:
    """Exact-max constraint audit: (node, margin) for every node scoring
    more than tol above its strongest neighbor. Leaves never appear."""
    y = np.asarray(y, dtype=np.float64)
    if y.size != g.node_count:
        raise DimensionMismatch("y does not match the node count")
    out = []
    for i in range(g.node_count):
        nbrs = g.neighbor_sets[i]
        if not nbrs:
            continue
        margin = float(y[i] - max(y[j] for j in nbrs))
        if margin > tol:
            out.append((i, margin))
    return out


# ---------------------------------------------------------------------------
# solver

def _epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(epoch,)))


def _initial_rows(cfg: RefineConfig, epochs, n: int, n_free: int):
    z = np.empty((len(epochs), n))
    eps = np.empty((len(epochs), n_free))
    for row, epoch in enumerate(epochs):
        rng = _epoch_rng(cfg.seed, epoch)
        z[row] = rng.standard_normal(n)
        eps[row] = rng.standard_normal(n_free)
    return z, eps


def _role_arrays(part: ConfidencePartition) -> tuple[np.ndarray, np.ndarray]:
    role = np.full(part.node_count, _kernels.ROLE_FREE, dtype=np.int8)
    eps_col = np.full(part.node_count, -1, dtype=np.intp)
    for i in sorted(part.key_set):
        role[i] = _kernels.ROLE_KEY
    for i in sorted(part.missing_set):
        role[i] = _kernels.ROLE_MISSING
    for col, i in enumerate(part.free_set):
        eps_col[i] = col
    return role, eps_col


def _solve_rows(s_rows: np.ndarray, g: CausalityGraph, part: ConfidencePartition,
                cfg: RefineConfig, z: np.ndarray, eps: np.ndarray,
                keep_trace: bool):
    """Backtracking gradient descent on a batch of independent epochs.

    Rows never interact: each row's arithmetic is sequential within the
    row, so the result for each epoch is identical whatever the batch
    around it.
    """
    plan = _penalty_plan(g)
    role, eps_col = _role_arrays(part)
    mu, c, floor = cfg.penalty_weight, cfg.sharpness, cfg.alpha_floor
    z = np.ascontiguousarray(z)
    eps = np.ascontiguousarray(eps)

    def objective_of(zz, ee, rows):
        out = np.empty(zz.shape[0])
        _kernels.objective_rows(zz, ee, s_rows[rows], role, eps_col, floor,
                                mu, c, plan.cons, plan.nbr, plan.starts, out)
        return out

    def gradient_of(zz, ee, rows):
        gz = np.empty_like(zz)
        geps = np.empty_like(ee)
        gn = np.empty(zz.shape[0])
        _kernels.gradient_rows(zz, ee, s_rows[rows], role, eps_col, floor,
                               mu, c, plan.cons, plan.nbr, plan.starts,
                               gz, geps, gn)
        return gz, geps, gn

    batch = z.shape[0]
    f = objective_of(z, eps, np.arange(batch))
    if not np.all(np.isfinite(f)):
        raise NonFiniteEncountered("objective is not finite at the initial point")
    traces = [[float(v)] for v in f] if keep_trace else None
    iters = np.zeros(batch, dtype=np.intp)
    last_step = np.full(batch, 0.5 * cfg.step_size)
    step_cap = _MAX_STEP_GROWTH * cfg.step_size
    active = np.arange(batch)

    for _ in range(cfg.max_iterations):
        if not active.size:
            break
        za, ea = z[active], eps[active]
        gz, geps, gn = gradient_of(za, ea, active)
        if not (np.all(np.isfinite(gz)) and np.all(np.isfinite(geps))):
            raise NonFiniteEncountered("gradient is not finite")
        live = gn > cfg.gradient_tolerance
        if not live.all():
            active = active[live]
            if not active.size:
                break
            za, ea, gz, geps = za[live], ea[live], gz[live], geps[live]

        if cfg.backtracking_enabled:
            step = np.minimum(step_cap, 2.0 * last_step[active])
        else:
            step = np.full(active.size, cfg.step_size)
        cand_z = za - step[:, None] * gz
        cand_e = ea - step[:, None] * geps
        f_cand = objective_of(cand_z, cand_e, active)
        if cfg.backtracking_enabled:
            f_cur = f[active]
            need = ~(f_cand < f_cur)
            halvings = 0
            while need.any() and halvings < _MAX_HALVINGS:
                rows = np.flatnonzero(need)
                step[rows] *= 0.5
                cand_z[rows] = za[rows] - step[rows, None] * gz[rows]
                cand_e[rows] = ea[rows] - step[rows, None] * geps[rows]
                f_cand[rows] = objective_of(
                    np.ascontiguousarray(cand_z[rows]),
                    np.ascontiguousarray(cand_e[rows]), active[rows])
                need[rows] = ~(f_cand[rows] < f_cur[rows])
                halvings += 1
            ok = f_cand < f_cur
        else:
            if not np.all(np.isfinite(f_cand)):
                raise NonFiniteEncountered("objective is not finite after a step")
            ok = np.ones(active.size, dtype=bool)

        moved = active[ok]
        z[moved] = cand_z[ok]
        eps[moved] = cand_e[ok]
        f[moved] = f_cand[ok]
        last_step[moved] = step[ok]
        iters[moved] += 1
        if keep_trace:
            for row, val in zip(moved, f_cand[ok]):
                traces[row].append(float(val))
        # rows that could not decrease are numerically stuck; stop them
        active = moved

    free = np.array(part.free_set, dtype=np.intp)
    key = np.array(sorted(part.key_set), dtype=np.intp)
    miss = np.array(sorted(part.missing_set), dtype=np.intp)
    y, alpha = _map_rows(z, eps, free, key, miss, floor)
    _, _, gn = gradient_of(z, eps, np.arange(batch))
    converged = gn <= cfg.gradient_tolerance
    return y, alpha, f, gn, iters, converged, traces


def _score_matrix(rows, n: int) -> np.ndarray:
    m = np.asarray(rows, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != n:
        raise DimensionMismatch("score rows must be a (epochs, nodes) matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("scores must be finite")
    if m.size and (m.min() < 0.0 or m.max() > 1.0):
        raise ValueError("scores must lie in [0, 1]")
    return m


def refine(s: ScoreVector | np.ndarray, g: CausalityGraph,
           part: ConfidencePartition | None = None,
           cfg: RefineConfig | None = None, *,
           initial: LatentPoint | None = None,
           epoch: int = 0,
           keep_trace: bool = True) -> RefineResult:
    """Refine one epoch of scores.

    The start point is drawn from a standard Gaussian seeded by
    (cfg.seed, epoch) unless `initial` is given. With backtracking the
    objective trace is non-increasing; convergence means the final
    gradient norm fell to cfg.gradient_tolerance, and running out of
    iterations simply reports converged=False.
    """
    if not isinstance(s, ScoreVector):
        s = ScoreVector(np.asarray(s))
    cfg = cfg or RefineConfig()
    part = part or ConfidencePartition(g.node_count)
    if len(s) != g.node_count or part.node_count != g.node_count:
        raise DimensionMismatch("scores and partition must match the graph")
    if initial is None:
        z, eps = _initial_rows(cfg, [epoch], g.node_count, len(part.free_set))
    else:
        if initial.score_logits.size != g.node_count \
                or initial.confidence_logits.size != len(part.free_set):
            raise DimensionMismatch("initial point does not match the problem")
        z = initial.score_logits[None, :].copy()
        eps = initial.confidence_logits[None, :].copy()
    y, alpha, f, gn, iters, conv, traces = _solve_rows(
        s.values[None, :], g, part, cfg, z, eps, keep_trace)
    return RefineResult(
        refined=y[0], confidence=alpha[0],
        objective_trace=traces[0] if traces else [],
        final_objective=float(f[0]), final_gradient_norm=float(gn[0]),
        iterations_used=int(iters[0]), converged=bool(conv[0]))


def refine_many(score_rows, g: CausalityGraph,
                part: ConfidencePartition | None = None,
                cfg: RefineConfig | None = None, *,
                epochs=None,
                keep_trace: bool = False,
                chunk_cells: int = 2_000_000) -> list[RefineResult]:
    """Refine a batch of epochs sharing one graph and partition.

    `epochs` supplies the per-row seed stream indices (row numbers by
    default). Rows are solved in memory-bounded chunks; results match
    per-epoch :func:`refine` calls exactly.
    """
    cfg = cfg or RefineConfig()
    part = part or ConfidencePartition(g.node_count)
    if part.node_count != g.node_count:
        raise DimensionMismatch("partition must match the graph")
    m = _score_matrix(score_rows, g.node_count)
    epochs = list(range(m.shape[0])) if epochs is None else list(epochs)
    if len(epochs) != m.shape[0]:
        raise DimensionMismatch("one epoch index is required per score row")

    results: list[RefineResult] = []
    rows_per_chunk = max(1, chunk_cells // max(1, g.node_count))
    for lo in range(0, m.shape[0], rows_per_chunk):
        hi = min(lo + rows_per_chunk, m.shape[0])
        z, eps = _initial_rows(cfg, epochs[lo:hi], g.node_count, len(part.free_set))
        y, alpha, f, gn, iters, conv, traces = _solve_rows(
            m[lo:hi], g, part, cfg, z, eps, keep_trace)
        for row in range(hi - lo):
            results.append(RefineResult(
                refined=y[row], confidence=alpha[row],
                objective_trace=traces[row] if traces else [],
                final_objective=float(f[row]),
                final_gradient_norm=float(gn[row]),
                iterations_used=int(iters[row]), converged=bool(conv[row])))
    return results
