"""Leaderboard recovery from signed pairwise margins.

Three aggregators share one edge format (left, right, margin) with the
convention margin = score(left) - score(right):

* lsq_recover: anchor-free least squares. Each edge contributes one row
  s_i - s_j ~ margin; the minimizer of the stacked residual under a zero-mean
  gauge solves the graph-Laplacian normal equations L s = r per connected
  component.
* winrate_rank: (wins + half draws) / matches with a draw threshold.
* elo_rank: sequential expected-vs-actual rating updates with the same draw
  threshold.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DisconnectedGraphWarning, InvalidInputError, MarginMagnitudeWarning
from .graph import ComparisonGraph, connected_components

# Above this component size the dense KKT solve gives way to conjugate
# gradient on the Laplacian with explicit mean projection.
DENSE_SOLVE_LIMIT = 2048

MOS_MARGIN_LIMIT = 4.0  # largest gap expressible on a 1-5 scale


@dataclass
class Leaderboard:
    """Per-vertex scores with dense descending ranks (1 = best)."""

    scores: np.ndarray
    ranks: np.ndarray
    method: str


@dataclass
class EloConfig:
    initial_rating: float = 1500.0
    k_factor: float = 32.0
    scale: float = 400.0
    draw_threshold: float = 0.2

    def __post_init__(self) -> None:
        if not self.k_factor > 0:
            raise InvalidInputError("k_factor must be positive")
        if not self.scale > 0:
            raise InvalidInputError("scale must be positive")
        if self.draw_threshold < 0:
            raise InvalidInputError("draw_threshold must be >= 0")


def _validate_edges(n_vertices: int, edges) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if n_vertices < 1:
        raise InvalidInputError("n_vertices must be >= 1")
    if len(edges) == 0:
        empty = np.empty(0)
        return empty.astype(np.int64), empty.astype(np.int64), empty
    arr = np.asarray([(e[0], e[1], e[2]) for e in edges], dtype=float)
    left = arr[:, 0].astype(np.int64)
    right = arr[:, 1].astype(np.int64)
    margins = arr[:, 2]
    if np.any(left == right):
        raise InvalidInputError("edge endpoints must be distinct")
    if np.any((left < 0) | (left >= n_vertices) | (right < 0) | (right >= n_vertices)):
        raise InvalidInputError("edge index out of range")
    if not np.all(np.isfinite(margins)):
        raise InvalidInputError("margins must be finite")
    if np.any(np.abs(margins) > MOS_MARGIN_LIMIT):
        warnings.warn(
            MarginMagnitudeWarning(
                f"margin magnitude exceeds {MOS_MARGIN_LIMIT} (1-5 scale gap range)"
            ),
            stacklevel=3,
        )
    return left, right, margins


def scores_to_ranks(scores) -> np.ndarray:
    """Dense descending ranks: highest score gets rank 1, ties share a rank."""
    scores = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("scores must be finite")
    uniq = np.unique(scores)
    return uniq.size - np.searchsorted(uniq, scores)


def _outcome(margin: float, threshold: float) -> float:
    """Score for the left player: 1 win, 0.5 draw, 0 loss.

    A gap strictly below the threshold is a draw; a gap equal to the
    threshold is decisive (the threshold bounds draws from above).
    """
    if abs(margin) < threshold or margin == 0.0:
        return 0.5
    return 1.0 if margin > 0 else 0.0


def lsq_recover(n_vertices: int, edges: Sequence) -> Leaderboard:
    """Zero-mean least-squares scores from signed margins.

    Solves L s = r independently on each connected component, where L is the
    comparison-graph Laplacian (repeated edges add multiplicity) and
    r_i accumulates +margin for edges with i on the left and -margin on the
    right. Each component is gauged to mean zero; isolated vertices get 0.
    """
    left, right, margins = _validate_edges(n_vertices, edges)
    graph = ComparisonGraph(n_vertices)
    for u, v in zip(left, right):
        graph.add_edge(int(u), int(v))
    labels = connected_components(graph)
    n_components = int(labels.max()) + 1 if n_vertices else 0
    if n_components > 1:
        warnings.warn(DisconnectedGraphWarning(n_components), stacklevel=2)

    # Interleave the per-edge contributions so every vertex accumulates its
    # addends in edge order; this keeps the result bit-identical when all
    # edges are swapped and negated.
    residual = np.zeros(n_vertices)
    idx = np.empty(2 * left.size, dtype=np.int64)
    val = np.empty(2 * left.size)
    idx[0::2], idx[1::2] = left, right
    val[0::2], val[1::2] = margins, -margins
    np.add.at(residual, idx, val)

    scores = np.zeros(n_vertices)
    for comp in range(n_components):
        members = np.flatnonzero(labels == comp)
        if members.size < 2:
            continue
        local = np.full(n_vertices, -1, dtype=np.int64)
        local[members] = np.arange(members.size)
        mask = labels[left] == comp
        li, lj = local[left[mask]], local[right[mask]]
        scores[members] = _solve_component(members.size, li, lj, residual[members])

    ranks = scores_to_ranks(scores)
    return Leaderboard(scores=scores, ranks=ranks, method="lsq")


def _solve_component(m: int, li: np.ndarray, lj: np.ndarray, r: np.ndarray) -> np.ndarray:
    ones = np.ones(li.size)
    data = np.concatenate([ones, ones, -ones, -ones])
    rows = np.concatenate([li, lj, li, lj])
    cols = np.concatenate([li, lj, lj, li])
    laplacian = sp.csr_matrix((data, (rows, cols)), shape=(m, m))
    if m <= DENSE_SOLVE_LIMIT:
        kkt = np.zeros((m + 1, m + 1))
        kkt[:m, :m] = laplacian.toarray()
        kkt[:m, m] = 1.0
        kkt[m, :m] = 1.0
        rhs = np.append(r, 0.0)
        return np.linalg.solve(kkt, rhs)[:m]
    return _cg_zero_mean(laplacian, r)


def _cg_zero_mean(
    laplacian: sp.csr_matrix, r: np.ndarray, rtol: float = 1e-10
) -> np.ndarray:
    """Conjugate gradient on the Laplacian restricted to the zero-mean subspace."""
    b = r - r.mean()
    m = b.size
    x = np.zeros(m)
    res = b.copy()
    p = res.copy()
    rs = res @ res
    norm_b = np.sqrt(b @ b)
    if norm_b == 0:
        return x
    for _ in range(10 * m):
        if np.sqrt(rs) <= rtol * norm_b:
            break
        lp = laplacian @ p
        alpha = rs / (p @ lp)
        x += alpha * p
        res -= alpha * lp
        res -= res.mean()  # keep iterates in the gauge subspace
        rs_new = res @ res
        p = res + (rs_new / rs) * p
        rs = rs_new
    return x - x.mean()


def winrate_rank(
    n_vertices: int, edges: Sequence, draw_threshold: float = 0.2
) -> Leaderboard:
    """Score each vertex by (wins + 0.5 * draws) / matches; unmatched score 0.5."""
    if draw_threshold < 0:
        raise InvalidInputError("draw_threshold must be >= 0")
    left, right, margins = _validate_edges(n_vertices, edges)
    points = np.zeros(n_vertices)
    matches = np.zeros(n_vertices)
    for i, j, m in zip(left, right, margins):
        s = _outcome(m, draw_threshold)
        points[i] += s
        points[j] += 1.0 - s
        matches[i] += 1
        matches[j] += 1
    scores = np.where(matches > 0, points / np.maximum(matches, 1), 0.5)
    return Leaderboard(scores=scores, ranks=scores_to_ranks(scores), method="winrate")


def elo_rank(
    n_vertices: int, edges: Sequence, config: EloConfig | None = None
) -> Leaderboard:
    """Sequential Elo updates over the edges in the given order."""
    config = config or EloConfig()
    left, right, margins = _validate_edges(n_vertices, edges)
    ratings = np.full(n_vertices, float(config.initial_rating))
    for i, j, m in zip(left, right, margins):
        expected = 1.0 / (1.0 + 10.0 ** ((ratings[j] - ratings[i]) / config.scale))
        actual = _outcome(m, config.draw_threshold)
        delta = config.k_factor * (actual - expected)
        ratings[i] += delta
        ratings[j] -= delta
    return Leaderboard(
        scores=ratings, ranks=scores_to_ranks(ratings), method="elo"
    )


def write_leaderboard_csv(
    path: str | Path, ids: Sequence[str], board: Leaderboard
) -> None:
    if len(ids) != board.scores.size:
        raise InvalidInputError("id list length does not match leaderboard size")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_id", "score", "rank"])
        for vid, score, rank in zip(ids, board.scores, board.ranks):
            writer.writerow([vid, f"{score:.6f}", int(rank)])
