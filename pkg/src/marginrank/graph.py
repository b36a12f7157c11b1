"""Sparse comparison graph and degree-prioritized batch pair sampling.

The sampler grows an undirected multigraph of queried pairs in batches.
Each batch repeatedly picks a lowest-degree vertex as the first member and
pairs it with a partner drawn either from the same provisional-rating
quantile or from a rating window around the first member's rating, so that
compared items are informative without fragmenting the graph. Duplicate
unordered pairs are removed within a batch only; repeats across batches are
kept as independent observations.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


def _canonical(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass
class ComparisonGraph:
    """Undirected multigraph over vertex indices 0..n_vertices-1.

    Edges are stored canonically with the smaller index first; match_counts
    caches the per-vertex degree and is kept in sync by add_edge.
    """

    n_vertices: int
    edges: list[tuple[int, int]] = field(default_factory=list)
    match_counts: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise InvalidInputError("graph needs at least one vertex")
        if self.match_counts is None:
            self.match_counts = np.zeros(self.n_vertices, dtype=np.int64)

    def add_edge(self, u: int, v: int) -> None:
        if u == v or not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
            raise InvalidInputError(f"invalid edge ({u}, {v})")
        self.edges.append(_canonical(u, v))
        self.match_counts[u] += 1
        self.match_counts[v] += 1

    def recompute_match_counts(self) -> np.ndarray:
        counts = np.zeros(self.n_vertices, dtype=np.int64)
        for u, v in self.edges:
            counts[u] += 1
            counts[v] += 1
        return counts

    def write_edges_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["left_id", "right_id"])
            writer.writerows(self.edges)


def connected_components(graph: ComparisonGraph) -> np.ndarray:
    """Label each vertex with its component id, numbered by first occurrence."""
    labels = np.full(graph.n_vertices, -1, dtype=np.int64)
    adjacency: list[list[int]] = [[] for _ in range(graph.n_vertices)]
    for u, v in graph.edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    current = 0
    for start in range(graph.n_vertices):
        if labels[start] >= 0:
            continue
        labels[start] = current
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                if labels[v] < 0:
                    labels[v] = current
                    queue.append(v)
        current += 1
    return labels


class PairSampler:
    """Stateful batch sampler over unordered comparison pairs.

    Not safe for concurrent mutation; read-only access to the graph is fine.
    All randomness flows through one seeded generator, so a fixed seed gives
    bit-identical batches across runs and platforms.
    """

    def __init__(
        self,
        n_vertices: int,
        seed: int | np.random.SeedSequence,
        quantile_count: int = 10,
        window_width: float = 0.5,
    ):
        if n_vertices < 2:
            raise InvalidInputError("need at least 2 vertices to form pairs")
        if quantile_count < 1:
            raise InvalidInputError("quantile_count must be >= 1")
        if not window_width > 0:
            raise InvalidInputError("window_width must be positive")
        self.graph = ComparisonGraph(n_vertices)
        self.provisional_ratings = np.zeros(n_vertices)
        self.quantile_count = quantile_count
        self.window_width = window_width
        self._rng = np.random.default_rng(seed)

    def update_provisional_ratings(self, ratings) -> None:
        ratings = np.asarray(ratings, dtype=float)
        if ratings.shape != (self.graph.n_vertices,):
            raise InvalidInputError(
                f"expected {self.graph.n_vertices} ratings, got shape {ratings.shape}"
            )
        if not np.all(np.isfinite(ratings)):
            raise InvalidInputError("provisional ratings must be finite")
        self.provisional_ratings = ratings.copy()

    def sample_batch(self, batch_size: int) -> list[tuple[int, int]]:
        """Draw up to batch_size distinct unordered pairs and add them as edges.

        Each returned pair keeps the draw order: the first element is the
        low-degree vertex the pair was built around. Returns fewer pairs only
        when every remaining unordered pair is already in this batch.
        """
        if batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1")
        n = self.graph.n_vertices
        max_pairs = n * (n - 1) // 2
        degrees = self.graph.match_counts.copy()
        seen: set[tuple[int, int]] = set()
        batch: list[tuple[int, int]] = []
        while len(batch) < batch_size and len(seen) < max_pairs:
            pair = self._draw_pair(degrees, seen)
            if pair is None:
                break
            first, partner = pair
            seen.add(_canonical(first, partner))
            batch.append(pair)
            degrees[first] += 1
            degrees[partner] += 1
        for first, partner in batch:
            self.graph.add_edge(first, partner)
        return batch

    def _draw_pair(
        self, degrees: np.ndarray, seen: set[tuple[int, int]]
    ) -> tuple[int, int] | None:
        n = self.graph.n_vertices
        # Sort by degree with a fresh random permutation as tie-breaker, so the
        # lowest-degree vertex is uniform among ties and higher-degree vertices
        # serve as fallbacks when a first member is saturated within the batch.
        tiebreak = self._rng.permutation(n)
        order = np.lexsort((tiebreak, degrees))
        for first in order:
            partner = self._draw_partner(int(first), seen)
            if partner is not None:
                return int(first), partner
        return None

    def _draw_partner(self, first: int, seen: set[tuple[int, int]]) -> int | None:
        n = self.graph.n_vertices
        ratings = self.provisional_ratings
        available = np.array(
            [
                v
                for v in range(n)
                if v != first and _canonical(first, v) not in seen
            ],
            dtype=np.int64,
        )
        if available.size == 0:
            return None
        if np.ptp(ratings) == 0:
            # No rating structure yet: quantiles and windows are meaningless.
            return int(self._rng.choice(available))
        if self._rng.random() < 0.5:
            candidates = available[
                self._quantile_bucket(ratings[available])
                == self._quantile_bucket(ratings[first])
            ]
        else:
            candidates = available[
                np.abs(ratings[available] - ratings[first]) <= self.window_width
            ]
        if candidates.size == 0:
            candidates = available
        return int(self._rng.choice(candidates))

    def _quantile_bucket(self, values):
        edges = np.quantile(
            self.provisional_ratings,
            np.linspace(0.0, 1.0, self.quantile_count + 1)[1:-1],
        )
        return np.searchsorted(edges, values, side="right")
