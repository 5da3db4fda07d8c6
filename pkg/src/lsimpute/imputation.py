"""Impute missing semantic vectors from domain-space neighborhood structure.

The domain space supplies geometry: a graph over its rows is built as the
union of an exact Euclidean minimum spanning tree and a symmetrized
k-nearest-neighbor graph, so every node has degree >= k and the graph is
connected. Each non-anchor row is then expressed as a convex combination of
its graph neighbors (non-negative least squares, normalized to sum 1), and
those weights drive a fixed-point iteration in the semantic space: anchor
rows stay pinned to their known semantic vectors while every other row is
repeatedly replaced by the weighted average of its neighbors. Because rows
are convex combinations, the iteration is non-expansive and every imputed
coordinate stays inside the range spanned by the anchors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .embeddings import AnchorMap, EmbeddingMatrix, find_anchors
from .nnls import nnls

logger = logging.getLogger(__name__)


@dataclass
class LsiConfig:
    k: int = 50              # minimal degree of the neighborhood graph
    eta: float = 1e-4        # stop when the largest per-row change drops below this
    max_iters: int = 10_000
    unreachable_policy: str = "error"  # or "anchor-mean"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.unreachable_policy not in ("error", "anchor-mean"):
            raise ValueError(f"unknown unreachable_policy {self.unreachable_policy!r}")


@dataclass
class NeighborGraph:
    """Symmetric adjacency over domain rows: kNN edges united with MST edges."""

    neighbors: list[np.ndarray]            # sorted neighbor indices per row
    mst_edges: set[tuple[int, int]]        # (i, j) with i < j
    knn_edges: set[tuple[int, int]]

    @property
    def n(self) -> int:
        return len(self.neighbors)

    def edges(self) -> set[tuple[int, int]]:
        return self.mst_edges | self.knn_edges

    def min_degree(self) -> int:
        return min(len(nbrs) for nbrs in self.neighbors)


def _pairwise_sq_distances(x: np.ndarray, block: int = 2048) -> np.ndarray:
    """Exact squared Euclidean distances, computed in row blocks."""
    n = x.shape[0]
    sq = np.einsum("ij,ij->i", x, x)
    out = np.empty((n, n))
    for start in range(0, n, block):
        stop = min(start + block, n)
        chunk = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        np.maximum(chunk, 0.0, out=chunk)
        out[start:stop] = chunk
    np.fill_diagonal(out, 0.0)
    return out


def _prim_mst(dist_sq: np.ndarray) -> set[tuple[int, int]]:
    """Exact MST of the complete distance graph, O(n^2) Prim."""
    n = dist_sq.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    in_tree[0] = True
    best[:] = dist_sq[0]
    parent[:] = 0
    edges: set[tuple[int, int]] = set()
    for _ in range(n - 1):
        masked = np.where(in_tree, np.inf, best)
        v = int(np.argmin(masked))
        u = int(parent[v])
        edges.add((u, v) if u < v else (v, u))
        in_tree[v] = True
        closer = ~in_tree & (dist_sq[v] < best)
        best[closer] = dist_sq[v][closer]
        parent[closer] = v
    return edges


def knn_mst(domain: EmbeddingMatrix, k: int) -> NeighborGraph:
    """Union of the exact Euclidean MST and the symmetrized kNN graph.

    Each row contributes edges to its k nearest rows (ties broken by smaller
    row index); the MST guarantees connectivity, the kNN part guarantees
    minimum degree k.
    """
    n = len(domain)
    if n < 2:
        raise ValueError(f"need at least 2 domain rows, got {n}")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the number of rows n={n}")

    dist_sq = _pairwise_sq_distances(domain.vectors)

    knn_edges: set[tuple[int, int]] = set()
    for i in range(n):
        row = dist_sq[i].copy()
        row[i] = np.inf
        # stable argsort on distance gives the smaller-index tie break for free
        nearest = np.argsort(row, kind="stable")[:k]
        for j in nearest:
            j = int(j)
            knn_edges.add((i, j) if i < j else (j, i))

    mst_edges = _prim_mst(dist_sq)

    adj: list[set[int]] = [set() for _ in range(n)]
    for i, j in knn_edges | mst_edges:
        adj[i].add(j)
        adj[j].add(i)
    neighbors = [np.array(sorted(s), dtype=np.int64) for s in adj]
    return NeighborGraph(neighbors, mst_edges, knn_edges)


@dataclass
class WeightMatrix:
    """Sparse row-stochastic reconstruction weights over domain rows.

    Non-anchor rows hold nonnegative weights on their graph neighbors summing
    to 1; anchor rows are exactly the identity.
    """

    matrix: sp.csr_matrix
    anchor_rows: frozenset[int]
    fallback_rows: list[int] = field(default_factory=list)  # uniform-weight fallbacks

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def row_entries(self, i: int) -> list[tuple[int, float]]:
        start, stop = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return [
            (int(j), float(w))
            for j, w in zip(self.matrix.indices[start:stop], self.matrix.data[start:stop])
        ]


def solve_weights(
    domain: EmbeddingMatrix, graph: NeighborGraph, anchors: set[int]
) -> WeightMatrix:
    """Per-row NNLS against neighbor vectors, normalized to convex weights.

    A row whose NNLS solution is all zero (its vector has no nonnegative
    component on any neighbor) falls back to uniform weights so the matrix
    stays row-stochastic; such rows are logged and recorded.
    """
    n = len(domain)
    if graph.n != n:
        raise ValueError(f"graph has {graph.n} rows, domain has {n}")
    vectors = domain.vectors
    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []
    fallback_rows: list[int] = []

    for i in range(n):
        if i in anchors:
            rows.append(i)
            cols.append(i)
            data.append(1.0)
            continue
        nbrs = graph.neighbors[i]
        x = nnls(vectors[nbrs].T, vectors[i])
        total = x.sum()
        if total <= 0:
            fallback_rows.append(i)
            x = np.full(len(nbrs), 1.0 / len(nbrs))
        else:
            x = x / total
        nz = x > 0
        rows.extend([i] * int(nz.sum()))
        cols.extend(int(j) for j in nbrs[nz])
        data.extend(float(v) for v in x[nz])

    if fallback_rows:
        logger.warning("%d rows fell back to uniform neighbor weights", len(fallback_rows))
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return WeightMatrix(matrix, frozenset(anchors), fallback_rows)


@dataclass
class ImputationResult:
    imputed: EmbeddingMatrix          # non-anchor domain tokens only
    iterations: int
    final_max_change: float
    converged: bool
    fallback_rows: int
    unreachable_tokens: list[str]


def _reachable_from_anchors(weights: WeightMatrix) -> np.ndarray:
    """Nodes with a positive-weight path to some anchor (reverse traversal)."""
    n = weights.n
    reachable = np.zeros(n, dtype=bool)
    anchor_list = list(weights.anchor_rows)
    reachable[anchor_list] = True
    # reverse edges: i depends on j when W[i, j] > 0
    csc = weights.matrix.tocsc()
    frontier = anchor_list
    while frontier:
        nxt = []
        for j in frontier:
            start, stop = csc.indptr[j], csc.indptr[j + 1]
            for i in csc.indices[start:stop]:
                if not reachable[i]:
                    reachable[i] = True
                    nxt.append(int(i))
        frontier = nxt
    return reachable


def impute(
    weights: WeightMatrix,
    anchors: AnchorMap,
    semantic: EmbeddingMatrix,
    domain_tokens: list[str],
    cfg: LsiConfig,
) -> ImputationResult:
    """Fixed-point iteration: rows become weighted averages, anchors stay pinned.

    Non-anchor rows start at the mean of the anchor semantic vectors and are
    updated synchronously (all rows from the previous iterate) until the
    largest per-row max-norm change falls below eta. Anchor semantic vectors
    are reassigned after every step, so they come out bit-identical.
    """
    n = weights.n
    if len(domain_tokens) != n:
        raise ValueError(f"{len(domain_tokens)} domain tokens for {n} weight rows")
    anchor_domain = [d for _, d in anchors.pairs]
    if set(anchor_domain) != set(weights.anchor_rows):
        raise ValueError("anchor map and weight-matrix anchor rows disagree")
    if not anchor_domain:
        raise ValueError("no anchors: nothing pins the semantic space")

    sem_rows = np.array([s for s, _ in anchors.pairs], dtype=np.int64)
    dom_rows = np.array(anchor_domain, dtype=np.int64)
    anchor_vectors = semantic.vectors[sem_rows]

    reachable = _reachable_from_anchors(weights)
    non_anchor = np.array(
        [i for i in range(n) if i not in weights.anchor_rows], dtype=np.int64
    )
    unreachable = [i for i in non_anchor if not reachable[i]]
    unreachable_tokens = [domain_tokens[i] for i in unreachable]
    if unreachable:
        if cfg.unreachable_policy == "error":
            raise ValueError(
                f"{len(unreachable)} nodes cannot reach any anchor through "
                f"positive weights (first: {unreachable_tokens[:5]})"
            )
        logger.warning(
            "%d unreachable nodes kept at the anchor mean", len(unreachable)
        )

    state = np.empty((n, semantic.dim))
    state[:] = anchor_vectors.mean(axis=0)
    state[dom_rows] = anchor_vectors

    w = weights.matrix
    iterations = 0
    max_change = np.inf
    converged = False
    for iterations in range(1, cfg.max_iters + 1):
        nxt = w @ state
        nxt[dom_rows] = anchor_vectors  # exact, not just numerically stable
        if len(non_anchor):
            max_change = float(np.abs(nxt[non_anchor] - state[non_anchor]).max(initial=0.0))
        else:
            max_change = 0.0
        state = nxt
        if max_change < cfg.eta:
            converged = True
            break
    if not converged and len(non_anchor):
        logger.warning(
            "no convergence after %d iterations (last change %.3g)",
            cfg.max_iters, max_change,
        )

    imputed_tokens = [domain_tokens[i] for i in non_anchor]
    imputed = EmbeddingMatrix(imputed_tokens, state[non_anchor])
    return ImputationResult(
        imputed=imputed,
        iterations=iterations if len(non_anchor) else 0,
        final_max_change=max_change if len(non_anchor) else 0.0,
        converged=converged or not len(non_anchor),
        fallback_rows=len(weights.fallback_rows),
        unreachable_tokens=unreachable_tokens,
    )


def lsi_pipeline(
    semantic: EmbeddingMatrix, domain: EmbeddingMatrix, cfg: LsiConfig
) -> ImputationResult:
    """Anchor matching, neighborhood graph, weights, then the fixed-point solve.

    Returns imputed vectors for exactly the domain tokens absent from the
    semantic vocabulary.
    """
    anchors = find_anchors(semantic, domain)
    if len(anchors) == 0:
        raise ValueError("the two vocabularies share no tokens; imputation needs anchors")
    if len(anchors) == len(domain):
        logger.info("domain vocabulary fully covered; nothing to impute")
        return ImputationResult(
            imputed=EmbeddingMatrix([], np.zeros((0, semantic.dim))),
            iterations=0,
            final_max_change=0.0,
            converged=True,
            fallback_rows=0,
            unreachable_tokens=[],
        )
    graph = knn_mst(domain, cfg.k)
    weights = solve_weights(domain, graph, set(anchors.domain_rows()))
    return impute(weights, anchors, semantic, list(domain.tokens), cfg)
