"""Second-order biased random walks over a labeled graph.

Transition weights follow the three-case rule for a walk that moved t -> v
and now picks the next node x among v's neighbors: 1/p if x == t (return),
1 if x is adjacent to t, 1/q otherwise. Each (t -> v) state gets an alias
table so sampling is O(1) per step; walks dominate runtime on graphs with
tens of thousands of nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .embeddings import normalize_label
from .graph import LabeledGraph

logger = logging.getLogger(__name__)


@dataclass
class WalkConfig:
    p: float = 0.5  # return parameter
    q: float = 0.5  # inout parameter
    n_walks: int = 10
    walk_length: int = 80
    seed: int = 1

    def __post_init__(self) -> None:
        if self.p <= 0 or self.q <= 0:
            raise ValueError(f"p and q must be positive, got p={self.p} q={self.q}")
        if self.n_walks < 1:
            raise ValueError(f"n_walks must be >= 1, got {self.n_walks}")
        if self.walk_length < 2:
            raise ValueError(f"walk_length must be >= 2, got {self.walk_length}")


@dataclass(frozen=True)
class AliasTable:
    """Vose alias table for a fixed categorical distribution."""

    prob: np.ndarray   # (n,) acceptance probabilities
    alias: np.ndarray  # (n,) fallback outcomes
    probabilities: np.ndarray  # (n,) the normalized distribution, kept for audit

    def sample(self, rng: np.random.Generator) -> int:
        i = int(rng.integers(len(self.prob)))
        if rng.random() < self.prob[i]:
            return i
        return int(self.alias[i])


def build_alias_table(weights: np.ndarray) -> AliasTable:
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if len(weights) == 0 or total <= 0:
        raise ValueError("alias table needs at least one positive weight")
    probs = weights / total
    n = len(probs)
    scaled = probs * n
    prob = np.zeros(n)
    alias = np.zeros(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] - (1.0 - scaled[s])
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for i in large + small:
        prob[i] = 1.0
    return AliasTable(prob, alias, probs)


@dataclass
class WalkSampler:
    """First-step tables per node and second-order tables per directed edge."""

    neighbors: list[np.ndarray]
    node_tables: dict[int, AliasTable]
    edge_tables: dict[tuple[int, int], AliasTable]
    active_nodes: list[int]  # nodes with degree >= 1, walk start points


def build_transition_tables(g: LabeledGraph, cfg: WalkConfig) -> WalkSampler:
    """Alias tables for every node and every directed edge (t -> v)."""
    if g.n_nodes == 0:
        raise ValueError("graph is empty")
    adj = [np.array(nbrs, dtype=np.int64) for nbrs in g.neighbor_lists()]
    neighbor_sets = [set(nbrs.tolist()) for nbrs in adj]

    isolated = [i for i in range(g.n_nodes) if len(adj[i]) == 0]
    if isolated:
        logger.warning("%d isolated nodes excluded from walks", len(isolated))
    active = [i for i in range(g.n_nodes) if len(adj[i]) > 0]

    node_tables: dict[int, AliasTable] = {}
    for v in active:
        node_tables[v] = build_alias_table(np.ones(len(adj[v])))

    edge_tables: dict[tuple[int, int], AliasTable] = {}
    for v in active:
        for t in adj[v]:
            t = int(t)
            weights = np.empty(len(adj[v]))
            t_nbrs = neighbor_sets[t]
            for k, x in enumerate(adj[v]):
                x = int(x)
                if x == t:
                    weights[k] = 1.0 / cfg.p
                elif x in t_nbrs:
                    weights[k] = 1.0
                else:
                    weights[k] = 1.0 / cfg.q
            edge_tables[(t, v)] = build_alias_table(weights)

    return WalkSampler(adj, node_tables, edge_tables, active)


def transition_probabilities(s: WalkSampler, t: int, v: int) -> np.ndarray:
    """Normalized transition distribution over v's neighbors for state (t -> v)."""
    return s.edge_tables[(t, v)].probabilities


def _single_walk(s: WalkSampler, start: int, length: int, rng: np.random.Generator) -> list[int]:
    walk = [start]
    while len(walk) < length:
        cur = walk[-1]
        nbrs = s.neighbors[cur]
        if len(nbrs) == 0:
            break
        if len(walk) == 1:
            nxt = int(nbrs[s.node_tables[cur].sample(rng)])
        else:
            prev = walk[-2]
            nxt = int(nbrs[s.edge_tables[(prev, cur)].sample(rng)])
        walk.append(nxt)
    return walk


def node_tokens(g: LabeledGraph) -> list[str]:
    """Normalized label per node, one token per node.

    When two nodes normalize to the same token, the node with the
    lexicographically smallest ID keeps it; the others get a node-ID suffix
    so they stay distinct in the walk corpus (and never match a vocabulary
    downstream). Collisions are logged.
    """
    tokens = [normalize_label(label) for label in g.labels]
    owners: dict[str, int] = {}
    for i, tok in enumerate(tokens):
        if tok not in owners or g.node_ids[i] < g.node_ids[owners[tok]]:
            owners[tok] = i
    collisions = 0
    for i, tok in enumerate(tokens):
        if owners[tok] != i:
            tokens[i] = f"{tok}#{g.node_ids[i]}"
            collisions += 1
    if collisions:
        logger.warning(
            "%d nodes share a normalized label with a smaller-ID node; "
            "their tokens carry a node-ID suffix", collisions,
        )
    return tokens


def generate_walks(s: WalkSampler, g: LabeledGraph, cfg: WalkConfig) -> list[list[str]]:
    """n_walks walks per non-isolated node, as normalized-label token sequences.

    Each walk draws from its own RNG stream keyed by (seed, node, walk index),
    so results do not depend on scheduling order.
    """
    tokens = node_tokens(g)
    corpus: list[list[str]] = []
    for walk_idx in range(cfg.n_walks):
        for node in s.active_nodes:
            rng = np.random.default_rng([cfg.seed, node, walk_idx])
            walk = _single_walk(s, node, cfg.walk_length, rng)
            corpus.append([tokens[i] for i in walk])
    return corpus


def write_corpus(corpus: list[list[str]], path: str) -> None:
    """One walk or sentence per line, space-separated tokens."""
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in corpus:
            fh.write(" ".join(sentence) + "\n")


def read_corpus(path: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh if line.strip()]
