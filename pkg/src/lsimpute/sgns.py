"""Skip-gram with negative sampling, trained with plain numpy.

One trainer covers both inputs: random-walk corpora from a graph and text
corpora. Updates are applied center by center, with each center's contexts
and negatives handled in one vectorized batch; that keeps the usual SGD
self-limiting behavior while avoiding a per-pair Python loop.

Conventions follow the word2vec lineage: negative-sampling noise is the
unigram distribution raised to 0.75, frequent tokens are down-sampled with
threshold `sample`, the effective window per center is uniform on
[1, window], and the learning rate decays linearly from alpha to alpha/10
over the whole run.
"""

from __future__ import annotations

import logging
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .embeddings import EmbeddingMatrix

logger = logging.getLogger(__name__)


@dataclass
class SgnsConfig:
    dim: int = 200
    epochs: int = 10
    negative: int = 10
    alpha: float = 0.05
    sample: float = 1e-4  # subsampling threshold; 0 disables
    window: int = 30
    min_count: int = 5
    seed: int = 1
    workers: int = 1  # >1 = lock-free threads, reproducibility not guaranteed

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.negative < 1:
            raise ValueError(f"negative must be >= 1, got {self.negative}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass
class SgnsResult:
    embeddings: EmbeddingMatrix  # input vectors over the retained vocabulary
    epoch_loss: list[float]      # mean negative log-likelihood per trained pair


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return expit(x)


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    # log sigma(x) = -log(1 + exp(-x)), stable for large |x|
    return -np.logaddexp(0.0, -x)


def sgns_pair_gradient(
    center: np.ndarray,
    context: np.ndarray,
    negatives: np.ndarray,
    label: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradient of the log-likelihood of one training example.

    The objective is label*log sigma(c.o) + (1-label)*log sigma(-c.o)
    + sum_i log sigma(-c.n_i). Returns gradients with respect to the center
    vector, the context vector, and each negative vector (ascent directions;
    the SGD update adds alpha times these).
    """
    center = np.asarray(center, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    negatives = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    g_pair = label - _sigmoid(center @ context)
    g_neg = -_sigmoid(negatives @ center)  # (k,)
    grad_center = g_pair * context + g_neg @ negatives
    grad_context = g_pair * center
    grad_negatives = g_neg[:, None] * center[None, :]
    return grad_center, grad_context, grad_negatives


def build_vocabulary(corpus: Sequence[list[str]], min_count: int) -> tuple[list[str], np.ndarray]:
    """Retained tokens sorted by descending count (ties by token), with counts."""
    counts = Counter()
    for sentence in corpus:
        counts.update(sentence)
    kept = sorted(
        ((tok, c) for tok, c in counts.items() if c >= min_count),
        key=lambda tc: (-tc[1], tc[0]),
    )
    if not kept:
        raise ValueError(f"vocabulary is empty after min_count={min_count}")
    tokens = [t for t, _ in kept]
    return tokens, np.array([c for _, c in kept], dtype=np.float64)


def _noise_cumulative(counts: np.ndarray, power: float = 0.75) -> np.ndarray:
    weights = counts**power
    cum = np.cumsum(weights / weights.sum())
    cum[-1] = 1.0  # cumsum can land a hair under 1; draws must never index past the end
    return cum


def _keep_probabilities(counts: np.ndarray, sample: float) -> np.ndarray:
    if sample <= 0:
        return np.ones_like(counts)
    freq = counts / counts.sum()
    keep = (np.sqrt(freq / sample) + 1.0) * (sample / freq)
    return np.minimum(keep, 1.0)


def _train_sentence(
    ids: np.ndarray,
    w_in: np.ndarray,
    w_out: np.ndarray,
    noise_cum: np.ndarray,
    keep_prob: np.ndarray,
    negative: int,
    window: int,
    alpha: float,
    rng: np.random.Generator,
    track_loss: bool = False,
) -> tuple[float, int]:
    """SGD over one sentence, one batched update per center; returns (loss sum, pairs)."""
    if len(ids) > 0:
        ids = ids[rng.random(len(ids)) < keep_prob[ids]]
    n = len(ids)
    if n < 2:
        return 0.0, 0

    # fix all pairs and negative draws up front; updates still run center by
    # center against current parameters, so SGD keeps its self-limiting step
    spans = rng.integers(1, window + 1, size=n)
    bounds = []
    contexts_l = []
    for pos in range(n):
        b = int(spans[pos])
        lo, hi = max(0, pos - b), min(n, pos + b + 1)
        ctx = np.concatenate([ids[lo:pos], ids[pos + 1 : hi]])
        bounds.append(len(ctx))
        contexts_l.append(ctx)
    contexts_all = np.concatenate(contexts_l)
    total = len(contexts_all)
    if total == 0:
        return 0.0, 0

    negs = noise_cum.searchsorted(rng.random((total, negative)))
    bad = negs == contexts_all[:, None]
    for _ in range(16):  # resample collisions; give up for degenerate vocabularies
        if not bad.any():
            break
        negs[bad] = noise_cum.searchsorted(rng.random(int(bad.sum())))
        bad = negs == contexts_all[:, None]
    # outputs per context: the positive first, then its negatives
    out_all = np.concatenate([contexts_all[:, None], negs], axis=1).reshape(-1)

    width = negative + 1
    id_list = ids.tolist()
    loss_sum = 0.0
    offset = 0
    for pos in range(n):
        count = bounds[pos]
        if count == 0:
            continue
        out_idx = out_all[offset * width : (offset + count) * width]
        offset += count
        center = id_list[pos]
        u = w_out[out_idx]            # (count*(k+1), d), a gathered copy
        v = w_in[center]
        scores = u.dot(v)
        if track_loss:
            signed = -scores
            signed[::width] = scores[::width]
            loss_sum -= float(_log_sigmoid(signed).sum())
        # g = alpha * (label - sigmoid): labels are 1 at each positive slot, else 0
        g = _sigmoid(scores)
        g[::width] -= 1.0
        g *= -alpha
        # both gradients use pre-update values: u is a copy, v is read first
        np.add.at(w_out, out_idx, g[:, None] * v[None, :])
        w_in[center] = v + g.dot(u)
    return loss_sum, total


def train_sgns_full(
    corpus: Sequence[list[str]], cfg: SgnsConfig, track_loss: bool = True
) -> SgnsResult:
    """Train and return both the embedding matrix and the per-epoch loss curve."""
    tokens, counts = build_vocabulary(corpus, cfg.min_count)
    index = {t: i for i, t in enumerate(tokens)}
    sentences = [
        np.array([index[t] for t in sent if t in index], dtype=np.int64)
        for sent in corpus
    ]
    sentences = [s for s in sentences if len(s) > 0]
    if not sentences:
        raise ValueError("corpus is empty")

    noise_cum = _noise_cumulative(counts)
    keep_prob = _keep_probabilities(counts, cfg.sample)

    rng = np.random.default_rng(cfg.seed)
    w_in = (rng.random((len(tokens), cfg.dim)) - 0.5) / cfg.dim
    w_out = np.zeros((len(tokens), cfg.dim))

    total_sentences = cfg.epochs * len(sentences)
    alpha_min = cfg.alpha / 10.0
    epoch_loss: list[float] = []

    if cfg.workers > 1:
        _train_hogwild(sentences, w_in, w_out, noise_cum, keep_prob, cfg, epoch_loss, track_loss)
    else:
        processed = 0
        for epoch in range(cfg.epochs):
            loss_sum = 0.0
            pair_count = 0
            for ids in sentences:
                alpha = cfg.alpha - (cfg.alpha - alpha_min) * (processed / total_sentences)
                loss, pairs = _train_sentence(
                    ids, w_in, w_out, noise_cum, keep_prob,
                    cfg.negative, cfg.window, alpha, rng, track_loss,
                )
                loss_sum += loss
                pair_count += pairs
                processed += 1
            if track_loss:
                epoch_loss.append(loss_sum / max(pair_count, 1))
                logger.debug("epoch %d: mean pair loss %.6f", epoch, epoch_loss[-1])

    return SgnsResult(EmbeddingMatrix(tokens, w_in), epoch_loss)


def _train_hogwild(
    sentences: list[np.ndarray],
    w_in: np.ndarray,
    w_out: np.ndarray,
    noise_cum: np.ndarray,
    keep_prob: np.ndarray,
    cfg: SgnsConfig,
    epoch_loss: list[float],
    track_loss: bool,
) -> None:
    """Lock-free threaded training: races are tolerated, results vary run to run."""
    alpha_min = cfg.alpha / 10.0
    total = cfg.epochs * len(sentences)
    chunks = [sentences[w :: cfg.workers] for w in range(cfg.workers)]
    losses = [0.0] * cfg.workers
    pairs = [0] * cfg.workers

    for epoch in range(cfg.epochs):
        def worker(w: int) -> None:
            rng = np.random.default_rng([cfg.seed, epoch, w])
            done = epoch * len(sentences)
            for ids in chunks[w]:
                alpha = cfg.alpha - (cfg.alpha - alpha_min) * (done / total)
                loss, n = _train_sentence(
                    ids, w_in, w_out, noise_cum, keep_prob,
                    cfg.negative, cfg.window, alpha, rng, track_loss,
                )
                losses[w] += loss
                pairs[w] += n
                done += cfg.workers

        threads = [threading.Thread(target=worker, args=(w,)) for w in range(cfg.workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if track_loss:
            epoch_loss.append(sum(losses) / max(sum(pairs), 1))
        for w in range(cfg.workers):
            losses[w] = 0.0
            pairs[w] = 0


def train_sgns(corpus: Sequence[list[str]], cfg: SgnsConfig) -> EmbeddingMatrix:
    """Train skip-gram embeddings; returns the input-vector matrix."""
    return train_sgns_full(corpus, cfg, track_loss=False).embeddings
