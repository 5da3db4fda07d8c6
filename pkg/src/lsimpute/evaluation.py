"""Word-pair similarity evaluation with bootstrapped Pearson correlations.

Datasets are CSV files of term pairs scored by human annotators for both
similarity and relatedness (scores 0 to 1600). Pairs are classified by the
trained/imputed status of their terms and each subset is scored by the
Pearson correlation between embedding cosine similarities and the human
scores, with bootstrap resampling of the pair list for uncertainty.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingMatrix, normalize_label

logger = logging.getLogger(__name__)

SCORE_MIN, SCORE_MAX = 0.0, 1600.0
LOW_N_THRESHOLD = 10
SCORE_TYPES = ("similarity", "relatedness")
SUBSET_NAMES = ("trained/trained", "imputed/trained", "imputed/imputed")


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class WordPair:
    term1: str
    term2: str
    similarity: float
    relatedness: float


@dataclass
class WordPairDataset:
    records: list[WordPair]

    def __len__(self) -> int:
        return len(self.records)

    def terms(self) -> set[str]:
        out: set[str] = set()
        for r in self.records:
            out.add(r.term1)
            out.add(r.term2)
        return out


def load_wordpair_dataset(path: str) -> WordPairDataset:
    """CSV with header Term1,Term2,Similarity,Relatedness; terms get normalized."""
    records: list[WordPair] = []
    seen: set[frozenset[str]] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:4]] != [
            "term1", "term2", "similarity", "relatedness",
        ]:
            raise DatasetFormatError(
                f"{path}:1: expected header Term1,Term2,Similarity,Relatedness"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) < 4:
                raise DatasetFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            t1 = normalize_label(row[0].strip())
            t2 = normalize_label(row[1].strip())
            if not t1 or not t2:
                raise DatasetFormatError(f"{path}:{lineno}: empty term")
            try:
                sim, rel = float(row[2]), float(row[3])
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: non-numeric score") from None
            for score in (sim, rel):
                if not (SCORE_MIN <= score <= SCORE_MAX):
                    raise DatasetFormatError(
                        f"{path}:{lineno}: score {score} outside [{SCORE_MIN}, {SCORE_MAX}]"
                    )
            key = frozenset((t1, t2))
            if key in seen:
                raise DatasetFormatError(f"{path}:{lineno}: duplicate pair {t1!r}, {t2!r}")
            seen.add(key)
            if t1 == t2:
                logger.info("pair with identical normalized terms kept: %r", t1)
            records.append(WordPair(t1, t2, sim, rel))
    return WordPairDataset(records)


def split_vocab(dataset_terms: set[str], seed: int) -> tuple[set[str], set[str]]:
    """Seeded uniform partition into two groups whose sizes differ by at most 1."""
    ordered = sorted(dataset_terms)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ordered))
    half = (len(ordered) + 1) // 2
    trained = {ordered[i] for i in perm[:half]}
    imputed = {ordered[i] for i in perm[half:]}
    return trained, imputed


@dataclass
class PairSplit:
    subsets: dict[str, list[WordPair]]  # keyed by SUBSET_NAMES
    skipped: list[WordPair] = field(default_factory=list)


def classify_pairs(
    dataset: WordPairDataset, trained_vocab: set[str], imputed_vocab: set[str]
) -> PairSplit:
    """Assign each pair by the membership of its two terms; rest go to skipped."""
    overlap = trained_vocab & imputed_vocab
    if overlap:
        raise ValueError(f"vocabulary sets overlap on {len(overlap)} terms")
    split = PairSplit({name: [] for name in SUBSET_NAMES})
    for rec in dataset.records:
        in_t = (rec.term1 in trained_vocab, rec.term2 in trained_vocab)
        in_i = (rec.term1 in imputed_vocab, rec.term2 in imputed_vocab)
        if (in_t[0] or in_i[0]) and (in_t[1] or in_i[1]):
            if all(in_t):
                split.subsets["trained/trained"].append(rec)
            elif all(in_i):
                split.subsets["imputed/imputed"].append(rec)
            else:
                split.subsets["imputed/trained"].append(rec)
        else:
            split.skipped.append(rec)
    return split


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(u @ v / (nu * nv))


def pearson(xs: np.ndarray, ys: np.ndarray) -> float:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("pearson needs two equal-length 1-d arrays")
    if len(xs) < 2:
        raise ValueError(f"pearson needs at least 2 points, got {len(xs)}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0 or sy == 0:
        raise ValueError("pearson is undefined for constant input")
    return float(dx @ dy / np.sqrt(sx * sy))


@dataclass
class SubsetScore:
    n: int
    r: float | None
    boot_mean: float | None
    boot_std: float | None
    low_n: bool
    degenerate_resamples: int = 0
    reason: str | None = None  # why not evaluable, when r is None


@dataclass
class EvalReport:
    scores: dict[str, dict[str, SubsetScore]]  # subset -> score_type -> result
    skipped_pairs: int
    missing_vector_pairs: dict[str, int]       # per subset, pairs lacking a vector

    def evaluable(self) -> bool:
        return any(
            cell.r is not None
            for per_subset in self.scores.values()
            for cell in per_subset.values()
        )

    def to_json(self) -> str:
        payload = {
            "subsets": {
                subset: {
                    score: {
                        "r": cell.r,
                        "boot_mean": cell.boot_mean,
                        "boot_std": cell.boot_std,
                        "n": cell.n,
                        "low_n": cell.low_n,
                        "degenerate_resamples": cell.degenerate_resamples,
                        "reason": cell.reason,
                    }
                    for score, cell in per_subset.items()
                }
                for subset, per_subset in self.scores.items()
            },
            "skipped_pairs": self.skipped_pairs,
            "missing_vector_pairs": self.missing_vector_pairs,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_table(self) -> str:
        lines = [f"{'subset':<18} {'score':<12} {'n':>5} {'r':>8} {'boot_mean':>10} {'boot_std':>9}"]
        for subset, per_subset in self.scores.items():
            for score, cell in per_subset.items():
                if cell.r is None:
                    lines.append(f"{subset:<18} {score:<12} {cell.n:>5} {'-':>8} "
                                 f"{'-':>10} {'-':>9}  ({cell.reason})")
                else:
                    flag = " low-n" if cell.low_n else ""
                    lines.append(
                        f"{subset:<18} {score:<12} {cell.n:>5} {cell.r:>8.4f} "
                        f"{cell.boot_mean:>10.4f} {cell.boot_std:>9.4f}{flag}"
                    )
        lines.append(f"skipped pairs (term in neither vocabulary): {self.skipped_pairs}")
        return "\n".join(lines)


def _score_subset(
    human: np.ndarray, cosines: np.ndarray, n_resamples: int, seed: int
) -> SubsetScore:
    n = len(human)
    if n < 2:
        return SubsetScore(n, None, None, None, True, reason=f"only {n} evaluable pairs")
    try:
        point = pearson(cosines, human)
    except ValueError as exc:
        return SubsetScore(n, None, None, None, n < LOW_N_THRESHOLD, reason=str(exc))

    values = []
    degenerate = 0
    for i in range(n_resamples):
        rng = np.random.default_rng([seed, i])
        idx = rng.integers(0, n, size=n)
        try:
            values.append(pearson(cosines[idx], human[idx]))
        except ValueError:
            degenerate += 1
    if values:
        arr = np.array(values)
        boot_mean, boot_std = float(arr.mean()), float(arr.std())
    else:
        boot_mean = boot_std = None
    return SubsetScore(
        n, point, boot_mean, boot_std,
        low_n=n < LOW_N_THRESHOLD,
        degenerate_resamples=degenerate,
    )


def bootstrap_eval(
    embedding: EmbeddingMatrix,
    split: PairSplit,
    n_resamples: int = 1000,
    seed: int = 0,
) -> EvalReport:
    """Point Pearson r per subset and score type, plus bootstrap mean and std.

    Resampling draws pair records with replacement; each resample uses an RNG
    stream keyed by (seed, resample index) so reports are reproducible and
    independent of evaluation order. Pairs with a term missing from the
    embedding are dropped and counted per subset.
    """
    scores: dict[str, dict[str, SubsetScore]] = {}
    missing: dict[str, int] = {}
    for subset, records in split.subsets.items():
        usable = [r for r in records if r.term1 in embedding and r.term2 in embedding]
        missing[subset] = len(records) - len(usable)
        if missing[subset]:
            logger.info("%s: %d pairs lack an embedding vector", subset, missing[subset])
        cosines = np.array(
            [cosine_similarity(embedding.row(r.term1), embedding.row(r.term2)) for r in usable]
        )
        scores[subset] = {}
        for score_type in SCORE_TYPES:
            human = np.array([getattr(r, score_type) for r in usable])
            scores[subset][score_type] = _score_subset(human, cosines, n_resamples, seed)
    return EvalReport(scores, len(split.skipped), missing)
