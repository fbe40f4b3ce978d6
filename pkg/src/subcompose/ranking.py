"""Extractive summarizers: support-set centrality and absorbing-walk diversity.

Two rankers share the TF-IDF/cosine plumbing. The support-set ranker scores a
passage by how many other passages' high-similarity neighborhoods it appears
in. The diversity ranker walks a similarity graph, turning already-ranked
items into absorbing states so later picks favor regions the walk has not yet
covered.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels

logger = logging.getLogger(__name__)

SUPPORT_THRESHOLD_DEFAULT = 0.1
GRASSHOPPER_LAMBDA_DEFAULT = 0.95
POWER_ITER_TOL_DEFAULT = 1e-10
MAX_ITERS_DEFAULT = 10_000
TIE_TOL = 1e-9

TermVector = dict[str, float]


@dataclass(frozen=True)
class CorpusStats:
    """External document-frequency table for TF-IDF weighting."""

    num_docs: int
    df: Mapping[str, int]


@dataclass
class RankedList:
    """Ordered (index, score) pairs; indices are unique positions in the input."""

    items: list[tuple[int, float]]
    warnings: tuple[str, ...] = ()

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.items]

    @property
    def degenerate(self) -> bool:
        return any(w.startswith("degenerate-corpus") for w in self.warnings)


@dataclass(frozen=True)
class SimilarityGraph:
    """Symmetric non-negative weight matrix with a zero diagonal."""

    n: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = self.weights
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights shape {w.shape} != ({self.n}, {self.n})")
        if self.n == 0:
            raise ValueError("graph needs at least one node")
        if not np.allclose(w, w.T, atol=1e-9):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("diagonal must be zero")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")


@dataclass(frozen=True)
class GrasshopperConfig:
    k: int
    lam: float = GRASSHOPPER_LAMBDA_DEFAULT
    prior: np.ndarray | None = None  # None = uniform
    power_iter_tol: float = POWER_ITER_TOL_DEFAULT
    max_iters: int = MAX_ITERS_DEFAULT

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.prior is not None:
            p = np.asarray(self.prior, dtype=np.float64)
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ValueError("prior must be a probability vector")
            object.__setattr__(self, "prior", p)


def tokenize(text: str) -> list[str]:
    return text.lower().split()


def tfidf_vectors(
    sentences: Sequence, corpus_stats: CorpusStats | None = None
) -> list[TermVector]:
    """TF-IDF vectors for sentences (objects with .text, or plain strings).

    TF is the raw count; IDF is ln((N+1)/(df+1)) + 1 over the input set unless
    an external document-frequency table is supplied. Sentences with no tokens
    yield an empty vector and are skipped by the graph builders.
    """
    texts = [getattr(s, "text", s) for s in sentences]
    token_lists = [tokenize(t) for t in texts]

    if corpus_stats is None:
        n_docs = len(token_lists)
        df: dict[str, int] = {}
        for tokens in token_lists:
            for term in set(tokens):
                df[term] = df.get(term, 0) + 1
    else:
        n_docs = corpus_stats.num_docs
        df = dict(corpus_stats.df)

    vectors: list[TermVector] = []
    for tokens in token_lists:
        if not tokens:
            vectors.append({})
            continue
        tf: dict[str, int] = {}
        for term in tokens:
            tf[term] = tf.get(term, 0) + 1
        vec = {
            term: count * (math.log((n_docs + 1) / (df.get(term, 0) + 1)) + 1.0)
            for term, count in tf.items()
        }
        vectors.append(vec)
    return vectors


def cosine(a: TermVector, b: TermVector) -> float:
    """Cosine similarity of sparse term vectors; 0.0 when either is all-zero."""
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def _vectors_to_csr(
    vectors: Sequence[TermVector],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """CSR arrays with a canonical (sorted) vocabulary; columns sorted per row."""
    terms = sorted({t for vec in vectors for t in vec})
    vocab = {t: i for i, t in enumerate(terms)}
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    indices: list[int] = []
    data: list[float] = []
    for row, vec in enumerate(vectors):
        cols = sorted((vocab[t], w) for t, w in vec.items())
        indices.extend(c for c, _ in cols)
        data.extend(w for _, w in cols)
        indptr[row + 1] = len(indices)
    return (
        indptr,
        np.asarray(indices, dtype=np.int64),
        np.asarray(data, dtype=np.float64),
        max(len(vocab), 1),
    )


def similarity_matrix(vectors: Sequence[TermVector]) -> np.ndarray:
    """Dense pairwise cosine matrix (unit diagonal for nonzero rows)."""
    indptr, indices, data, n_cols = _vectors_to_csr(vectors)
    return _kernels.pairwise_cosine(indptr, indices, data, len(vectors), n_cols)


def build_similarity_graph(vectors: Sequence[TermVector]) -> SimilarityGraph:
    sims = similarity_matrix(vectors)
    np.fill_diagonal(sims, 0.0)
    return SimilarityGraph(n=len(vectors), weights=sims)


def support_set_rank(
    vectors: Sequence[TermVector],
    threshold: float = SUPPORT_THRESHOLD_DEFAULT,
    cardinality_cap: int | None = None,
) -> RankedList:
    """Rank passages by membership count across all support sets.

    The support set of passage i holds every other passage more similar than
    the threshold (optionally capped to the most similar ones). A passage's
    score is the number of support sets it belongs to; ties break toward the
    earlier passage. An all-zero scoring (nothing similar anywhere) falls back
    to input order and is flagged.
    """
    n = len(vectors)
    if n == 0:
        raise ValueError("no vectors to rank")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    if cardinality_cap is not None and cardinality_cap < 1:
        raise ValueError("cardinality_cap must be >= 1")

    sims = similarity_matrix(vectors)
    scores = [0] * n
    for i in range(n):
        if not vectors[i]:
            continue
        members = [j for j in range(n) if j != i and sims[i, j] > threshold]
        if cardinality_cap is not None and len(members) > cardinality_cap:
            members.sort(key=lambda j: (-sims[i, j], j))
            members = members[:cardinality_cap]
        for j in members:
            scores[j] += 1

    order = sorted(range(n), key=lambda j: (-scores[j], j))
    warnings: tuple[str, ...] = ()
    if n > 1 and all(s == 0 for s in scores):
        order = list(range(n))
        warnings = (
            f"degenerate-corpus: no similarity above threshold {threshold}, "
            "falling back to input order",
        )
        logger.warning(warnings[0])
    return RankedList(items=[(j, float(scores[j])) for j in order], warnings=warnings)


def _transition_matrix(weights: np.ndarray) -> np.ndarray:
    """Row-normalize; rows with zero total weight become uniform."""
    n = weights.shape[0]
    sums = weights.sum(axis=1)
    P = np.empty_like(weights, dtype=np.float64)
    for i in range(n):
        if sums[i] > 0:
            P[i] = weights[i] / sums[i]
        else:
            P[i] = 1.0 / n
    return P


def _argmax_lowest(values: np.ndarray, tol: float = TIE_TOL) -> int:
    """Lowest index within tol of the maximum (scores that close are ties)."""
    cutoff = float(np.max(values)) - tol
    return int(np.nonzero(values >= cutoff)[0][0])


def _stationary_power_iteration(
    P_hat: np.ndarray, tol: float, max_iters: int
) -> tuple[np.ndarray, bool]:
    n = P_hat.shape[0]
    q = np.full(n, 1.0 / n)
    PT = P_hat.T.copy()
    for _ in range(max_iters):
        q_next = PT @ q
        q_next /= q_next.sum()
        if np.abs(q_next - q).sum() < tol:
            return q_next, True
        q = q_next
    return q, False


def grasshopper_rank(graph: SimilarityGraph, config: GrasshopperConfig) -> RankedList:
    """Absorbing-random-walk ranking: maximal diversity, minimal redundancy.

    The first item is the argmax of the stationary distribution of the
    prior-interpolated walk. Each later round absorbs everything ranked so
    far and picks the surviving state with the most expected visits before
    absorption (uniform start over survivors). A singular absorbing system
    (disconnected remainder that cannot reach absorption) falls back to
    ranking the survivors by prior.
    """
    n = graph.n
    if config.k > n:
        raise ValueError(f"k={config.k} exceeds node count {n}")
    r = config.prior if config.prior is not None else np.full(n, 1.0 / n)

    P = _transition_matrix(graph.weights)
    P_hat = config.lam * P + (1.0 - config.lam) * np.outer(np.ones(n), r)

    q, converged = _stationary_power_iteration(
        P_hat, config.power_iter_tol, config.max_iters
    )
    warnings: list[str] = []
    if not converged:
        warnings.append("power-iteration: not converged within max_iters")
        logger.warning(warnings[-1])

    first = _argmax_lowest(q)
    ranked: list[tuple[int, float]] = [(first, float(q[first]))]

    while len(ranked) < config.k:
        ranked_set = {i for i, _ in ranked}
        survivors = [i for i in range(n) if i not in ranked_set]
        Q = P_hat[np.ix_(survivors, survivors)]
        A = np.eye(len(survivors)) - Q
        try:
            visits = np.linalg.solve(A.T, np.ones(len(survivors)))
        except np.linalg.LinAlgError:
            visits = None
        if visits is None or not np.all(np.isfinite(visits)):
            warnings.append(
                "singular-chain: absorbing system unsolvable, ranking remaining "
                "items by prior"
            )
            logger.warning(warnings[-1])
            for i in sorted(survivors, key=lambda i: (-r[i], i)):
                ranked.append((i, float(r[i])))
            ranked = ranked[: config.k]
            break
        visits /= len(survivors)
        best = _argmax_lowest(visits)
        ranked.append((survivors[best], float(visits[best])))

    return RankedList(items=ranked, warnings=tuple(warnings))


def graph_to_text(graph: SimilarityGraph) -> str:
    """Cross-language exchange format: node count, then 'i j weight' triplets."""
    lines = [str(graph.n)]
    for i in range(graph.n):
        for j in range(i + 1, graph.n):
            w = float(graph.weights[i, j])
            if w != 0.0:
                lines.append(f"{i} {j} {w!r}")
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> SimilarityGraph:
    lines = [l for l in text.splitlines() if l.strip()]
    n = int(lines[0])
    weights = np.zeros((n, n))
    for line in lines[1:]:
        i_s, j_s, w_s = line.split()
        i, j, w = int(i_s), int(j_s), float(w_s)
        weights[i, j] = w
        weights[j, i] = w
    return SimilarityGraph(n=n, weights=weights)


def ranking_to_text(ranking: RankedList) -> str:
    return "\n".join(f"{i} {score!r}" for i, score in ranking.items) + "\n"


def ranking_from_text(text: str) -> RankedList:
    items = []
    for line in text.splitlines():
        if line.strip():
            i_s, score_s = line.split()
            items.append((int(i_s), float(score_s)))
    return RankedList(items=items)
