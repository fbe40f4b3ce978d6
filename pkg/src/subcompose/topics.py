"""Latent topic modeling for matching lecture content to documentary footage.

A smoothed topic-mixture model trained with deterministic variational EM.
Documents (whole documentaries, or single sentences, depending on strategy)
become mixtures over latent topics; new text is folded into a trained model
and compared to the collection by mixture cosine. Two retrieval strategies sit
on top: direct sentence-level comparison, and a two-stage variant that first
narrows the collection to the most relevant documentaries.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp, psi

from . import _kernels
from .errors import EmptyVocabulary, InvalidSubsetSize, ModelCorrupt

logger = logging.getLogger(__name__)

TOP_K_DEFAULT = 10
SENTENCE_LEVEL_TOPICS_DEFAULT = 100
DOC_LEVEL_TOPICS_DEFAULT = 100
SUBSET_TOPICS_DEFAULT = 10
SUBSET_SIZE_DEFAULT = 5
MIN_DF_DEFAULT = 2

_INNER_MAX = 200
_MODEL_FORMAT_VERSION = 1

DEFAULT_STOPWORDS = frozenset(
    """a about above after again against all am an and any are as at be because
    been before being below between both but by can did do does doing down
    during each few for from further had has have having he her here hers him
    his how i if in into is it its itself just me more most my myself no nor
    not now of off on once only or other our ours out over own same she so
    some such than that the their theirs them then there these they this those
    through to too under until up very was we were what when where which while
    who whom why will with you your yours""".split()
)


@dataclass(frozen=True)
class LdaConfig:
    num_topics: int
    alpha: float | None = None  # None = 50 / num_topics
    eta: float = 0.01
    em_iters: int = 50
    inference_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_topics < 1:
            raise ValueError("num_topics must be >= 1")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.num_topics


@dataclass
class TopicModel:
    vocabulary: dict[str, int]
    topic_word: np.ndarray  # (num_topics, vocab size), rows sum to 1
    alpha: float
    inference_tol: float
    seed: int
    elbo: tuple[float, ...] = ()

    @property
    def num_topics(self) -> int:
        return self.topic_word.shape[0]


@dataclass(frozen=True)
class TopicMixture:
    theta: np.ndarray  # probabilities over topics, sums to 1
    oov: bool = False  # True when the document had no in-vocabulary token


@dataclass(frozen=True)
class CandidateSet:
    """Top-k documentary sentences for one lecture sentence, best first."""

    lecture_sentence_id: int
    candidates: tuple[tuple[str, int, float], ...]  # (documentary, sentence, score)


def tokenize_for_topics(
    text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS
) -> list[str]:
    """Lowercased tokens with stopwords dropped; assumes punctuation-free text."""
    return [
        tok
        for tok in text.lower().split()
        if tok not in stopwords and any(c.isalnum() for c in tok)
    ]


def build_vocabulary(
    docs: Sequence[Sequence[str]], min_df: int = MIN_DF_DEFAULT
) -> dict[str, int]:
    """Term -> id over terms in >= min_df docs; keeps everything if that empties it."""
    df: dict[str, int] = {}
    for doc in docs:
        for term in set(doc):
            df[term] = df.get(term, 0) + 1
    kept = sorted(t for t, c in df.items() if c >= min_df)
    if not kept:
        kept = sorted(df)
    if not kept:
        raise EmptyVocabulary("no terms in any document")
    return {t: i for i, t in enumerate(kept)}


def _corpus_to_csr(
    docs: Sequence[Sequence[str]], vocabulary: Mapping[str, int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr = np.zeros(len(docs) + 1, dtype=np.int64)
    indices: list[int] = []
    counts: list[float] = []
    for row, doc in enumerate(docs):
        bow: dict[int, int] = {}
        for term in doc:
            tid = vocabulary.get(term)
            if tid is not None:
                bow[tid] = bow.get(tid, 0) + 1
        for tid in sorted(bow):
            indices.append(tid)
            counts.append(float(bow[tid]))
        indptr[row + 1] = len(indices)
    return indptr, np.asarray(indices, dtype=np.int64), np.asarray(counts, dtype=np.float64)


def _dirichlet_elog(x: np.ndarray) -> np.ndarray:
    return psi(x) - psi(x.sum(axis=1))[:, None]


def _elbo(
    indptr: np.ndarray,
    indices: np.ndarray,
    counts: np.ndarray,
    gamma: np.ndarray,
    lambda_: np.ndarray,
    alpha: float,
    eta: float,
) -> float:
    """Evidence lower bound at the optimal per-word assignment.

    The word term collapses the assignment distribution analytically
    (log-sum-exp of expected log-probabilities), so the value is exact for
    the current gamma/lambda state.
    """
    n_topics, n_terms = lambda_.shape
    elog_theta = _dirichlet_elog(gamma)
    elog_beta = _dirichlet_elog(lambda_)

    score = 0.0
    for d in range(len(indptr) - 1):
        s, e = indptr[d], indptr[d + 1]
        if s == e:
            continue
        ids = indices[s:e]
        cts = counts[s:e]
        word_ll = logsumexp(elog_theta[d][:, None] + elog_beta[:, ids], axis=0)
        score += float(cts @ word_ll)

    score += float(np.sum((alpha - gamma) * elog_theta))
    score += float(np.sum(gammaln(gamma) - gammaln(alpha)))
    score += float(np.sum(gammaln(alpha * n_topics) - gammaln(gamma.sum(axis=1))))

    score += float(np.sum((eta - lambda_) * elog_beta))
    score += float(np.sum(gammaln(lambda_) - gammaln(eta)))
    score += float(np.sum(gammaln(eta * n_terms) - gammaln(lambda_.sum(axis=1))))
    return score


def train_lda(docs: Sequence[Sequence[str]], config: LdaConfig) -> TopicModel:
    """Variational EM, deterministic given the seed.

    The E-step warm-starts each document's variational state from the previous
    iteration, which keeps the recorded evidence lower bound non-decreasing;
    the M-step is the exact conjugate update. em_iters=0 returns the seeded
    random initialization (rows normalized).
    """
    if not docs or all(len(d) == 0 for d in docs):
        raise EmptyVocabulary("no non-empty documents")
    vocabulary = build_vocabulary(docs)
    indptr, indices, counts = _corpus_to_csr(docs, vocabulary)

    n_docs = len(docs)
    n_topics = config.num_topics
    n_terms = len(vocabulary)
    alpha = config.effective_alpha

    rng = np.random.default_rng(config.seed)
    lambda_ = rng.gamma(100.0, 1.0 / 100.0, (n_topics, n_terms))

    doc_lengths = np.diff(indptr).astype(np.float64)
    token_totals = np.zeros(n_docs)
    for d in range(n_docs):
        token_totals[d] = counts[indptr[d] : indptr[d + 1]].sum()
    gamma = np.full((n_docs, n_topics), alpha) + (token_totals / n_topics)[:, None]

    elbo_history: list[float] = []
    for _ in range(config.em_iters):
        exp_elog_beta = np.exp(_dirichlet_elog(lambda_))
        gamma, raw_sstats = _kernels.lda_estep(
            indptr,
            indices,
            counts,
            np.ascontiguousarray(exp_elog_beta),
            alpha,
            np.ascontiguousarray(gamma),
            config.inference_tol,
            _INNER_MAX,
        )
        lambda_ = config.eta + raw_sstats * exp_elog_beta
        elbo_history.append(
            _elbo(indptr, indices, counts, gamma, lambda_, alpha, config.eta)
        )

    topic_word = lambda_ / lambda_.sum(axis=1)[:, None]
    return TopicModel(
        vocabulary=vocabulary,
        topic_word=topic_word,
        alpha=alpha,
        inference_tol=config.inference_tol,
        seed=config.seed,
        elbo=tuple(elbo_history),
    )


def infer_mixtures(
    model: TopicModel, docs: Sequence[Sequence[str]]
) -> list[TopicMixture]:
    """Fold documents into a trained model (fixed topic-word distributions).

    Out-of-vocabulary tokens are dropped; a document with no usable token gets
    the uniform mixture and an OOV flag.
    """
    indptr, indices, counts = _corpus_to_csr(docs, model.vocabulary)
    n_topics = model.topic_word.shape[0]
    token_totals = np.array(
        [counts[indptr[d] : indptr[d + 1]].sum() for d in range(len(docs))]
    )
    gamma0 = np.full((len(docs), n_topics), model.alpha) + (
        token_totals / n_topics
    )[:, None]
    gamma, _ = _kernels.lda_estep(
        indptr,
        indices,
        counts,
        np.ascontiguousarray(model.topic_word),
        model.alpha,
        np.ascontiguousarray(gamma0),
        model.inference_tol,
        _INNER_MAX,
    )
    mixtures = []
    for d in range(len(docs)):
        theta = gamma[d] / gamma[d].sum()
        mixtures.append(TopicMixture(theta=theta, oov=token_totals[d] == 0))
    return mixtures


def infer_mixture(model: TopicModel, doc: Sequence[str]) -> TopicMixture:
    return infer_mixtures(model, [doc])[0]


def _mixture_cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b) / (na * nb)


def topk_candidates(
    lecture_mixtures: Sequence[tuple[int, TopicMixture]],
    pool_mixtures: Mapping[tuple[str, int], TopicMixture],
    k: int = TOP_K_DEFAULT,
) -> list[CandidateSet]:
    """Per lecture sentence, the k most mixture-similar pool sentences.

    Ties break by (documentary id, sentence id) ascending, so the result does
    not depend on pool ordering.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    keys = sorted(pool_mixtures)
    pool = np.stack([pool_mixtures[key].theta for key in keys]) if keys else None

    result = []
    for sentence_id, mixture in lecture_mixtures:
        if pool is None:
            result.append(CandidateSet(sentence_id, ()))
            continue
        scored = [
            (_mixture_cosine(mixture.theta, pool[i]), keys[i]) for i in range(len(keys))
        ]
        scored.sort(key=lambda item: (-item[0], item[1]))
        top = tuple(
            (doc_id, sent_id, score) for score, (doc_id, sent_id) in scored[:k]
        )
        result.append(CandidateSet(sentence_id, top))
    return result


def two_stage_subset(
    doc_level_model: TopicModel,
    lecture_tokens: Sequence[str],
    documentary_mixtures: Mapping[str, TopicMixture],
    m: int = SUBSET_SIZE_DEFAULT,
) -> list[str]:
    """The m documentaries whose document-level mixtures best match the lecture."""
    if m < 1:
        raise InvalidSubsetSize(f"subset size must be >= 1, got {m}")
    lecture_mix = infer_mixture(doc_level_model, lecture_tokens)
    scored = sorted(
        documentary_mixtures,
        key=lambda doc_id: (
            -_mixture_cosine(lecture_mix.theta, documentary_mixtures[doc_id].theta),
            doc_id,
        ),
    )
    return scored[:m]


def save_model(model: TopicModel, path: str) -> None:
    """Versioned binary dump with a content checksum."""
    checksum = hashlib.sha256(
        np.ascontiguousarray(model.topic_word).tobytes()
    ).hexdigest()
    header = json.dumps(
        {
            "format_version": _MODEL_FORMAT_VERSION,
            "alpha": model.alpha,
            "inference_tol": model.inference_tol,
            "seed": model.seed,
            "checksum": checksum,
            "elbo": list(model.elbo),
        },
        sort_keys=True,
    )
    vocab_terms = sorted(model.vocabulary, key=model.vocabulary.__getitem__)
    np.savez(
        path,
        header=np.array(header),
        vocabulary=np.array(vocab_terms),
        topic_word=model.topic_word,
    )


def load_model(path: str) -> TopicModel:
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive["header"]))
        if header.get("format_version") != _MODEL_FORMAT_VERSION:
            raise ModelCorrupt(
                f"unsupported model format version {header.get('format_version')}"
            )
        topic_word = np.asarray(archive["topic_word"], dtype=np.float64)
        checksum = hashlib.sha256(
            np.ascontiguousarray(topic_word).tobytes()
        ).hexdigest()
        if checksum != header["checksum"]:
            raise ModelCorrupt("topic-word matrix failed its checksum")
        vocab_terms = [str(t) for t in archive["vocabulary"]]
    return TopicModel(
        vocabulary={t: i for i, t in enumerate(vocab_terms)},
        topic_word=topic_word,
        alpha=float(header["alpha"]),
        inference_tol=float(header["inference_tol"]),
        seed=int(header["seed"]),
        elbo=tuple(float(x) for x in header["elbo"]),
    )
