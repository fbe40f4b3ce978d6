"""Brute-force reference implementations the fast paths are checked against.

Everything here favors directness over speed: explicit loops, dictionary
cosines, dense matrix inversion. Tests compare module output to these.
"""

from __future__ import annotations

import numpy as np


def brute_cosine(a: dict, b: dict) -> float:
    num = sum(a[t] * b[t] for t in set(a) & set(b))
    na = sum(v * v for v in a.values()) ** 0.5
    nb = sum(v * v for v in b.values()) ** 0.5
    if na == 0.0 or nb == 0.0:
        return 0.0
    return num / (na * nb)


def brute_support_rank(
    vectors: list[dict], threshold: float
) -> tuple[list[tuple[int, float]], bool]:
    """Membership-count ranking; returns (items, degenerate_fallback)."""
    n = len(vectors)
    scores = [
        float(
            sum(
                1
                for i in range(n)
                if i != j and brute_cosine(vectors[i], vectors[j]) > threshold
            )
        )
        for j in range(n)
    ]
    if n > 1 and all(s == 0.0 for s in scores):
        return [(j, 0.0) for j in range(n)], True
    order = sorted(range(n), key=lambda j: (-scores[j], j))
    return [(j, scores[j]) for j in order], False


def brute_grasshopper(
    weights: np.ndarray, k: int, lam: float, prior: np.ndarray | None = None
) -> list[tuple[int, float]]:
    """Absorbing-walk ranking via eigendecomposition and explicit inversion."""
    n = weights.shape[0]
    r = np.full(n, 1.0 / n) if prior is None else np.asarray(prior, dtype=np.float64)
    P = np.zeros((n, n))
    for i in range(n):
        total = weights[i].sum()
        P[i] = weights[i] / total if total > 0 else np.full(n, 1.0 / n)
    P_hat = lam * P + (1.0 - lam) * np.outer(np.ones(n), r)

    eigvals, eigvecs = np.linalg.eig(P_hat.T)
    q = np.real(eigvecs[:, int(np.argmin(np.abs(eigvals - 1.0)))])
    q = q / q.sum()

    def argmax_lowest(values):
        # scores within 1e-9 of the max are ties; break toward lower index
        return int(np.nonzero(values >= np.max(values) - 1e-9)[0][0])

    picked = [argmax_lowest(q)]
    scores = [float(q[picked[0]])]
    while len(picked) < min(k, n):
        survivors = [i for i in range(n) if i not in picked]
        Q = P_hat[np.ix_(survivors, survivors)]
        fundamental = np.linalg.inv(np.eye(len(survivors)) - Q)
        visits = fundamental.T @ np.ones(len(survivors)) / len(survivors)
        best = argmax_lowest(visits)
        picked.append(survivors[best])
        scores.append(float(visits[best]))
    return list(zip(picked, scores))


def brute_topk(
    query: np.ndarray, pool: dict[tuple[str, int], np.ndarray], k: int
) -> list[tuple[str, int, float]]:
    """Full-sort mixture retrieval with (doc, sentence) tie-breaks."""

    def cos(a: np.ndarray, b: np.ndarray) -> float:
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            return 0.0
        return float(a @ b / (na * nb))

    scored = sorted(
        ((cos(query, theta), key) for key, theta in pool.items()),
        key=lambda item: (-item[0], item[1]),
    )
    return [(key[0], key[1], score) for score, key in scored[:k]]


def _uncovered(start: int, end: int, covered: list[tuple[int, int]]):
    parts = []
    cursor = start
    for s, e in sorted(covered):
        if e <= cursor:
            continue
        if s >= end:
            break
        if s > cursor:
            parts.append((cursor, min(s, end)))
        cursor = max(cursor, e)
        if cursor >= end:
            break
    if cursor < end:
        parts.append((cursor, end))
    return parts


def simulate_tribute_fill(
    rank_ordered: list[tuple[int, int, int]], qualifies: list[bool], song_ms: int
) -> tuple[list[tuple[int, int, int]], int]:
    """Hand-rule simulation of threshold + fill + end-trim.

    rank_ordered: (start_ms, end_ms, sentence_id) in rank order.
    Returns admitted clips (in admission order) and the covered total.
    """
    covered: list[tuple[int, int]] = []
    total = 0
    admitted = []
    for (start, end, sent_id), ok in zip(rank_ordered, qualifies):
        if not ok:
            continue
        if total >= song_ms:
            break
        parts = _uncovered(start, end, covered)
        added = sum(e - s for s, e in parts)
        if added == 0:
            continue
        if total + added > song_ms:
            needed = song_ms - total
            acc = 0
            for s, e in parts:
                if acc + (e - s) >= needed:
                    end = s + (needed - acc)
                    break
                acc += e - s
            added = needed
        admitted.append((start, end, sent_id))
        covered.append((start, end))
        total += added
    return admitted, total


def simulate_talk_greedy(
    lecture_ids: list[int],
    candidates_by_sentence: dict[int, list[tuple[str, int]]],
    pool_position: dict[tuple[str, int], int],
) -> list[tuple[int, tuple[str, int] | None]]:
    """Greedy-with-dedup selection; None marks a starved lecture sentence."""
    used: set[tuple[str, int]] = set()
    out = []
    for lecture_id in lecture_ids:
        ordered = sorted(
            candidates_by_sentence.get(lecture_id, []),
            key=lambda key: pool_position[key],
        )
        pick = next((key for key in ordered if key not in used), None)
        if pick is not None:
            used.add(pick)
        out.append((lecture_id, pick))
    return out
