"""Topic models: vocabulary, variational EM, fold-in, candidate matching."""

import numpy as np
import pytest

from subcompose.errors import EmptyVocabulary, InvalidSubsetSize, ModelCorrupt
from subcompose.topics import (
    CandidateSet,
    LdaConfig,
    TopicMixture,
    build_vocabulary,
    infer_mixture,
    infer_mixtures,
    load_model,
    save_model,
    tokenize_for_topics,
    topk_candidates,
    train_lda,
    two_stage_subset,
)


def two_theme_corpus(n_docs=40, seed=3):
    """Half the docs draw from an ocean vocabulary, half from a space one."""
    ocean = ["wave", "tide", "coral", "reef", "fish", "current"]
    space = ["orbit", "star", "nebula", "rocket", "comet", "gravity"]
    rng = np.random.default_rng(seed)
    docs, labels = [], []
    for d in range(n_docs):
        theme = ocean if d % 2 == 0 else space
        docs.append(list(rng.choice(theme, size=12)))
        labels.append(d % 2)
    return docs, labels


class TestTokenize:
    def test_lowercases_and_drops_stopwords(self):
        assert tokenize_for_topics("The Reef THE coral a") == ["reef", "coral"]

    def test_drops_tokens_without_alnum(self):
        assert tokenize_for_topics("wave -- tide") == ["wave", "tide"]


class TestVocabulary:
    def test_min_df_filter(self):
        vocab = build_vocabulary([["a", "b"], ["a", "c"], ["a", "b"]], min_df=2)
        assert set(vocab) == {"a", "b"}

    def test_ids_are_sorted_and_dense(self):
        vocab = build_vocabulary([["b", "a"], ["a", "b"]])
        assert vocab == {"a": 0, "b": 1}

    def test_keep_all_fallback_when_filter_empties(self):
        vocab = build_vocabulary([["a"], ["b"]], min_df=2)
        assert set(vocab) == {"a", "b"}

    def test_empty_corpus_raises(self):
        with pytest.raises(EmptyVocabulary):
            build_vocabulary([[], []])


class TestLdaConfig:
    def test_alpha_defaults_to_50_over_k(self):
        assert LdaConfig(num_topics=100).effective_alpha == pytest.approx(0.5)
        assert LdaConfig(num_topics=10).effective_alpha == pytest.approx(5.0)

    def test_explicit_alpha_wins(self):
        assert LdaConfig(num_topics=10, alpha=0.1).effective_alpha == 0.1

    def test_validation(self):
        with pytest.raises(ValueError):
            LdaConfig(num_topics=0)
        with pytest.raises(ValueError):
            LdaConfig(num_topics=2, alpha=-1.0)
        with pytest.raises(ValueError):
            LdaConfig(num_topics=2, eta=0.0)


class TestTrainLda:
    def test_deterministic_across_runs(self):
        docs, _ = two_theme_corpus(n_docs=10)
        config = LdaConfig(num_topics=3, em_iters=5, seed=42)
        a = train_lda(docs, config)
        b = train_lda(docs, config)
        assert np.array_equal(a.topic_word, b.topic_word)
        assert a.elbo == b.elbo

    def test_seed_changes_model(self):
        docs, _ = two_theme_corpus(n_docs=10)
        a = train_lda(docs, LdaConfig(num_topics=3, em_iters=5, seed=0))
        b = train_lda(docs, LdaConfig(num_topics=3, em_iters=5, seed=1))
        assert not np.array_equal(a.topic_word, b.topic_word)

    def test_rows_are_distributions(self):
        docs, _ = two_theme_corpus(n_docs=10)
        model = train_lda(docs, LdaConfig(num_topics=4, em_iters=10))
        sums = model.topic_word.sum(axis=1)
        assert np.allclose(sums, 1.0, atol=1e-9)
        assert np.all(model.topic_word >= 0)

    def test_elbo_non_decreasing(self):
        docs, _ = two_theme_corpus(n_docs=20)
        model = train_lda(docs, LdaConfig(num_topics=2, em_iters=30, seed=7))
        assert len(model.elbo) == 30
        diffs = np.diff(model.elbo)
        assert np.all(diffs >= -1e-6)

    def test_em_iters_zero_returns_normalized_init(self):
        docs, _ = two_theme_corpus(n_docs=10)
        model = train_lda(docs, LdaConfig(num_topics=3, em_iters=0, seed=5))
        assert model.elbo == ()
        assert np.allclose(model.topic_word.sum(axis=1), 1.0, atol=1e-12)
        rng = np.random.default_rng(5)
        lam = rng.gamma(100.0, 1.0 / 100.0, model.topic_word.shape)
        assert np.allclose(model.topic_word, lam / lam.sum(axis=1, keepdims=True))

    def test_separates_two_disjoint_themes(self):
        docs, labels = two_theme_corpus(n_docs=40, seed=3)
        model = train_lda(docs, LdaConfig(num_topics=2, em_iters=40, seed=0))
        assigned = [int(np.argmax(m.theta)) for m in infer_mixtures(model, docs)]
        agree = sum(a == l for a, l in zip(assigned, labels))
        # topic identity is arbitrary: count the better of the two labelings
        assert max(agree, len(docs) - agree) >= 0.95 * len(docs)

    def test_single_topic(self):
        docs, _ = two_theme_corpus(n_docs=6)
        model = train_lda(docs, LdaConfig(num_topics=1, em_iters=5))
        mix = infer_mixture(model, docs[0])
        assert mix.theta.shape == (1,)
        assert mix.theta[0] == pytest.approx(1.0)

    def test_all_empty_docs_raise(self):
        with pytest.raises(EmptyVocabulary):
            train_lda([[], []], LdaConfig(num_topics=2))


class TestInference:
    def test_theta_sums_to_one(self):
        docs, _ = two_theme_corpus(n_docs=12)
        model = train_lda(docs, LdaConfig(num_topics=3, em_iters=10))
        for mix in infer_mixtures(model, docs):
            assert mix.theta.sum() == pytest.approx(1.0, abs=1e-9)
            assert not mix.oov

    def test_oov_document_gets_uniform_mixture(self):
        docs, _ = two_theme_corpus(n_docs=12)
        model = train_lda(docs, LdaConfig(num_topics=4, em_iters=5))
        mix = infer_mixture(model, ["zzz", "qqq"])
        assert mix.oov
        assert np.allclose(mix.theta, 0.25)

    def test_empty_document_gets_uniform_mixture(self):
        docs, _ = two_theme_corpus(n_docs=12)
        model = train_lda(docs, LdaConfig(num_topics=4, em_iters=5))
        mix = infer_mixture(model, [])
        assert mix.oov

    def test_deterministic(self):
        docs, _ = two_theme_corpus(n_docs=12)
        model = train_lda(docs, LdaConfig(num_topics=3, em_iters=10))
        a = infer_mixture(model, docs[3])
        b = infer_mixture(model, docs[3])
        assert np.array_equal(a.theta, b.theta)


class TestTopkCandidates:
    def mixtures(self, rows):
        return {key: TopicMixture(theta=np.asarray(theta)) for key, theta in rows}

    def test_ranks_by_cosine(self):
        pool = self.mixtures(
            [
                (("doc_a", 0), [1.0, 0.0]),
                (("doc_a", 1), [0.0, 1.0]),
                (("doc_b", 0), [0.7, 0.3]),
            ]
        )
        lecture = [(0, TopicMixture(theta=np.array([1.0, 0.0])))]
        [cset] = topk_candidates(lecture, pool, k=2)
        assert cset.lecture_sentence_id == 0
        assert [(d, s) for d, s, _ in cset.candidates] == [("doc_a", 0), ("doc_b", 0)]
        assert cset.candidates[0][2] == pytest.approx(1.0)

    def test_tie_break_by_doc_then_sentence(self):
        pool = self.mixtures(
            [
                (("doc_b", 0), [0.5, 0.5]),
                (("doc_a", 7), [0.5, 0.5]),
                (("doc_a", 2), [0.5, 0.5]),
            ]
        )
        lecture = [(4, TopicMixture(theta=np.array([0.5, 0.5])))]
        [cset] = topk_candidates(lecture, pool, k=3)
        assert [(d, s) for d, s, _ in cset.candidates] == [
            ("doc_a", 2),
            ("doc_a", 7),
            ("doc_b", 0),
        ]

    def test_k_caps_pool(self):
        pool = self.mixtures([(("d", i), [1.0, 0.0]) for i in range(20)])
        lecture = [(0, TopicMixture(theta=np.array([1.0, 0.0])))]
        [cset] = topk_candidates(lecture, pool)
        assert len(cset.candidates) == 10

    def test_empty_pool(self):
        [cset] = topk_candidates([(0, TopicMixture(theta=np.array([1.0])))], {})
        assert cset.candidates == ()

    def test_k_validation(self):
        with pytest.raises(ValueError):
            topk_candidates([], {}, k=0)


class TestTwoStageSubset:
    def test_picks_matching_documentaries(self):
        docs, _ = two_theme_corpus(n_docs=20, seed=9)
        model = train_lda(docs, LdaConfig(num_topics=2, em_iters=30, seed=1))
        doc_mixes = {
            f"doc{d:02d}": infer_mixture(model, docs[d]) for d in range(len(docs))
        }
        ocean_lecture = ["wave", "reef", "coral", "tide", "fish"] * 3
        subset = two_stage_subset(model, ocean_lecture, doc_mixes, m=5)
        assert len(subset) == 5
        # even doc indices are the ocean documentaries in this corpus
        assert all(int(doc_id[3:]) % 2 == 0 for doc_id in subset)

    def test_m_larger_than_pool_returns_all(self):
        docs, _ = two_theme_corpus(n_docs=6)
        model = train_lda(docs, LdaConfig(num_topics=2, em_iters=5))
        doc_mixes = {"a": infer_mixture(model, docs[0])}
        assert two_stage_subset(model, docs[1], doc_mixes, m=5) == ["a"]

    def test_invalid_subset_size(self):
        docs, _ = two_theme_corpus(n_docs=6)
        model = train_lda(docs, LdaConfig(num_topics=2, em_iters=2))
        with pytest.raises(InvalidSubsetSize):
            two_stage_subset(model, docs[0], {}, m=0)


class TestModelSerialization:
    def test_round_trip(self, tmp_path):
        docs, _ = two_theme_corpus(n_docs=10)
        model = train_lda(docs, LdaConfig(num_topics=3, em_iters=8, seed=2))
        path = str(tmp_path / "model.npz")
        save_model(model, path)
        back = load_model(path)
        assert back.vocabulary == model.vocabulary
        assert np.array_equal(back.topic_word, model.topic_word)
        assert back.alpha == model.alpha
        assert back.inference_tol == model.inference_tol
        assert back.seed == model.seed
        assert back.elbo == model.elbo

    def test_loaded_model_infers_identically(self, tmp_path):
        docs, _ = two_theme_corpus(n_docs=10)
        model = train_lda(docs, LdaConfig(num_topics=3, em_iters=8))
        path = str(tmp_path / "model.npz")
        save_model(model, path)
        back = load_model(path)
        assert np.array_equal(
            infer_mixture(model, docs[1]).theta, infer_mixture(back, docs[1]).theta
        )

    def test_corrupt_payload_rejected(self, tmp_path):
        docs, _ = two_theme_corpus(n_docs=10)
        model = train_lda(docs, LdaConfig(num_topics=3, em_iters=2))
        path = str(tmp_path / "model.npz")
        save_model(model, path)
        data = dict(np.load(path, allow_pickle=False))
        data["topic_word"] = data["topic_word"] * 1.0000001
        np.savez(path, **data)
        with pytest.raises(ModelCorrupt):
            load_model(path)

    def test_unknown_format_version_rejected(self, tmp_path):
        import json

        docs, _ = two_theme_corpus(n_docs=10)
        model = train_lda(docs, LdaConfig(num_topics=3, em_iters=2))
        path = str(tmp_path / "model.npz")
        save_model(model, path)
        data = dict(np.load(path, allow_pickle=False))
        header = json.loads(str(data["header"]))
        header["format_version"] = 99
        data["header"] = np.str_(json.dumps(header))
        np.savez(path, **data)
        with pytest.raises(ModelCorrupt):
            load_model(path)
