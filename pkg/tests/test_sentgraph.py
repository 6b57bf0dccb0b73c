import math

import numpy as np
import pytest

from discoscore.corpus import NOUN, OTHER
from discoscore.embeddings import EmbeddingError
from discoscore.focus import extract_nn_foci
from discoscore.sentgraph import (
    UNWEIGHTED,
    WEIGHTED,
    ZeroGraphEmbedding,
    aggregate,
    build_sentence_graph,
    ds_sent,
    ds_sent_multi_ref,
    graph_embedding,
    sentence_embeddings,
    shared_focus_counts,
)

from conftest import embed_doc, make_doc, random_doc


def three_sentence_doc(**kwargs):
    """All three sentence pairs share at least one focus."""
    return make_doc(
        [
            [("team", NOUN), ("won", OTHER)],
            [("team", NOUN), ("goal", NOUN)],
            [("goal", NOUN), ("team", NOUN)],
        ],
        **kwargs,
    )


class TestBuildSentenceGraph:
    def test_unweighted_golden_three_sentences(self):
        doc = three_sentence_doc()
        graph = build_sentence_graph(doc, extract_nn_foci(doc), UNWEIGHTED)
        assert graph.adjacency.tolist() == [
            [0.0, 1.0, 0.5],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0],
        ]

    def test_weighted_counts_shared_foci(self):
        doc = three_sentence_doc()
        graph = build_sentence_graph(doc, extract_nn_foci(doc), WEIGHTED)
        # sentences 2 and 3 share both "team" and "goal"
        assert graph.adjacency.tolist() == [
            [0.0, 1.0, 0.5],
            [0.0, 0.0, 2.0],
            [0.0, 0.0, 0.0],
        ]

    def test_no_shared_foci_gives_zero_matrix(self):
        doc = make_doc([[("team", NOUN)], [("goal", NOUN)]])
        graph = build_sentence_graph(doc, extract_nn_foci(doc), UNWEIGHTED)
        assert not graph.adjacency.any()

    def test_strict_upper_triangularity(self, rng):
        for i in range(60):
            doc = random_doc(rng, doc_id=f"g{i}")
            for variant in (UNWEIGHTED, WEIGHTED):
                A = build_sentence_graph(doc, extract_nn_foci(doc), variant).adjacency
                assert np.array_equal(np.tril(A), np.zeros_like(A))
                assert np.all(np.isfinite(A))
                assert A.min() >= 0.0

    def test_unweighted_entries_are_inverse_distance_or_zero(self, rng):
        for i in range(30):
            doc = random_doc(rng, doc_id=f"u{i}")
            A = build_sentence_graph(doc, extract_nn_foci(doc), UNWEIGHTED).adjacency
            n = doc.sentence_count
            for a in range(n):
                for b in range(a + 1, n):
                    assert A[a, b] in (0.0, 1.0 / (b - a))

    def test_shared_counts_from_member_sentences(self):
        doc = three_sentence_doc()
        counts = shared_focus_counts(doc, extract_nn_foci(doc))
        assert counts[0, 1] == 1 and counts[0, 2] == 1 and counts[1, 2] == 2


class TestSentenceEmbeddings:
    def test_single_token_sentence_copies_row(self):
        doc = make_doc([[("team", NOUN)]])
        Z = np.array([[4.0, 7.0]])
        assert np.array_equal(sentence_embeddings(doc, Z), [[4.0, 7.0]])

    def test_mean_of_token_rows(self):
        doc = make_doc([[("a", OTHER), ("b", OTHER)]])
        Z = np.array([[1.0, 0.0], [0.0, 2.0]])
        assert np.array_equal(sentence_embeddings(doc, Z), [[0.5, 1.0]])

    def test_external_vectors_pass_through(self):
        doc = make_doc([[("a", OTHER)], [("b", OTHER)]])
        external = np.array([[9.0, 9.0], [8.0, 8.0]])
        out = sentence_embeddings(doc, None, sentence_vectors=external)
        assert np.array_equal(out, external)

    def test_wrong_external_shape_rejected(self):
        doc = make_doc([[("a", OTHER)]])
        with pytest.raises(EmbeddingError):
            sentence_embeddings(doc, None, sentence_vectors=np.ones((3, 2)))


class TestAggregate:
    def test_zero_adjacency_is_identity(self):
        S = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(aggregate(S, np.zeros((2, 2))), S)

    def test_single_sentence(self):
        S = np.array([[5.0, 6.0]])
        assert np.array_equal(aggregate(S, np.zeros((1, 1))), S)

    def test_known_product(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        S = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert np.array_equal(aggregate(S, A), [[1.0, 1.0], [0.0, 1.0]])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            aggregate(np.ones((3, 2)), np.zeros((2, 2)))


class TestGraphEmbedding:
    def test_single_row_repeats_four_times(self):
        g = graph_embedding(np.array([[1.0, 2.0]]))
        assert g.tolist() == [1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]

    def test_column_statistics_order(self):
        g = graph_embedding(np.array([[1.0, 0.0], [3.0, 2.0]]))
        assert g.tolist() == [2.0, 1.0, 3.0, 2.0, 1.0, 0.0, 4.0, 2.0]

    def test_all_zero_rows_give_zero_vector(self):
        g = graph_embedding(np.zeros((3, 5)))
        assert g.shape == (20,)
        assert not g.any()


class TestDsSent:
    def test_identical_documents_score_one(self, rng):
        doc = random_doc(rng, doc_id="s-id")
        Z = embed_doc(doc)
        assert ds_sent(doc, doc, Z, Z) == pytest.approx(1.0, abs=1e-9)

    def test_antipodal_embeddings_score_minus_one(self):
        hyp = make_doc([[("team", NOUN)]])
        ref = make_doc([[("team", NOUN)]], kind="reference")
        Z = np.array([[1.0, 2.0]])
        assert ds_sent(hyp, ref, Z, -Z) == pytest.approx(-1.0, abs=1e-12)

    def test_cosine_matches_scalar_oracle(self):
        hyp = make_doc([[("team", NOUN)]])
        ref = make_doc([[("team", NOUN)]], kind="reference")
        got = ds_sent(hyp, ref, np.array([[1.0, 0.0]]), np.array([[1.0, 1.0]]))
        assert got == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)

    def test_zero_embedding_error_names_document(self):
        hyp = make_doc([[("team", NOUN)]], doc_id="culprit")
        ref = make_doc([[("team", NOUN)]], kind="reference")
        with pytest.raises(ZeroGraphEmbedding, match="culprit"):
            ds_sent(hyp, ref, np.zeros((1, 3)), np.ones((1, 3)))

    def test_scale_invariance(self, rng):
        for i in range(20):
            hyp = random_doc(rng, doc_id=f"sc{i}")
            ref = random_doc(rng, doc_id=f"sr{i}", kind="reference")
            Zh, Zr = embed_doc(hyp), embed_doc(ref)
            base = ds_sent(hyp, ref, Zh, Zr)
            for c in (0.5, 2.0, 10.0):
                assert ds_sent(hyp, ref, c * Zh, Zr) == pytest.approx(base, abs=1e-6)
                assert ds_sent(hyp, ref, Zh, c * Zr) == pytest.approx(base, abs=1e-6)

    def test_sentence_vector_override_changes_result(self, rng):
        hyp = three_sentence_doc()
        ref = three_sentence_doc(kind="reference")
        Zh, Zr = embed_doc(hyp), embed_doc(ref)
        override = np.arange(24, dtype=np.float64).reshape(3, 8) + 1.0
        with_override = ds_sent(hyp, ref, None, Zr, hyp_sentence_vectors=override)
        without = ds_sent(hyp, ref, Zh, Zr)
        assert with_override != pytest.approx(without)

    def test_multi_reference_average_and_max(self, rng):
        hyp = random_doc(rng, doc_id="mrh")
        refs = [
            random_doc(rng, doc_id="mr1", kind="reference"),
            random_doc(rng, doc_id="mr2", kind="reference"),
        ]
        Zh = embed_doc(hyp)
        Zrs = [embed_doc(r) for r in refs]
        singles = [ds_sent(hyp, r, Zh, Z) for r, Z in zip(refs, Zrs)]
        avg = ds_sent_multi_ref(hyp, refs, Zh, Zrs, mode="average").value
        best = ds_sent_multi_ref(hyp, refs, Zh, Zrs, mode="max").value
        assert avg == pytest.approx(sum(singles) / 2)
        assert best == pytest.approx(max(singles))
