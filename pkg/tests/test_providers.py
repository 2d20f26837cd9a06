"""Provider layer: fingerprints, mocks, cassettes, HTTP clients, retries."""

import math

import pytest

from kgrank import net
from kgrank.errors import (
    CassetteMissError,
    EmptyCompletionError,
    ProtocolError,
    ProviderError,
    RetryableProviderError,
    ValidationError,
)
from kgrank.providers.base import (
    CompletionRequest,
    Vector,
    canonical_json,
    canonical_text,
    check_batch_dims,
    cross_score_fingerprint,
    embed_fingerprint,
    fingerprint,
)
from kgrank.providers.cassette import (
    Cassette,
    RecordingCompleter,
    RecordingCrossScorer,
    RecordingEmbedder,
    ReplayCompleter,
    ReplayCrossScorer,
    ReplayEmbedder,
    load_cassette,
    save_cassette,
)
from kgrank.providers.http import HttpCompleter, HttpCrossScorer, HttpEmbedder
from kgrank.providers.mock import MockCompleter, MockCrossScorer, MockEmbedder, MockKnowledge
from kgrank.providers.mock_server import MockProviderServer
from kgrank.providers.protocol import check_cross_score_endpoint, check_embed_endpoint


class TestCanonicalization:
    def test_whitespace_runs_collapse(self):
        assert canonical_text("a\n\tb   c ") == "a b c"

    def test_canonical_json_sorts_keys(self):
        assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'

    def test_fingerprint_ignores_whitespace_variants(self):
        a = embed_fingerprint("m", "insulin  storage")
        b = embed_fingerprint("m", "insulin storage")
        assert a == b

    def test_fingerprint_distinguishes_model_and_kind(self):
        assert embed_fingerprint("m1", "x") != embed_fingerprint("m2", "x")
        assert fingerprint("embed", "m", {"text": "x"}) != fingerprint(
            "cross_score", "m", {"text": "x"}
        )


class TestVector:
    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            Vector.of([])

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            Vector.of([1.0, math.nan])
        with pytest.raises(ValidationError):
            Vector.of([math.inf])

    def test_dim(self):
        assert Vector.of([1.0, 2.0, 3.0]).dim == 3

    def test_batch_dim_mismatch_is_protocol_error(self):
        with pytest.raises(ProtocolError):
            check_batch_dims([Vector.of([1.0]), Vector.of([1.0, 2.0])])


class TestCompletionRequest:
    def test_rejects_empty_prompt(self):
        with pytest.raises(ValidationError):
            CompletionRequest(prompt="")

    def test_rejects_negative_temperature(self):
        with pytest.raises(ValidationError):
            CompletionRequest(prompt="x", temperature=-0.1)

    def test_fingerprint_canonicalizes_prompt(self):
        a = CompletionRequest(prompt="hello   world").fingerprint()
        b = CompletionRequest(prompt="hello world").fingerprint()
        assert a == b

    def test_fingerprint_depends_on_sampling_params(self):
        base = CompletionRequest(prompt="x")
        assert base.fingerprint() != CompletionRequest(prompt="x", temperature=0.5).fingerprint()
        assert base.fingerprint() != CompletionRequest(prompt="x", max_tokens=16).fingerprint()


class TestMockEmbedder:
    def test_deterministic_and_normalized(self):
        emb = MockEmbedder(dim=16)
        v1, v2 = emb.embed(["insulin storage", "insulin storage"])
        assert v1 == v2
        norm = math.sqrt(sum(c * c for c in v1.components))
        assert norm == pytest.approx(1.0, abs=1e-12)

    def test_batch_composition_irrelevant(self):
        emb = MockEmbedder(dim=8)
        joint = emb.embed(["alpha", "beta"])
        assert joint == emb.embed(["alpha"]) + emb.embed(["beta"])

    def test_rejects_empty_batch(self):
        with pytest.raises(ValidationError):
            MockEmbedder().embed([])


class TestMockCrossScorer:
    def test_overlap_scoring(self):
        scorer = MockCrossScorer()
        scores = scorer.cross_score("insulin storage", ["insulin storage", "opera house"])
        assert scores[0] == pytest.approx(1.0)
        assert scores[1] == 0.0

    def test_duplicates_score_equal(self):
        scores = MockCrossScorer().cross_score("q r s", ["r", "x", "r"])
        assert scores[0] == scores[2]


class TestMockCompleter:
    def test_scripted_entities(self):
        knowledge = MockKnowledge(entities={"Q one?": ["alpha", "beta"]})
        completer = MockCompleter(knowledge)
        prompt = "comma-separated list of entity names\n\nQuestion: Q one?\n\nEntities:"
        assert completer.complete(CompletionRequest(prompt=prompt)) == "alpha, beta"

    def test_unknown_question_yields_none_sentinel(self):
        prompt = "comma-separated list of entity names\n\nQuestion: Mystery?\n\nEntities:"
        assert MockCompleter().complete(CompletionRequest(prompt=prompt)) == "none"

    def test_kg_answer_counts_fact_lines(self):
        prompt = "Facts:\n- fact one\n- fact two\n\nQuestion: Q?\n\nAnswer:"
        text = MockCompleter().complete(CompletionRequest(prompt=prompt))
        assert "2 retrieved facts" in text

    def test_judge_prompt_gets_tie(self):
        prompt = 'Question: Q?\n\nReply with a line "Winner: A", "Winner: B", or "Winner: Tie"'
        text = MockCompleter().complete(CompletionRequest(prompt=prompt))
        assert text.startswith("Winner: Tie")


class TestCassettes:
    def test_embed_record_then_replay_batch_independent(self, tmp_path):
        rec = RecordingEmbedder(MockEmbedder(dim=8), Cassette("embed"), tmp_path, "m")
        recorded = rec.embed(["a", "b", "c"])
        replay = ReplayEmbedder(load_cassette(tmp_path, "embed"), "m")
        assert replay.embed(["c"]) == [recorded[2]]
        assert replay.embed(["a", "b"]) == recorded[:2]

    def test_replay_miss_is_error(self, tmp_path):
        save_cassette(Cassette("embed"), tmp_path)
        replay = ReplayEmbedder(load_cassette(tmp_path, "embed"), "m")
        with pytest.raises(CassetteMissError, match="cassette miss"):
            replay.embed(["never recorded"])

    def test_cross_score_round_trip(self, tmp_path):
        rec = RecordingCrossScorer(MockCrossScorer(), Cassette("cross_score"), tmp_path, "m")
        scores = rec.cross_score("q words", ["q words here", "other"])
        replay = ReplayCrossScorer(load_cassette(tmp_path, "cross_score"), "m")
        assert replay.cross_score("q words", ["other", "q words here"]) == scores[::-1]

    def test_complete_round_trip(self, tmp_path):
        rec = RecordingCompleter(MockCompleter(), Cassette("complete"), tmp_path)
        request = CompletionRequest(prompt="Facts:\n- f\n\nQuestion: Q?\n\nAnswer:")
        text = rec.complete(request)
        replay = ReplayCompleter(load_cassette(tmp_path, "complete"))
        assert replay.complete(request) == text

    def test_replayed_empty_completion_is_error(self, tmp_path):
        cassette = Cassette("complete")
        request = CompletionRequest(prompt="p")
        cassette.put(request.fingerprint(), {"prompt": "p"}, {"text": ""})
        with pytest.raises(EmptyCompletionError):
            ReplayCompleter(cassette).complete(request)

    def test_put_keeps_first_recording(self):
        cassette = Cassette("embed")
        assert cassette.put("fp", {"r": 1}, {"v": 1}) is True
        assert cassette.put("fp", {"r": 1}, {"v": 2}) is False
        assert cassette.entries["fp"]["response"] == {"v": 1}

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            Cassette("telemetry")


@pytest.fixture()
def server():
    with MockProviderServer(
        embedder=MockEmbedder(dim=8),
        scorer=MockCrossScorer(),
        completer=MockCompleter(MockKnowledge(answers={"Q?": "Scripted answer."})),
    ) as srv:
        yield srv


class TestHttpProviders:
    def test_embed_round_trip(self, server):
        vectors = HttpEmbedder(server.url, "m").embed(["alpha", "beta"])
        assert vectors == MockEmbedder(dim=8).embed(["alpha", "beta"])

    def test_cross_score_round_trip(self, server):
        scores = HttpCrossScorer(server.url, "m").cross_score("q", ["q", "zz"])
        assert scores == MockCrossScorer().cross_score("q", ["q", "zz"])

    def test_complete_round_trip(self, server):
        text = HttpCompleter(server.url).complete(
            CompletionRequest(prompt="Facts:\n(none)\n\nQuestion: Q?\n\nAnswer:")
        )
        assert text.startswith("Scripted answer.")

    def test_embed_endpoint_conformance(self, server):
        assert check_embed_endpoint(server.url, "m") == 8

    def test_cross_score_endpoint_conformance(self, server):
        check_cross_score_endpoint(server.url, "m")


class TestRetryPolicy:
    def test_retries_429_then_succeeds(self, server):
        server.fail_next("/v1/embed", [429, 429])
        sleeps: list[float] = []
        embedder = HttpEmbedder(server.url, "m", sleeper=sleeps.append)
        vectors = embedder.embed(["x"])
        assert len(vectors) == 1
        assert sleeps == [1.0, 2.0]

    def test_gives_up_after_three_attempts(self, server):
        server.fail_next("/v1/embed", [429, 429, 429])
        with pytest.raises(RetryableProviderError):
            HttpEmbedder(server.url, "m", sleeper=lambda s: None).embed(["x"])

    def test_500_fails_fast(self, server):
        server.fail_next("/v1/embed", [500])
        sleeps: list[float] = []
        with pytest.raises(ProviderError):
            HttpEmbedder(server.url, "m", sleeper=sleeps.append).embed(["x"])
        assert sleeps == []
        # next call must succeed: the failure queue is drained
        assert len(HttpEmbedder(server.url, "m").embed(["x"])) == 1

    def test_connection_error_retries_then_raises(self):
        sleeps: list[float] = []
        with pytest.raises(RetryableProviderError):
            net.request_json(
                "POST",
                "http://127.0.0.1:1/v1/embed",
                json_body={},
                timeout=0.2,
                sleeper=sleeps.append,
            )
        assert sleeps == [1.0, 2.0]
