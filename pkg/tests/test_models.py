import logging

import httpx
import jsonschema
import pytest
from helpers import CHAT_REQUEST_SCHEMA, CountingModel, chat_reply
from hypothesis import given, settings
from hypothesis import strategies as st

from promptprobe.errors import (
    AuthMissing,
    ConfigError,
    MalformedResponse,
    RateLimited,
    Transport,
    UnknownRulebook,
)
from promptprobe.models import (
    ChatCompletionsModel,
    GenerationParams,
    MockModel,
    MockRulebook,
    ModelEndpoint,
    Noise,
    RetryPolicy,
    batch_generate,
    generate,
    register_rulebook,
    resolve_rulebook,
)
from promptprobe.models.chat import build_request_body
from promptprobe.models.rulebooks import FAILURE_RESPONSE, load_rulebooks


def mock(name):
    return ModelEndpoint(kind="mock", mock_rulebook=name)


# mock rulebooks

def test_rule_order_and_fallback():
    book = MockRulebook.build([("cat", "first"), ("c", "second")], fallback="none")
    assert book.match("a cat") == "first"
    assert book.match("a cow") == "second"
    assert book.match("dog") == "none"


def test_rule_response_expands_groups():
    book = MockRulebook.build([(r"name: (\w+)", r"hello \1")])
    assert book.match("name: ada") == "hello ada"


def test_bad_pattern_is_config_error():
    with pytest.raises(ConfigError):
        MockRulebook.build([("(unclosed", "x")])


def test_noise_is_deterministic_per_prompt_and_seed():
    book = MockRulebook.build([(".*", "yes")], noise=Noise(0.5, ("yes", "no")), seed=3)
    outs = [book.respond(f"prompt {i}") for i in range(200)]
    assert outs == [book.respond(f"prompt {i}") for i in range(200)]
    flips = outs.count("no")
    assert 60 < flips < 140
    other_seed = [book.respond(f"prompt {i}", seed=4) for i in range(200)]
    assert other_seed != outs


def test_noise_leaves_non_label_responses_alone():
    book = MockRulebook.build([(".*", "maybe")], noise=Noise(1.0, ("yes", "no")))
    assert book.respond("x") == "maybe"


def test_noise_validation():
    with pytest.raises(ConfigError):
        Noise(1.5, ("a", "b"))
    with pytest.raises(ConfigError):
        Noise(0.1, ("a",))


def test_builtin_rulebooks(params):
    assert generate(mock("echo"), params, "repeat me") == "repeat me"
    assert generate(mock("constant:positive"), params, "anything") == "positive"
    with pytest.raises(UnknownRulebook):
        resolve_rulebook("no-such-book")
    with pytest.raises(UnknownRulebook):
        resolve_rulebook("oracle:sst2;bogus=1")


def test_keyword_rule_fails_without_trigger(params):
    ep = mock("oracle:mrpc;keyword=Determine")
    from promptprobe.datasets import load_dataset
    from promptprobe.prompts import get_template, render

    _, records = load_dataset("mrpc")
    template = get_template("mrpc", "mrpc-task-zs")
    prompt = render(template, records[0]).text
    assert generate(ep, params, prompt) in ("equivalent", "not_equivalent")
    assert generate(ep, params, prompt.replace("Determine", "Decide")) == FAILURE_RESPONSE


def test_load_rulebooks_from_yaml(tmp_path, params):
    cfg = tmp_path / "books.yaml"
    cfg.write_text("rulebooks:\n  shouty:\n    fallback: meh\n    rules:\n      - {match: 'great', response: positive}\n")
    books = load_rulebooks(cfg)
    assert set(books) == {"shouty"}
    assert generate(mock("shouty"), params, "a great film") == "positive"
    assert generate(mock("shouty"), params, "a film") == "meh"


def test_endpoint_validation():
    with pytest.raises(ConfigError):
        ModelEndpoint(kind="mock")
    with pytest.raises(ConfigError):
        ModelEndpoint(kind="openai_compatible", base_url="http://x")
    with pytest.raises(ConfigError):
        ModelEndpoint(kind="carrier-pigeon")
    with pytest.raises(ConfigError):
        GenerationParams(temperature=-1)


def test_describe_never_contains_secret(api_key):
    ep = ModelEndpoint(kind="openai_compatible", model_name="m", base_url="http://h", auth_ref=api_key)
    assert "sk-test-secret-value" not in repr(ep.describe())
    assert ep.describe()["auth_ref"] == api_key


# batch generation

def test_batch_preserves_order_and_isolates_errors(params):
    class Flaky:
        def generate(self, prompt, params):
            if prompt == "bad":
                raise Transport("boom")
            return prompt.upper()

    items = batch_generate(Flaky(), params, ["a", "bad", "c", "d"], parallelism=3)
    assert [i.index for i in items] == [0, 1, 2, 3]
    assert [i.text for i in items] == ["A", None, "C", "D"]
    assert items[1].error_kind == "Transport"
    assert not items[1].ok


@settings(max_examples=30, deadline=None)
@given(st.lists(st.text(max_size=20), max_size=20), st.integers(1, 8))
def test_batch_matches_sequential(prompts, parallelism):
    model = MockModel(MockRulebook.build([(r"(.)", r"\1!")], fallback="empty"))
    p = GenerationParams()
    items = batch_generate(model, p, prompts, parallelism)
    assert [i.text for i in items] == [model.generate(x, p) for x in prompts]


# wire protocol

def test_request_body_shape():
    body = build_request_body("m", "hi", GenerationParams(temperature=0.5, max_new_tokens=7, seed=3))
    jsonschema.validate(body, CHAT_REQUEST_SCHEMA)
    assert body == {"model": "m", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.5,
                    "max_tokens": 7, "seed": 3}
    assert "seed" not in build_request_body("m", "hi", GenerationParams())


def test_round_trip_against_stub(stub_server, remote_endpoint, params):
    srv = stub_server([(200, chat_reply("positive"))])
    model = ChatCompletionsModel(remote_endpoint(srv.url))
    assert model.generate("Is this good?", params) == "positive"
    assert srv.paths == ["/v1/chat/completions"]
    jsonschema.validate(srv.requests[0], CHAT_REQUEST_SCHEMA)
    assert srv.requests[0]["messages"][0]["content"] == "Is this good?"
    assert srv.headers[0]["Authorization"] == "Bearer sk-test-secret-value"


def test_rate_limit_then_success_retries_once(stub_server, remote_endpoint, params):
    srv = stub_server([(429, {"error": "slow down"}), (200, chat_reply("ok"))])
    delays = []
    model = ChatCompletionsModel(remote_endpoint(srv.url), sleep=delays.append)
    assert model.generate("q", params) == "ok"
    assert len(srv.requests) == 2
    assert delays == [0.0]


def test_permanent_failure_stops_at_retry_bound(stub_server, remote_endpoint, params):
    srv = stub_server([(503, {"error": "down"})])
    model = ChatCompletionsModel(remote_endpoint(srv.url, max_retries=2), sleep=lambda s: None)
    with pytest.raises(Transport):
        model.generate("q", params)
    assert len(srv.requests) == 3


def test_persistent_rate_limit_raises_rate_limited(stub_server, remote_endpoint, params):
    srv = stub_server([(429, {})])
    model = ChatCompletionsModel(remote_endpoint(srv.url, max_retries=1), sleep=lambda s: None)
    with pytest.raises(RateLimited):
        model.generate("q", params)
    assert len(srv.requests) == 2


def test_client_error_is_not_retried(stub_server, remote_endpoint, params):
    srv = stub_server([(400, {"error": "bad request"})])
    model = ChatCompletionsModel(remote_endpoint(srv.url), sleep=lambda s: None)
    with pytest.raises(Transport):
        model.generate("q", params)
    assert len(srv.requests) == 1


def test_backoff_schedule(stub_server, api_key, params):
    srv = stub_server([(500, {})])
    ep = ModelEndpoint(kind="openai_compatible", model_name="m", base_url=srv.url, auth_ref=api_key,
                       retry=RetryPolicy(max_retries=3, base_delay=1.0, factor=2.0))
    delays = []
    with pytest.raises(Transport):
        ChatCompletionsModel(ep, sleep=delays.append).generate("q", params)
    assert delays == [1.0, 2.0, 4.0]


@pytest.mark.parametrize("payload", [{"choices": []}, {"choices": [{"message": {}}]}, {"nope": 1},
                                     {"choices": [{"message": {"content": 5}}]}, b"not json"])
def test_malformed_responses(stub_server, remote_endpoint, params, payload):
    srv = stub_server([(200, payload)])
    with pytest.raises(MalformedResponse):
        ChatCompletionsModel(remote_endpoint(srv.url)).generate("q", params)


def test_missing_key(stub_server, monkeypatch, params):
    monkeypatch.delenv("PROMPTPROBE_ABSENT_KEY", raising=False)
    srv = stub_server([(200, chat_reply("x"))])
    ep = ModelEndpoint(kind="openai_compatible", model_name="m", base_url=srv.url, auth_ref="PROMPTPROBE_ABSENT_KEY")
    with pytest.raises(AuthMissing):
        ChatCompletionsModel(ep).generate("q", params)
    assert srv.requests == []


def test_timeout_is_retried_as_transport(remote_endpoint, params):
    calls = []

    def handler(request):
        calls.append(request)
        raise httpx.ReadTimeout("slow", request=request)

    client = httpx.Client(transport=httpx.MockTransport(handler))
    model = ChatCompletionsModel(remote_endpoint("http://stub.invalid", max_retries=2), client=client,
                                 sleep=lambda s: None)
    with pytest.raises(Transport):
        model.generate("q", params)
    assert len(calls) == 3


def test_retry_logs_omit_key(stub_server, remote_endpoint, params, caplog):
    srv = stub_server([(500, {}), (200, chat_reply("fine"))])
    with caplog.at_level(logging.DEBUG):
        ChatCompletionsModel(remote_endpoint(srv.url), sleep=lambda s: None).generate("q", params)
    assert "retrying" in caplog.text
    assert "sk-test-secret-value" not in caplog.text


def test_counting_wrapper_passes_through(params):
    model = CountingModel(MockModel(resolve_rulebook("echo")))
    assert model.generate("x", params) == "x"
    assert model.calls == 1


def test_registered_rulebook_overrides(params):
    register_rulebook("test-override", MockRulebook.build([], fallback="fixed"))
    assert generate(mock("test-override"), params, "q") == "fixed"
