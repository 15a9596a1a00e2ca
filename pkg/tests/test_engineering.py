import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from promptprobe.engineering import (
    METHOD_MAP,
    FewShotCoT,
    apply_method,
    decompose,
    get_method,
    method_prompts,
    parse_subproblems,
)
from promptprobe.errors import (
    DecompositionEmpty,
    StageFailure,
    Transport,
    UnknownMethod,
)
from promptprobe.models import MockModel, MockRulebook, ModelEndpoint
from promptprobe.pipeline import process_output

ECHO = ModelEndpoint(kind="mock", mock_rulebook="echo")


class Scripted:
    """Returns queued responses in order and records prompts."""

    def __init__(self, *responses):
        self.responses = list(responses)
        self.prompts = []

    def generate(self, prompt, params):
        self.prompts.append(prompt)
        return self.responses.pop(0)


def test_registry_has_six_methods():
    assert set(METHOD_MAP) == {"cot_fewshot", "zs_cot", "emotion", "expert", "generated_knowledge", "least_to_most"}
    with pytest.raises(UnknownMethod):
        get_method("tree_of_thoughts")


@pytest.mark.parametrize("name,count", [("zs_cot", 1), ("emotion", 1), ("cot_fewshot", 1), ("expert", 2),
                                        ("generated_knowledge", 2)])
def test_stage_counts(name, count):
    assert len(get_method(name).plan().stages) == count
    outcome = apply_method(name, "Is water wet?", ECHO)
    assert len(outcome.transcript) == count


def test_zs_cot_exact_suffix():
    q = "What is 2 + 2?"
    outcome = apply_method("zs_cot", q, ECHO)
    assert outcome.transcript[0][0] == q + "\n" + "Let's think step by step"


def test_emotion_exact_suffix():
    q = "Is the review positive?"
    outcome = apply_method("emotion", q, ECHO)
    assert outcome.transcript[0][0] == q + " " + "This is very important to my career."


@settings(max_examples=50, deadline=None)
@given(st.text(max_size=60))
def test_suffix_methods_keep_question_prefix(question):
    for name in ("zs_cot", "emotion"):
        prompt = apply_method(name, question, ECHO).transcript[0][0]
        assert prompt.startswith(question)


def test_expert_feeds_identity_into_answer_stage():
    outcome = apply_method("expert", "Why do cats purr?", ECHO)
    (p1, r1), (p2, _) = outcome.transcript
    assert "Why do cats purr?" in p1
    assert p2.startswith(r1.strip())
    assert p2.endswith("Why do cats purr?")


def test_generated_knowledge_puts_knowledge_before_question():
    model = Scripted("Cats purr when content.", "Because they are happy.")
    outcome = apply_method("generated_knowledge", "Why do cats purr?", model)
    final = model.prompts[1]
    assert final.index("Cats purr when content.") < final.index("Why do cats purr?")
    assert outcome.answer == "Because they are happy."


@pytest.mark.parametrize("shots", [0, 1, 3, 5])
def test_cot_fewshot_exemplars(shots):
    exemplars = method_prompts()["cot_fewshot"]["exemplars"]
    prompt = FewShotCoT(shots=shots).build_prompt("How many legs do 3 dogs have?")
    for ex in exemplars[:shots]:
        assert prompt.index(ex["reasoning"]) < prompt.index(f"The answer is {ex['answer']}.", prompt.index(ex["reasoning"]))
    for ex in exemplars[shots:]:
        assert ex["question"] not in prompt
    assert prompt.count("Q: ") == shots + 1
    assert prompt.endswith("Q: How many legs do 3 dogs have?\nA:")


def test_cot_fewshot_rejects_too_many_shots():
    with pytest.raises(ValueError):
        FewShotCoT(shots=99)


def test_parse_subproblems():
    assert parse_subproblems("1. A\n2. B") == ["A", "B"]
    assert parse_subproblems("- first\n* second\n3) third") == ["first", "second", "third"]
    assert parse_subproblems("just one thing") == ["just one thing"]
    with pytest.raises(DecompositionEmpty):
        parse_subproblems("  \n ")


def test_decompose_with_mock():
    ep = ModelEndpoint(kind="mock", mock_rulebook="constant:1. A\n2. B")
    assert decompose("problem", ep) == ["A", "B"]
    blank = ModelEndpoint(kind="mock", mock_rulebook="constant:")
    with pytest.raises(DecompositionEmpty):
        decompose("problem", blank)


def test_least_to_most_accumulates_solved_pairs():
    model = Scripted("1. A\n2. B", "answer-a", "answer-b")
    outcome = apply_method("least_to_most", "Big problem", model)
    assert len(outcome.transcript) == 3
    stage2 = model.prompts[2]
    assert stage2.index("A") < stage2.index("answer-a") < stage2.index("Q: B")
    assert "Big problem" in model.prompts[1]
    assert outcome.answer == "answer-b"


def test_stage_failure_wraps_model_error():
    class Broken:
        def generate(self, prompt, params):
            raise Transport("connection refused")

    with pytest.raises(StageFailure) as err:
        apply_method("expert", "q", Broken())
    assert "identity" in str(err.value)


def test_parser_hook_uses_output_parser():
    model = MockModel(MockRulebook.build([], fallback="I think the answer is Positive."))
    outcome = apply_method("zs_cot", "Review: great", model,
                           parser=lambda raw: process_output(raw, ["positive", "negative"]))
    assert outcome.answer == "positive"
