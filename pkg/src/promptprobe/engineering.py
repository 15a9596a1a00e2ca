"""Prompt-engineering methods as small query plans over a text model.

Every method takes a question, talks to the model one or more times, and
returns the final answer plus the full transcript of exchanges. Register new
methods in ``METHOD_MAP``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, NamedTuple, Optional

import yaml

from .errors import DecompositionEmpty, StageFailure, UnknownMethod
from .models import GenerationParams, as_model

_SLOT = re.compile(r"\{([a-z_]+)\}")


def fill(template: str, **values: str) -> str:
    """Substitute ``{name}`` slots without interpreting braces inside values."""
    return _SLOT.sub(lambda m: values[m.group(1)] if m.group(1) in values else m.group(0), template)


@lru_cache(maxsize=1)
def method_prompts() -> dict:
    res = resources.files("promptprobe") / "data" / "method_prompts.yaml"
    return yaml.safe_load(res.read_text())


@dataclass(frozen=True)
class MethodPlan:
    method: str
    stages: tuple
    method_prompts: dict = field(default_factory=dict, compare=False)


class MethodOutcome(NamedTuple):
    answer: str
    transcript: list


class Method:
    name = "base"
    stages: tuple = ()

    def __init__(self, prompts: Optional[dict] = None):
        self.prompts = prompts if prompts is not None else method_prompts().get(self.name, {})

    def plan(self) -> MethodPlan:
        return MethodPlan(self.name, self.stages, self.prompts)

    def _ask(self, model, params, prompt: str, transcript: list, stage: str) -> str:
        try:
            response = model.generate(prompt, params)
        except Exception as exc:
            raise StageFailure(f"{self.name} stage {stage!r} failed: {exc}") from exc
        transcript.append((prompt, response))
        return response

    def run(self, question: str, model, params, transcript: list) -> str:
        raise NotImplementedError


class SuffixMethod(Method):
    stages = ("answer",)

    def build_prompt(self, question: str) -> str:
        return question + self.prompts["separator"] + self.prompts["suffix"]

    def run(self, question, model, params, transcript):
        return self._ask(model, params, self.build_prompt(question), transcript, "answer")


class ZeroShotCoT(SuffixMethod):
    name = "zs_cot"


class EmotionPrompt(SuffixMethod):
    name = "emotion"


class FewShotCoT(Method):
    name = "cot_fewshot"
    stages = ("answer",)

    def __init__(self, prompts=None, shots: Optional[int] = None):
        super().__init__(prompts)
        self.shots = self.prompts["shots"] if shots is None else shots
        if not 0 <= self.shots <= len(self.prompts["exemplars"]):
            raise ValueError(f"cot_fewshot supports 0..{len(self.prompts['exemplars'])} shots")

    def build_prompt(self, question: str) -> str:
        p = self.prompts
        blocks = [fill(p["item_format"], **ex) for ex in p["exemplars"][: self.shots]]
        blocks.append(fill(p["query_format"], question=question))
        return p["joiner"].join(blocks)

    def run(self, question, model, params, transcript):
        return self._ask(model, params, self.build_prompt(question), transcript, "answer")


class ExpertPrompting(Method):
    name = "expert"
    stages = ("identity", "answer")

    def run(self, question, model, params, transcript):
        identity = self._ask(model, params, fill(self.prompts["identity_prompt"], question=question), transcript, "identity")
        prompt = fill(self.prompts["answer_prompt"], identity=identity.strip(), question=question)
        return self._ask(model, params, prompt, transcript, "answer")


class GeneratedKnowledge(Method):
    name = "generated_knowledge"
    stages = ("knowledge", "answer")

    def run(self, question, model, params, transcript):
        knowledge = self._ask(model, params, fill(self.prompts["knowledge_prompt"], question=question), transcript, "knowledge")
        prompt = fill(self.prompts["answer_prompt"], knowledge=knowledge.strip(), question=question)
        return self._ask(model, params, prompt, transcript, "answer")


_LIST_ITEM = re.compile(r"^\s*(?:\(?\d+[.):]|[-*•])\s+(.*\S)\s*$")


def parse_subproblems(text: str) -> list[str]:
    """Numbered or bulleted lines become subproblems; other text is one item."""
    text = (text or "").strip()
    if not text:
        raise DecompositionEmpty("decomposition response was blank")
    items = [m.group(1) for m in map(_LIST_ITEM.match, text.splitlines()) if m]
    return items or [text]


class LeastToMost(Method):
    name = "least_to_most"
    stages = ("decompose", "solve*")

    def decompose(self, question, model, params, transcript) -> list[str]:
        response = self._ask(model, params, fill(self.prompts["decompose_prompt"], question=question), transcript, "decompose")
        return parse_subproblems(response)

    def run(self, question, model, params, transcript):
        subproblems = self.decompose(question, model, params, transcript)
        solved = ""
        answer = ""
        for i, sub in enumerate(subproblems):
            prompt = fill(self.prompts["solve_prompt"], question=question, solved=solved, subproblem=sub)
            answer = self._ask(model, params, prompt, transcript, f"solve[{i}]")
            solved += fill(self.prompts["solved_item"], subproblem=sub, answer=answer.strip())
        return answer


METHOD_MAP: dict[str, Callable[..., Method]] = {
    "cot_fewshot": FewShotCoT,
    "zs_cot": ZeroShotCoT,
    "emotion": EmotionPrompt,
    "expert": ExpertPrompting,
    "generated_knowledge": GeneratedKnowledge,
    "least_to_most": LeastToMost,
}


def register_method(name: str, factory: Callable[..., Method]) -> None:
    METHOD_MAP[name] = factory


def get_method(name: str, **kwargs) -> Method:
    try:
        return METHOD_MAP[name](**kwargs)
    except KeyError:
        raise UnknownMethod(f"no prompt-engineering method {name!r}") from None


def apply_method(method, question: str, endpoint, params: Optional[GenerationParams] = None,
                 parser: Optional[Callable[[str], str]] = None) -> MethodOutcome:
    """Run ``method`` (a name or Method instance) on ``question``."""
    m = get_method(method) if isinstance(method, str) else method
    model = as_model(endpoint)
    params = params or GenerationParams()
    transcript: list = []
    final = m.run(question, model, params, transcript)
    answer = parser(final) if parser else final.strip()
    return MethodOutcome(answer, transcript)


def decompose(question: str, endpoint, params: Optional[GenerationParams] = None) -> list[str]:
    return LeastToMost().decompose(question, as_model(endpoint), params or GenerationParams(), [])
