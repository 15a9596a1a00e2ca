from __future__ import annotations

import functools
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def chat_reply(content: str) -> dict:
    return {"id": "cmpl-1", "object": "chat.completion",
            "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}]}


class StubServer:
    """Local chat-completions server replaying a script of (status, payload) replies.

    The last entry repeats once the script runs out. ``reply`` may also be a
    callable taking the request body.
    """

    def __init__(self, script=None, reply=None):
        self.script = list(script or [])
        self.reply = reply
        self.requests: list[dict] = []
        self.headers: list[dict] = []
        self.paths: list[str] = []
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                raw = self.rfile.read(int(self.headers.get("Content-Length", 0)))
                body = json.loads(raw)
                with stub._lock:
                    stub.requests.append(body)
                    stub.headers.append(dict(self.headers))
                    stub.paths.append(self.path)
                    if stub.reply is not None:
                        status, payload = stub.reply(body)
                    else:
                        n = len(stub.requests) - 1
                        status, payload = stub.script[min(n, len(stub.script) - 1)]
                data = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()


class CountingModel:
    """Wraps a model and counts generate calls."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0
        self.prompts: list[str] = []
        self._lock = threading.Lock()

    def generate(self, prompt, params):
        with self._lock:
            self.calls += 1
            self.prompts.append(prompt)
        return self.inner.generate(prompt, params)


# frozen oracles shared by the module tests and the acceptance gate

CHAT_REQUEST_SCHEMA = {
    "type": "object",
    "required": ["model", "messages"],
    "properties": {
        "model": {"type": "string", "minLength": 1},
        "messages": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["role", "content"],
                "properties": {"role": {"enum": ["system", "user", "assistant"]}, "content": {"type": "string"}},
            },
        },
        "temperature": {"type": "number", "minimum": 0, "maximum": 2},
        "max_tokens": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
    },
}

REFERENCE_MRPC_TASK_ZS = ("Determine if the given pair of statements can be considered the same by responding with "
                       "'equivalent' or 'not_equivalent'.")
REFERENCE_QQP_ROLE_ZS = ("As an instrument for question comparison evaluation, consider the questions and determine if "
                      "their meaning is the same, responding with 'equivalent' for similar questions or "
                      "'not_equivalent' for different questions.")
REFERENCE_EXAMPLES = ("Here are three examples. Sentence: Our friends won't buy this analysis, let alone the next one we "
                   "propose. Answer: acceptable. Sentence: One more pseudo generalization and I'm giving up. Answer: "
                   "acceptable. Sentence: They drank the pub. Answer: unacceptable.")
REFERENCE_COLA_TASK_FS = ("Review the sentence below and identify whether its grammar is 'Acceptable' or "
                       "'Unacceptable': " + REFERENCE_EXAMPLES)
REFERENCE_COLA_ROLE_FS = ("Functioning as a grammar evaluation tool, analyze the given sentence and decide if it is "
                       "grammatically correct, responding with 'acceptable' or 'unacceptable': " + REFERENCE_EXAMPLES)


def brute_force(preds, golds, labels):
    """(accuracy, macro_f1, exact_match) from an explicit confusion matrix, in exact arithmetic."""
    from fractions import Fraction

    from promptprobe.pipeline import UNPARSED, normalize_freeform

    n = len(golds)
    matrix = {(g, p): 0 for g in labels + [UNPARSED] for p in labels + [UNPARSED]}
    for p, g in zip(preds, golds):
        matrix[g, p] += 1
    acc = Fraction(sum(matrix[label, label] for label in labels), n)
    f1s = []
    for label in labels:
        tp = matrix[label, label]
        fp = sum(matrix[g, label] for g in labels + [UNPARSED] if g != label)
        fn = sum(matrix[label, p] for p in labels + [UNPARSED] if p != label)
        precision = Fraction(tp, tp + fp) if tp + fp else None
        recall = Fraction(tp, tp + fn) if tp + fn else None
        if precision is None and recall is None:
            f1s.append(Fraction(1))
        elif not precision or not recall:
            f1s.append(Fraction(0))
        else:
            f1s.append(2 * precision * recall / (precision + recall))
    em = Fraction(sum(normalize_freeform(p) == normalize_freeform(g) for p, g in zip(preds, golds)), n)
    return float(acc), float(sum(f1s) / len(f1s)), float(em)


# attack invariant checking, shared by the property tests and the acceptance gate

def _edit_distance(a: str, b: str) -> int:
    """Optimal string alignment distance: an adjacent transposition costs one."""
    d = [[i + j if i * j == 0 else 0 for j in range(len(b) + 1)] for i in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                d[i][j] = min(d[i][j], d[i - 2][j - 2] + 1)
    return d[-1][-1]


def attack_violations(result, target, config, subset, calls=None) -> list[str]:
    """Every broken AttackResult invariant, as human-readable strings."""
    import math

    from promptprobe.attacks import tokenize
    from promptprobe.attacks.engine import assemble, split_instruction
    from promptprobe.prompts import render

    out = []
    body = target.template.body
    n = min(config.eval_subset_size, len(subset))
    if result.original_prompt != body:
        out.append("original prompt altered")
    if not result.attacked_score <= result.clean_score:
        out.append(f"attacked {result.attacked_score} > clean {result.clean_score}")
    if result.queries_used > config.query_budget * n:
        out.append(f"queries {result.queries_used} exceed {config.query_budget} x {n}")
    if calls is not None and calls != result.queries_used:
        out.append(f"counted {calls} model calls but result reports {result.queries_used}")
    expected_drop = (result.clean_score - result.attacked_score) / result.clean_score if result.clean_score > 0 else 0.0
    if result.drop_rate != expected_drop:
        out.append("drop_rate inconsistent")

    log = result.perturbation_log
    if config.level in ("character", "word"):
        tokens = tokenize(body, target.template.projection)
        forms, per_word = {}, {}
        for e in log:
            if e.word_index is None or not 0 <= e.word_index < len(tokens):
                out.append(f"edit without a valid word index: {e}")
                continue
            tok = tokens[e.word_index]
            if tok.protected:
                out.append(f"edit touches protected word {tok.text!r}")
            if e.position != tok.start:
                out.append(f"edit position {e.position} != word start {tok.start}")
            if e.before != forms.get(e.word_index, tok.text):
                out.append(f"edit 'before' {e.before!r} does not match current word")
            if config.level == "character" and _edit_distance(e.before, e.after) != 1:
                out.append(f"character edit {e.before!r}->{e.after!r} is not a single edit")
            forms[e.word_index] = e.after
            per_word[e.word_index] = per_word.get(e.word_index, 0) + 1
        cap_edits = config.max_char_edits_per_word if config.level == "character" else 1
        if any(c > cap_edits for c in per_word.values()):
            out.append(f"a word was edited more than {cap_edits} times")
        cap_words = math.ceil(config.max_word_perturb_ratio * len(tokens) - 1e-9)
        if len(per_word) > cap_words:
            out.append(f"{len(per_word)} words perturbed, cap {cap_words}")
        if assemble(body, tokens, forms) != result.perturbed_prompt:
            out.append("perturbed prompt differs from the logged edits")
    elif config.level == "sentence":
        expected = body + (log[0].after if log else "")
        if len(log) > 1 or result.perturbed_prompt != expected:
            out.append("sentence attack changed more than an appended distractor")
    else:
        instruction, rest = split_instruction(body)
        if log and (log[0].before != instruction or result.perturbed_prompt != log[0].after + rest):
            out.append("semantic attack changed more than the instruction line")
        if not log and result.perturbed_prompt != body:
            out.append("prompt changed without a logged edit")

    if not log and result.attacked_score != result.clean_score:
        out.append("score changed without any edit")
    perturbed = target.template.with_body(result.perturbed_prompt)
    for rec in subset[:n]:
        a = render(target.template, rec, target.few_shot)
        b = render(perturbed, rec, target.few_shot)
        if [a.text[s:e] for s, e in a.field_spans] != [b.text[s:e] for s, e in b.field_spans]:
            out.append(f"record {rec.id}: substituted content changed")
        proj = target.template.projection
        if proj:
            from promptprobe.prompts import projection_spans

            pa = [a.text[s:e].lower() for s, e in projection_spans(a.text, proj)]
            pb = [b.text[s:e].lower() for s, e in projection_spans(b.text, proj)]
            if pa != pb:
                out.append(f"record {rec.id}: label words changed {pa} -> {pb}")
    return out


TOY_VOCAB = (
    "decide whether the following text reads as a clear statement please answer carefully "
    "choose one label for each input sentence based on its overall meaning and tone "
    "classify review judge determine examine"
).split()


def toy_dataset():
    """A small yes/no dataset registered under ``toy_yn``."""
    from promptprobe.datasets import DataRecord, DatasetMeta, register_dataset

    meta = DatasetMeta("toy_yn", "classification", ("yes", "no"), ("sentence",))
    subjects = ["the tram", "a heron", "my neighbour", "the old clock", "this recipe", "the lighthouse",
                "a paper kite", "our choir"]
    verbs = ["arrived late", "stood still", "sang loudly", "worked fine", "fell apart", "glowed at night",
             "flew high", "won again"]
    records = [DataRecord(f"toy-{i}", {"sentence": f"{s} {v}"}, "yes" if i % 3 else "no")
               for i, (s, v) in enumerate(zip(subjects, verbs))]
    register_dataset("toy_yn", lambda: (meta, records))
    return meta, records


@functools.lru_cache(maxsize=None)
def _oracle_rules(dataset):
    from promptprobe.models.rulebooks import oracle_rules

    return tuple(oracle_rules(dataset))


def random_attack_case(rng):
    """Draw (target, config, subset, counting model) for a randomized attack run."""
    from promptprobe.attacks import LEVELS, AttackConfig, AttackTarget
    from promptprobe.datasets import load_dataset, load_fewshot_pool
    from promptprobe.models import MockModel, MockRulebook, Noise
    from promptprobe.models.rulebooks import FAILURE_RESPONSE
    from promptprobe.prompts import PromptTemplate, builtin_templates

    level = rng.choice(LEVELS)
    if level == "semantic":
        dataset = rng.choice(["sst2", "cola", "mrpc", "qqp", "rte", "wnli", "qnli", "mnli"])
        meta, records = load_dataset(dataset)
        template = rng.choice(builtin_templates(dataset))
        pool = load_fewshot_pool(dataset)
        rules = _oracle_rules(dataset)
        words = [w.strip(".,:'?") for w in template.body.split() if w.isalpha()]
    else:
        dataset = "toy_yn"
        meta, records = toy_dataset()
        words = rng.sample(TOY_VOCAB, rng.randint(1, 12))
        if rng.random() < 0.5:
            words.insert(rng.randint(0, len(words)), "'yes' or 'no'")
        if rng.random() < 0.3:
            words.insert(rng.randint(0, len(words)), "Yes")
        instruction = " ".join(words)
        instruction = instruction[0].upper() + instruction[1:] + "."
        shots = rng.choice([0, 0, 1, 2])
        body = instruction + (" Examples:\n{examples}\n{content}" if shots else "\n{content}")
        template = PromptTemplate(f"toy-{rng.randrange(10**6)}", "task_oriented", shots, body,
                                  {"yes": "yes", "no": "no"}, "Sentence: {sentence} Answer: {answer}.", dataset)
        pool = records[-3:]
        rules = [(r"(?i)" + re_escape(r.fields["sentence"]), r.label) for r in records]
    pre = []
    for w in rng.sample(words, min(len(words), rng.randint(0, 3))):
        pre.append((r"\A(?![\s\S]*\b" + re_escape(w) + r"\b)", FAILURE_RESPONSE))
    if rng.random() < 0.3:
        pre.append((r"Answer:\Z" if rng.random() < 0.5 else r"[@/]", FAILURE_RESPONSE))
    labels = tuple(dict.fromkeys(template.projection.values()))
    noise = Noise(rng.choice([0.0, 0.1, 0.3, 0.5]), labels) if rng.random() < 0.5 else None
    book = MockRulebook.build(pre + list(rules), FAILURE_RESPONSE, noise, rng.randrange(1000))
    shots = tuple((pool or records)[: template.shots])
    target = AttackTarget(template, tuple(meta.label_space), shots, False, dataset)
    config = AttackConfig(
        level=level,
        query_budget=rng.randint(1, 12),
        max_word_perturb_ratio=rng.choice([0.1, 0.25, 0.3, 0.5, 1.0]),
        max_char_edits_per_word=rng.randint(1, 3),
        eval_subset_size=rng.randint(1, 4),
        seed=rng.randrange(10**6),
        max_candidates=rng.randint(1, 8),
    )
    subset = list(records[: config.eval_subset_size])
    return target, config, subset, CountingModel(MockModel(book))


def re_escape(text: str) -> str:
    import re

    return re.escape(text)
