"""Seeded generation of reasoning problems from random task structures.

Layer ``k`` of a structure holds ``min(width, 2**k)`` nodes for ``k`` in
``0..depth``, so the node count grows with both knobs and never with
``extra_links``. Expression tasks put the answer node in layer 0 and the
leaves in layer ``depth``; graph tasks use the same layering with edges
pointing from shallow to deep layers.
"""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

from ..datasets import DataRecord, DatasetMeta, write_dataset_dir
from ..errors import ConfigError, GenerationExhausted, SingularSystem
from .dag import (
    GRAPH_TASKS,
    TASKS,
    LinearSystem,
    Node,
    TaskDag,
    check_dag,
    evaluate_nodes,
    oracle_evaluate,
)

MAX_DEPTH = 8
MAX_WIDTH = 6
MAX_ATTEMPTS = 100

BINARY_OPS = {"arithmetic": ("add", "sub", "mul", "div"), "logic": ("and", "or")}
UNARY_OPS = {"arithmetic": ("double", "negate"), "logic": ("not",)}
CHECKERS = {
    "arithmetic": "exact_numeric",
    "linear_equation": "exact_numeric",
    "max_sum_path": "exact_numeric",
    "boolean_logic": "exact_boolean",
    "deductive_logic": "exact_boolean",
    "abductive_logic": "exact_boolean",
    "reachability": "exact_boolean",
}


@dataclass(frozen=True)
class DyValSpec:
    task: str
    depth: int = 3
    width: int = 2
    extra_links: int = 0
    value_range: tuple = (1, 9)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "value_range", tuple(self.value_range))
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        min_depth = 1 if self.task == "linear_equation" else 2
        if not min_depth <= self.depth <= MAX_DEPTH:
            raise ConfigError(f"depth must lie in [{min_depth}, {MAX_DEPTH}] for {self.task}")
        if not 1 <= self.width <= MAX_WIDTH:
            raise ConfigError(f"width must lie in [1, {MAX_WIDTH}]")
        if self.extra_links < 0:
            raise ConfigError("extra_links must be non-negative")
        if len(self.value_range) != 2 or self.value_range[0] > self.value_range[1]:
            raise ConfigError(f"value_range {self.value_range} is empty")

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["value_range"] = list(self.value_range)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "DyValSpec":
        return cls(**doc)


@dataclass(frozen=True)
class Checker:
    kind: str
    epsilon: Optional[float] = None

    def check(self, answer: str, truth: str) -> bool:
        answer, truth = answer.strip(), truth.strip()
        if self.kind == "exact_boolean":
            return answer.lower() == truth.lower()
        if self.kind == "exact_node_set":
            return {a.strip() for a in answer.split(",")} == {t.strip() for t in truth.split(",")}
        if self.kind in ("exact_numeric", "tolerance_numeric"):
            try:
                got, want = _numbers(answer), _numbers(truth)
            except ValueError:
                return False
            if len(got) != len(want):
                return False
            if self.kind == "exact_numeric":
                return got == want
            return all(abs(g - w) <= (self.epsilon or 0) for g, w in zip(got, want))
        raise ConfigError(f"unknown checker {self.kind!r}")


def _numbers(text: str) -> list[Fraction]:
    parts = [p.split("=")[-1].strip() for p in text.split(",")]
    return [Fraction(p) for p in parts]


@dataclass(frozen=True)
class DyValSample:
    task: str
    description: str
    ground_truth: str
    checker: Checker
    provenance: dict
    structure: object = field(compare=False, repr=False)

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "description": self.description,
            "ground_truth": self.ground_truth,
            "checker": asdict(self.checker),
            "provenance": self.provenance,
        }


def _layers(depth: int, width: int) -> list[int]:
    return [min(width, 2**k) for k in range(depth + 1)]


def _expression_dag(rng: random.Random, spec: DyValSpec, family: str) -> TaskDag:
    sizes = _layers(spec.depth, spec.width)
    layers, next_slot = [], 0
    for size in sizes:
        layers.append(list(range(next_slot, next_slot + size)))
        next_slot += size
    operands: dict[int, list[int]] = {}
    layer_of = {slot: k for k, layer in enumerate(layers) for slot in layer}
    for k in range(spec.depth):
        ops, below = layers[k], layers[k + 1]
        for op in ops:
            operands[op] = []
        for j, child in enumerate(below):
            operands[ops[j % len(ops)]].append(child)
        for op in ops:
            if len(operands[op]) == 1 and len(below) > 1 and rng.random() < 0.5:
                others = [c for c in below if c not in operands[op]]
                operands[op].append(rng.choice(others))
    # extra links give a unary operator a second operand from a deeper layer
    unary = [op for op, args in operands.items() if len(args) == 1 and layer_of[op] <= spec.depth - 2]
    for _ in range(spec.extra_links):
        if not unary:
            break
        op = rng.choice(unary)
        unary.remove(op)
        deeper = [s for layer in layers[layer_of[op] + 2 :] for s in layer]
        operands[op].append(rng.choice(deeper))
    # leaves get the smallest ids so ids ascend in evaluation order
    order = [s for layer in reversed(layers) for s in layer]
    name = {slot: f"n{i + 1}" for i, slot in enumerate(order)}
    nodes, edges = [], []
    for slot in order:
        args = operands.get(slot)
        if args is None:
            if family == "arithmetic":
                value = rng.randint(*spec.value_range)
            else:
                value = rng.random() < 0.5
            nodes.append(Node(name[slot], None, value))
        else:
            pool = BINARY_OPS[family] if len(args) == 2 else UNARY_OPS[family]
            nodes.append(Node(name[slot], rng.choice(pool)))
            edges.extend((name[a], name[slot]) for a in args)
    return TaskDag(tuple(nodes), tuple(edges), "expression", {"target": name[layers[0][0]]})


def _graph_dag(rng: random.Random, spec: DyValSpec) -> TaskDag:
    sizes = _layers(spec.depth, spec.width)
    layers, count = [], 0
    for size in sizes:
        layers.append([f"n{i + 1}" for i in range(count, count + size)])
        count += size
    edges = []
    for k in range(1, len(layers)):
        for child in layers[k]:
            edges.append((rng.choice(layers[k - 1]), child))
    added, tries = 0, 0
    while added < spec.extra_links and tries < 20 * (spec.extra_links + 1):
        tries += 1
        k = rng.randrange(len(layers) - 1)
        j = rng.randrange(k + 1, len(layers))
        edge = (rng.choice(layers[k]), rng.choice(layers[j]))
        if edge not in edges:
            edges.append(edge)
            added += 1
    rank = {nid: i for i, nid in enumerate(n for layer in layers for n in layer)}
    edges.sort(key=lambda e: (rank[e[0]], rank[e[1]]))
    weighted = spec.task == "max_sum_path"
    nodes = tuple(Node(nid, None, rng.randint(*spec.value_range) if weighted else None) for layer in layers for nid in layer)
    ids = [n.id for n in nodes]
    dag = TaskDag(nodes, tuple(edges), "graph")
    pairs = [(a, b) for a in ids for b in ids if a != b]
    descendants = {a: _descendants(dag, a) for a in ids}
    reach = [(a, b) for a, b in pairs if b in descendants[a]]
    if weighted:
        source, target = rng.choice(reach)
    else:
        want = rng.random() < 0.5
        reach_set = set(reach)
        pool = reach if want else [p for p in pairs if p not in reach_set]
        source, target = rng.choice(pool or reach)
    return replace(dag, query={"source": source, "target": target})


def _descendants(dag: TaskDag, source: str) -> set:
    seen, stack = set(), [source]
    while stack:
        for nxt in dag.successors(stack.pop()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _linear_system(rng: random.Random, spec: DyValSpec) -> LinearSystem:
    a, b, d, e, c, f = (rng.randint(*spec.value_range) for _ in range(6))
    system = LinearSystem(a, b, c, d, e, f)
    if system.determinant == 0:
        raise SingularSystem("singular draw")
    return system


def _draw(rng: random.Random, spec: DyValSpec):
    task = spec.task
    if task == "linear_equation":
        return _linear_system(rng, spec)
    if task in GRAPH_TASKS:
        return _graph_dag(rng, spec)
    family = "arithmetic" if task == "arithmetic" else "logic"
    dag = _expression_dag(rng, spec, family)
    if task == "arithmetic":
        evaluate_nodes(dag)  # raises on division by zero so the draw is rejected
    if task == "abductive_logic":
        premise = rng.choice(dag.leaves)
        conclusion = dag.query["target"]
        observed = bool(evaluate_nodes(dag)[conclusion])
        dag = replace(dag, query={"premise": premise, "conclusion": conclusion, "observed": observed})
    return dag


def generate(spec: DyValSpec) -> DyValSample:
    """Draw one sample; rejected draws (zero division, singular systems) advance the stream."""
    rng = random.Random(f"{spec.task}:{spec.seed}")
    for attempt in range(1, MAX_ATTEMPTS + 1):
        try:
            structure = _draw(rng, spec)
            if isinstance(structure, TaskDag):
                check_dag(structure)
            truth = oracle_evaluate(structure, spec.task)
        except (ZeroDivisionError, SingularSystem):
            continue
        return DyValSample(
            task=spec.task,
            description=describe(structure, spec.task),
            ground_truth=truth,
            checker=Checker(CHECKERS[spec.task]),
            provenance={"spec": spec.to_json(), "attempts": attempt},
            structure=structure,
        )
    raise GenerationExhausted(f"{spec.task} seed {spec.seed}: no valid draw in {MAX_ATTEMPTS} attempts")


def regenerate(provenance: dict) -> DyValSample:
    return generate(DyValSpec.from_json(provenance["spec"]))


def emit_batch(spec: DyValSpec, count: int) -> list[DyValSample]:
    if count < 0:
        raise ConfigError("count must be non-negative")
    return [generate(replace(spec, seed=spec.seed + i)) for i in range(count)]


# description grammar

ARITH_PHRASE = {
    "add": "{0} plus {1}",
    "sub": "{0} minus {1}",
    "mul": "{0} times {1}",
    "div": "{0} divided by {1}",
    "double": "twice {0}",
    "negate": "the negation of {0}",
}
BOOL_PHRASE = {"and": "{0} AND {1}", "or": "{0} OR {1}", "not": "NOT {0}"}
RULE_PHRASE = {
    "and": "{0} and {1} are both true",
    "or": "at least one of {0} and {1} is true",
    "not": "{0} is false",
}


def _signed(coef: int, var: str, first: bool) -> str:
    if first:
        return f"{coef}{var}"
    return f"{'+' if coef >= 0 else '-'} {abs(coef)}{var}"


def describe(structure, task: str) -> str:
    if task == "linear_equation":
        s = structure
        eq1 = f"{_signed(s.a, 'x', True)} {_signed(s.b, 'y', False)} = {s.c}"
        eq2 = f"{_signed(s.d, 'x', True)} {_signed(s.e, 'y', False)} = {s.f}"
        return f"Solve the system of equations {eq1} and {eq2}. What are x and y?"
    dag = structure
    lines = []
    if task in GRAPH_TASKS:
        if task == "max_sum_path":
            lines += [f"Node {n.id} has weight {n.value}." for n in dag.nodes]
        else:
            lines.append(f"The graph has nodes {', '.join(n.id for n in dag.nodes)}.")
        lines += [f"There is an edge from {a} to {b}." for a, b in dag.edges]
        q = dag.query
        if task == "reachability":
            lines.append(f"Is there a path from {q['source']} to {q['target']}?")
        else:
            lines.append(
                f"What is the largest total weight of a path from {q['source']} to {q['target']}, counting both ends?"
            )
        return " ".join(lines)
    hidden = dag.query.get("premise")
    for nid in dag.topological_order():
        n = dag.node(nid)
        args = dag.inputs(nid)
        if task == "arithmetic":
            rhs = str(n.value) if n.op is None else ARITH_PHRASE[n.op].format(*args)
            lines.append(f"The value of {nid} is {rhs}.")
        elif task == "boolean_logic":
            rhs = ("True" if n.value else "False") if n.op is None else BOOL_PHRASE[n.op].format(*args)
            lines.append(f"The value of {nid} is {rhs}.")
        elif n.op is None:
            if nid == hidden:
                lines.append(f"Whether {nid} is true is unknown.")
            else:
                lines.append(f"{nid} is {'true' if n.value else 'false'}.")
        else:
            lines.append(f"{nid} is true exactly when {RULE_PHRASE[n.op].format(*args)}.")
    if task in ("arithmetic", "boolean_logic"):
        lines.append(f"What is the value of {dag.query['target']}?")
    elif task == "deductive_logic":
        lines.append(f"Is {dag.query['target']} true or false?")
    else:
        q = dag.query
        lines.append(f"It is observed that {q['conclusion']} is {'true' if q['observed'] else 'false'}.")
        lines.append(f"What must {q['premise']} be: True, False, or undetermined?")
    return " ".join(lines)


def samples_to_records(samples: Sequence[DyValSample], prefix: str = "dyval") -> list[DataRecord]:
    return [DataRecord(f"{prefix}-{i:04d}", {"description": s.description}, s.ground_truth) for i, s in enumerate(samples)]


def write_dyval_dataset(path, name: str, samples: Sequence[DyValSample], fewshot: Sequence[DyValSample] = ()):
    """Write samples as a freeform dataset directory readable by the dataset registry."""
    meta = DatasetMeta(name, "reasoning_freeform", (), ("description",))
    pool = samples_to_records(fewshot, prefix=f"{name}-shot") if fewshot else None
    return write_dataset_dir(path, meta, samples_to_records(samples, prefix=name), pool)
