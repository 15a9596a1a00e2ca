"""Task structures and the reference evaluator for generated reasoning problems."""
from __future__ import annotations

import heapq

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Optional, Union

from ..errors import ArityViolation, CyclicGraph, SingularSystem

ARITY = {
    "add": 2,
    "sub": 2,
    "mul": 2,
    "div": 2,
    "double": 1,
    "negate": 1,
    "and": 2,
    "or": 2,
    "not": 1,
}
TASKS = (
    "arithmetic",
    "linear_equation",
    "boolean_logic",
    "deductive_logic",
    "abductive_logic",
    "reachability",
    "max_sum_path",
)
EXPRESSION_TASKS = ("arithmetic", "boolean_logic", "deductive_logic", "abductive_logic")
GRAPH_TASKS = ("reachability", "max_sum_path")


@dataclass(frozen=True)
class Node:
    """A DAG node. Operators carry ``op``; leaves and graph nodes carry ``value``."""

    id: str
    op: Optional[str] = None
    value: object = None


@dataclass(frozen=True)
class TaskDag:
    nodes: tuple
    edges: tuple
    kind: str = "expression"
    query: dict = field(default_factory=dict, hash=False, compare=True)

    @cached_property
    def _by_id(self) -> dict:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _adjacency(self) -> tuple[dict, dict]:
        ins: dict[str, list[str]] = {}
        outs: dict[str, list[str]] = {}
        for a, b in self.edges:
            outs.setdefault(a, []).append(b)
            ins.setdefault(b, []).append(a)
        return ins, outs

    def node(self, node_id: str) -> Node:
        return self._by_id[node_id]

    def inputs(self, node_id: str) -> list[str]:
        """Operand ids of ``node_id`` in edge order (order matters for sub/div)."""
        return list(self._adjacency[0].get(node_id, ()))

    def successors(self, node_id: str) -> list[str]:
        return list(self._adjacency[1].get(node_id, ()))

    @property
    def roots(self) -> list[str]:
        has_out = {a for a, _ in self.edges}
        return [n.id for n in self.nodes if n.id not in has_out]

    @property
    def leaves(self) -> list[str]:
        has_in = {b for _, b in self.edges}
        return [n.id for n in self.nodes if n.id not in has_in]

    def topological_order(self) -> list[str]:
        """Kahn's algorithm, ties broken by node listing order."""
        ids = [n.id for n in self.nodes]
        indeg = {i: 0 for i in ids}
        for a, b in self.edges:
            if a not in indeg or b not in indeg:
                raise ArityViolation(f"edge ({a}, {b}) names an unknown node")
            indeg[b] += 1
        pos = {i: k for k, i in enumerate(ids)}
        order, ready = [], [pos[i] for i in ids if indeg[i] == 0]
        heapq.heapify(ready)
        while ready:
            cur = ids[heapq.heappop(ready)]
            order.append(cur)
            for nxt in self.successors(cur):
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    heapq.heappush(ready, pos[nxt])
        if len(order) != len(ids):
            raise CyclicGraph("graph has a cycle")
        return order


@dataclass(frozen=True)
class LinearSystem:
    """``a*x + b*y = c`` and ``d*x + e*y = f``."""

    a: int
    b: int
    c: int
    d: int
    e: int
    f: int

    @property
    def determinant(self) -> int:
        return self.a * self.e - self.b * self.d


Structure = Union[TaskDag, LinearSystem]


def check_dag(dag: TaskDag) -> list[str]:
    """Assert acyclicity and, for expression DAGs, operator arity. Returns a topological order."""
    order = dag.topological_order()
    if len({n.id for n in dag.nodes}) != len(dag.nodes):
        raise ArityViolation("duplicate node ids")
    if len(set(dag.edges)) != len(dag.edges):
        raise ArityViolation("duplicate edges")
    if dag.kind == "expression":
        for n in dag.nodes:
            want = ARITY.get(n.op, 0) if n.op is not None else 0
            if n.op is not None and n.op not in ARITY:
                raise ArityViolation(f"{n.id}: unknown operator {n.op!r}")
            got = len(dag.inputs(n.id))
            if got != want:
                raise ArityViolation(f"{n.id}: operator {n.op or 'leaf'} expects {want} inputs, has {got}")
    return order


def format_number(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def format_bool(value: bool) -> str:
    return "True" if value else "False"


def _apply(op: str, args: list):
    if op == "add":
        return args[0] + args[1]
    if op == "sub":
        return args[0] - args[1]
    if op == "mul":
        return args[0] * args[1]
    if op == "div":
        if args[1] == 0:
            raise ZeroDivisionError("division by zero")
        return Fraction(args[0]) / Fraction(args[1])
    if op == "double":
        return 2 * args[0]
    if op == "negate":
        return -args[0]
    if op == "and":
        return args[0] and args[1]
    if op == "or":
        return args[0] or args[1]
    if op == "not":
        return not args[0]
    raise ArityViolation(f"unknown operator {op!r}")


def evaluate_nodes(dag: TaskDag, overrides: Optional[dict] = None) -> dict:
    """Bottom-up value of every node; ``overrides`` replaces leaf values."""
    overrides = overrides or {}
    values = {}
    for nid in check_dag(dag):
        n = dag.node(nid)
        if n.op is None:
            values[nid] = overrides.get(nid, n.value)
        else:
            values[nid] = _apply(n.op, [values[i] for i in dag.inputs(nid)])
    return values


def _target(dag: TaskDag) -> str:
    if "target" in dag.query:
        return dag.query["target"]
    roots = dag.roots
    if len(roots) != 1:
        raise ArityViolation(f"expected a single root, found {roots}")
    return roots[0]


def forward_chain(dag: TaskDag) -> dict:
    """Derive truth values by repeatedly firing rules until nothing changes."""
    check_dag(dag)
    known = {n.id: bool(n.value) for n in dag.nodes if n.op is None}
    rules = [(n.id, n.op, dag.inputs(n.id)) for n in dag.nodes if n.op is not None]
    changed = True
    while changed:
        changed = False
        for head, op, body in rules:
            if head in known:
                continue
            vals = [known.get(b) for b in body]
            result = None
            if op == "and":
                if False in vals:
                    result = False
                elif all(v is True for v in vals):
                    result = True
            elif op == "or":
                if True in vals:
                    result = True
                elif all(v is False for v in vals):
                    result = False
            elif op == "not" and vals[0] is not None:
                result = not vals[0]
            if result is not None:
                known[head] = result
                changed = True
    return known


def abduce(dag: TaskDag, premise: str, conclusion: str, observed: bool) -> str:
    """Value of ``premise`` forced by observing ``conclusion``; "undetermined" if both fit."""
    fits = [v for v in (False, True) if bool(evaluate_nodes(dag, {premise: v})[conclusion]) == observed]
    if not fits:
        raise ArityViolation("no premise value is consistent with the observation")
    return format_bool(fits[0]) if len(fits) == 1 else "undetermined"


def reachable(dag: TaskDag, source: str, target: str) -> bool:
    seen, stack = {source}, [source]
    while stack:
        cur = stack.pop()
        if cur == target:
            return True
        for nxt in dag.successors(cur):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def all_paths(dag: TaskDag, source: str, target: str) -> list[list[str]]:
    paths, stack = [], [(source, [source])]
    while stack:
        cur, path = stack.pop()
        if cur == target:
            paths.append(path)
            continue
        for nxt in dag.successors(cur):
            stack.append((nxt, path + [nxt]))
    return paths


def solve_linear(system: LinearSystem) -> tuple[Fraction, Fraction]:
    det = system.determinant
    if det == 0:
        raise SingularSystem("coefficient matrix is singular")
    x = Fraction(system.c * system.e - system.b * system.f, det)
    y = Fraction(system.a * system.f - system.c * system.d, det)
    return x, y


def oracle_evaluate(structure: Structure, task: str) -> str:
    """Ground-truth answer string for ``structure`` under ``task``."""
    if task == "linear_equation":
        if not isinstance(structure, LinearSystem):
            raise ArityViolation("linear_equation needs a LinearSystem")
        x, y = solve_linear(structure)
        return f"x={format_number(x)}, y={format_number(y)}"
    dag = structure
    check_dag(dag)
    if task == "arithmetic":
        return format_number(evaluate_nodes(dag)[_target(dag)])
    if task == "boolean_logic":
        return format_bool(evaluate_nodes(dag)[_target(dag)])
    if task == "deductive_logic":
        return format_bool(forward_chain(dag)[_target(dag)])
    if task == "abductive_logic":
        q = dag.query
        return abduce(dag, q["premise"], q["conclusion"], q["observed"])
    if task == "reachability":
        return format_bool(reachable(dag, dag.query["source"], dag.query["target"]))
    if task == "max_sum_path":
        paths = all_paths(dag, dag.query["source"], dag.query["target"])
        if not paths:
            raise ArityViolation("no path between the queried nodes")
        weight = {n.id: n.value for n in dag.nodes}
        return str(max(sum(weight[i] for i in p) for p in paths))
    raise ArityViolation(f"unknown task {task!r}")
