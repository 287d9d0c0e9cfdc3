"""Search for a shortest ordered sorting sequence.

Every search node is a configuration plus the steps that led to it.  A node
branches once per object that is both accessible and next in its group.  When
no such object exists, the cheapest relocation among the next-in-group
objects is applied first and shared by all children, each relocation counting
as one manipulation.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence, Union

from sortplan.accessibility import Configuration, get_accessible_objects
from sortplan.instances import Instance
from sortplan.relocation import (
    RelocationInfeasible,
    RelocationPlan,
    choose_buffer_slot,
    plan_area,
    reloc_objs,
)

log = logging.getLogger(__name__)


class Strategy(str, Enum):
    BFS = "bfs"
    DFS = "dfs"
    BEST_FIRST = "best"
    ASTAR = "astar"

    @classmethod
    def parse(cls, value: Union[str, Strategy]) -> Strategy:
        if isinstance(value, Strategy):
            return value
        aliases = {"bestfirst": "best", "best-first": "best", "a*": "astar", "breadth": "bfs", "depth": "dfs"}
        key = str(value).strip().lower()
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown strategy {value!r}; choose from bfs, dfs, best, astar") from None


class Outcome(str, Enum):
    SUCCESS = "success"
    INFEASIBLE = "infeasible"
    FAILURE = "failure"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Depot:
    group: int


@dataclass(frozen=True)
class Buffer:
    slot: int


@dataclass(frozen=True)
class Step:
    object: int
    destination: Union[Depot, Buffer]

    @property
    def is_buffer(self) -> bool:
        return isinstance(self.destination, Buffer)

    def __str__(self) -> str:
        if self.is_buffer:
            return f"{self.object}->buffer[{self.destination.slot}]"
        return f"{self.object}->depot[{self.destination.group}]"


class InfeasibleNode(Exception):
    """No object can be manipulated from this configuration."""


@dataclass(eq=False)
class SearchNode:
    config: Configuration
    parent: SearchNode | None = None
    steps: tuple[Step, ...] = ()
    g: int = 0
    h: int = 0
    penalty: int = 0

    @property
    def path(self) -> list[Step]:
        chunks = []
        node = self
        while node is not None:
            chunks.append(node.steps)
            node = node.parent
        return [s for chunk in reversed(chunks) for s in chunk]

    def recent(self, count: int) -> list[Step]:
        """The last ``count`` steps of the path, oldest first."""
        out: list[Step] = []
        node = self
        while node is not None and len(out) < count:
            out.extend(reversed(node.steps))
            node = node.parent
        return list(reversed(out[:count]))

    @property
    def is_goal(self) -> bool:
        return self.h == 0


@dataclass(frozen=True)
class PlanResult:
    outcome: Outcome
    sequence: tuple[Step, ...] = ()
    nodes_expanded: int = 0
    elapsed: float = 0.0
    strategy: Strategy | None = None
    relocations: int = field(default=0)

    @property
    def success(self) -> bool:
        return self.outcome is Outcome.SUCCESS

    def __len__(self) -> int:
        return len(self.sequence)


def get_next_objs(config: Configuration) -> frozenset[int]:
    """The lowest-rank unsorted member of each unfinished group."""
    return frozenset(
        members[h] for members, h in zip(config.catalogue.groups, config.heights) if h < len(members)
    )


def penalty(path: Sequence[Step], m: int, group_of) -> int:
    """Same-group adjacent pairs among the last ``m`` steps."""
    if m < 1:
        raise ValueError("robot count must be >= 1")
    window = list(path)[-m:]
    return sum(group_of[a.object] == group_of[b.object] for a, b in zip(window, window[1:]))


def _cheapest_relocation(config: Configuration, targets, corridor_radius: float) -> RelocationPlan | None:
    best = None
    best_key = None
    for target in sorted(targets):
        try:
            plan = reloc_objs(config, target, corridor_radius)
        except RelocationInfeasible:
            continue
        key = (len(plan), round(plan_area(config, plan), 12), target)
        if best_key is None or key < best_key:
            best, best_key = plan, key
    return best


def expand(
    node: SearchNode,
    corridor_radius: float,
    *,
    m: int = 1,
    n_buffers: int | None = None,
) -> list[SearchNode]:
    """Children of ``node``; raises InfeasibleNode when nothing is accessible."""
    config = node.config
    cat = config.catalogue
    accessible = get_accessible_objects(config, corridor_radius)
    if not accessible:
        raise InfeasibleNode("no accessible object")
    next_objs = get_next_objs(config)
    sortable = accessible & next_objs
    prefix: tuple[Step, ...] = ()
    if not sortable:
        plan = _cheapest_relocation(config, next_objs, corridor_radius)
        if plan is None:
            raise InfeasibleNode("no next object can be cleared")
        slots = cat.n if n_buffers is None else n_buffers
        steps = []
        for oid in plan.to_relocate:
            slot = choose_buffer_slot(config, slots)
            config = config.to_buffer(oid, slot)
            steps.append(Step(oid, Buffer(slot)))
        prefix = tuple(steps)
        sortable = get_accessible_objects(config, corridor_radius) & next_objs
        if not sortable:
            raise InfeasibleNode("relocation did not expose a next object")
        log.debug("relocated %s to expose %s", plan.to_relocate, plan.target)

    group_of = cat.group_of
    tail = node.recent(m) if m > 1 else []
    children = []
    for oid in sorted(sortable, key=group_of.__getitem__):
        gi = group_of[oid]
        steps = prefix + (Step(oid, Depot(gi)),)
        window = (tail + list(steps))[-m:]
        children.append(
            SearchNode(
                config.sort(oid),
                node,
                steps,
                node.g + len(steps),
                node.h - 1,
                penalty(window, m, group_of),
            )
        )
    return children


class _Frontier:
    def __init__(self, strategy: Strategy):
        self.strategy = strategy
        self._counter = itertools.count()
        self._heap: list = []
        self._stack: list = []

    def push_all(self, nodes: Sequence[SearchNode]) -> None:
        s = self.strategy
        if s is Strategy.DFS:
            # first-generated child is expanded first
            self._stack.extend(reversed(nodes))
            return
        for node in nodes:
            if s is Strategy.BFS:
                # FIFO by manipulation depth: a relocation is a tree level of its own
                key = (node.g,)
            elif s is Strategy.BEST_FIRST:
                key = (node.h, node.penalty)
            else:
                key = (node.g + node.h, node.penalty)
            heapq.heappush(self._heap, (*key, next(self._counter), node))

    def pop(self) -> SearchNode:
        if self.strategy is Strategy.DFS:
            return self._stack.pop()
        return heapq.heappop(self._heap)[-1]

    def __len__(self) -> int:
        return len(self._stack) + len(self._heap)


def search(
    instance: Instance,
    strategy: Union[str, Strategy] = Strategy.BEST_FIRST,
    time_limit: float = 30.0,
    m: int | None = None,
    *,
    on_expand=None,
) -> tuple[PlanResult, SearchNode | None]:
    """Run the search; returns the result and the goal node (None unless solved)."""
    strategy = Strategy.parse(strategy)
    if not time_limit > 0:
        raise ValueError("time_limit must be positive")
    m = instance.m if m is None else m
    if m < 1:
        raise ValueError("robot count must be >= 1")
    corridor = instance.corridor_radius
    start = time.perf_counter()
    root_config = instance.initial_configuration()
    root = SearchNode(root_config, None, (), 0, instance.n, 0)
    frontier = _Frontier(strategy)
    frontier.push_all([root])
    expanded = 0

    def done(outcome, node=None):
        seq = tuple(node.path) if node is not None else ()
        result = PlanResult(
            outcome,
            seq,
            expanded,
            time.perf_counter() - start,
            strategy,
            sum(s.is_buffer for s in seq),
        )
        log.debug("%s: %s after %d expansions, |O_S|=%d", strategy.value, outcome.value, expanded, len(seq))
        return result, node

    while len(frontier):
        if time.perf_counter() - start > time_limit:
            return done(Outcome.TIMEOUT)
        node = frontier.pop()
        if node.is_goal:
            return done(Outcome.SUCCESS, node)
        try:
            children = expand(node, corridor, m=m, n_buffers=len(instance.buffers))
        except InfeasibleNode as exc:
            log.info("infeasible after %d expansions: %s", expanded, exc)
            return done(Outcome.INFEASIBLE)
        expanded += 1
        if on_expand is not None:
            on_expand(node, children)
        frontier.push_all(children)
    return done(Outcome.FAILURE)


def sort_objects(
    instance: Instance,
    strategy: Union[str, Strategy] = Strategy.BEST_FIRST,
    time_limit: float = 30.0,
    m: int | None = None,
) -> PlanResult:
    """Shortest ordered sorting sequence for ``instance`` under ``strategy``."""
    result, _ = search(instance, strategy, time_limit, m)
    return result


def iter_replay(instance: Instance, sequence: Sequence[Step]) -> Iterator[Configuration]:
    """Configurations before each step and after the last; raises ValueError on an illegal step."""
    config = instance.initial_configuration()
    cat = config.catalogue
    corridor = instance.corridor_radius
    for i, step in enumerate(sequence):
        yield config
        oid = step.object
        if oid not in cat.index:
            raise ValueError(f"step {i}: unknown object {oid}")
        if oid not in get_accessible_objects(config, corridor):
            raise ValueError(f"step {i}: object {oid} is not accessible")
        if step.is_buffer:
            slot = step.destination.slot
            if config.location(oid) != "clutter":
                raise ValueError(f"step {i}: only in-clutter objects go to buffers")
            if not 0 <= slot < len(instance.buffers):
                raise ValueError(f"step {i}: no buffer slot {slot}")
            config = config.to_buffer(oid, slot)
        else:
            if step.destination.group != cat.group_of[oid]:
                raise ValueError(f"step {i}: object {oid} sent to the wrong depot")
            config = config.sort(oid)
    yield config


def replay_validate(instance: Instance, sequence: Sequence[Step]) -> bool:
    """True iff every step is legal and the sequence leaves all objects sorted."""
    try:
        *_, final = iter_replay(instance, sequence)
    except ValueError:
        return False
    return final.n_sorted == instance.n


def step_to_dict(step: Step) -> dict:
    if step.is_buffer:
        return {"object": step.object, "to": "buffer", "index": step.destination.slot}
    return {"object": step.object, "to": "depot", "index": step.destination.group}


def step_from_dict(d: dict) -> Step:
    kind = d["to"]
    if kind == "buffer":
        return Step(int(d["object"]), Buffer(int(d["index"])))
    if kind == "depot":
        return Step(int(d["object"]), Depot(int(d["index"])))
    raise ValueError(f"unknown destination kind {kind!r}")


def result_to_dict(result: PlanResult) -> dict:
    return {
        "outcome": result.outcome.value,
        "strategy": result.strategy.value if result.strategy else None,
        "nodes_expanded": result.nodes_expanded,
        "elapsed": result.elapsed,
        "sequence": [step_to_dict(s) for s in result.sequence],
    }


def result_from_dict(d: dict) -> PlanResult:
    seq = tuple(step_from_dict(s) for s in d["sequence"])
    return PlanResult(
        Outcome(d["outcome"]),
        seq,
        int(d.get("nodes_expanded", 0)),
        float(d.get("elapsed", 0.0)),
        Strategy.parse(d["strategy"]) if d.get("strategy") else None,
        sum(s.is_buffer for s in seq),
    )
