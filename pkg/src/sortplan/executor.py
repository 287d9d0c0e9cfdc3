"""Greedy allocation of a sorting sequence to robots and its discrete-event execution.

Timing is kinematics-free: straight-line travel at constant speed, fixed pick
and place durations, robots pass through one another.  Steps are handed out
strictly in sequence order, each to the nearest idle robot.  A pick waits
until every earlier step's object has been lifted (so the object is as
accessible as planned) and, for an object parked in a buffer, until it has
been set down there.  A depot admits one placing robot at a time and only the
next object by rank; other arrivals wait.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

from sortplan.instances import Instance
from sortplan.planner import Outcome, PlanResult, Step


class RobotState(str, Enum):
    IDLE = "idle"
    TO_PICK = "to_pick"
    PICKING = "picking"
    TO_PLACE = "to_place"
    WAITING = "waiting"
    PLACING = "placing"


@dataclass
class Robot:
    id: int
    position: tuple[float, float]
    speed: float = 1.0
    state: RobotState = RobotState.IDLE
    carrying: int | None = None

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"robot {self.id}: speed must be > 0")


@dataclass(frozen=True)
class TimingParams:
    pick_duration: float = 3.0
    place_duration: float = 3.0
    # overrides every robot's own speed when set
    speed: float | None = None


@dataclass(frozen=True)
class Event:
    time: float
    robot: int
    kind: str  # assign | travel | pick | wait | place | placed
    object: int
    x: float
    y: float

    def to_record(self) -> dict:
        return {
            "time": round(self.time, 9),
            "robot": self.robot,
            "event": self.kind,
            "object": self.object,
            "x": self.x,
            "y": self.y,
        }


@dataclass
class ExecutionTrace:
    events: list[Event] = field(default_factory=list)
    makespan: float = 0.0
    per_depot_wait: dict[int, float] = field(default_factory=dict)

    @property
    def total_wait(self) -> float:
        return sum(self.per_depot_wait.values())

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_record()) + "\n" for e in self.events)


def assign_next(
    sequence: Sequence[Step],
    cursor: int,
    idle: Iterable[Robot],
    locate: Callable[[int], tuple[float, float]],
) -> tuple[int, Step] | None:
    """Pair the step at ``cursor`` with the nearest idle robot (ties: lower id)."""
    if cursor >= len(sequence):
        return None
    step = sequence[cursor]
    source = locate(cursor)
    best = min(idle, key=lambda r: (math.dist(r.position, source), r.id), default=None)
    if best is None:
        return None
    return best.id, step


def _step_poses(instance: Instance, sequence: Sequence[Step]):
    """(source, destination) pose of every step, tracking buffer parking."""
    where = {o.id: (o.x, o.y) for o in instance.objects}
    poses = []
    for step in sequence:
        src = where[step.object]
        if step.is_buffer:
            dst = instance.buffers[step.destination.slot]
            where[step.object] = dst
        else:
            dst = instance.depots[step.destination.group]
        poses.append((src, dst))
    return poses


def simulate(instance: Instance, plan: PlanResult, timing: TimingParams | None = None) -> ExecutionTrace:
    """Execute ``plan`` with the instance's robots; returns the event trace."""
    if plan.outcome is not Outcome.SUCCESS:
        raise ValueError("only successful plans can be executed")
    timing = timing or TimingParams()
    seq = list(plan.sequence)
    known = {o.id for o in instance.objects}
    stray = sorted({s.object for s in seq} - known)
    if stray or {s.object for s in seq if not s.is_buffer} != known:
        raise ValueError(f"plan does not match the instance objects (unknown: {stray})")

    cat = instance.catalogue
    poses = _step_poses(instance, seq)
    # index of the buffer step that parks the object picked at step i, if any
    parked_by: dict[int, int] = {}
    last_buffer: dict[int, int] = {}
    for i, step in enumerate(seq):
        if step.object in last_buffer:
            parked_by[i] = last_buffer.pop(step.object)
        if step.is_buffer:
            last_buffer[step.object] = i

    robots = {
        r.id: Robot(r.id, (r.x, r.y), timing.speed if timing.speed is not None else r.speed)
        for r in instance.robots
    }
    trace = ExecutionTrace(per_depot_wait={g: 0.0 for g in range(instance.k)})
    events = trace.events
    heap: list = []
    counter = itertools.count()
    picked = [False] * len(seq)
    placed = [False] * len(seq)
    picked_prefix = 0
    depot_busy = [False] * instance.k
    depot_height = [0] * instance.k
    depot_queue: dict[int, list[tuple[int, int, float]]] = {g: [] for g in range(instance.k)}
    pick_waiters: list[tuple[int, int]] = []
    job: dict[int, int] = {}
    cursor = 0

    def emit(t, rid, kind, i, pos):
        events.append(Event(t, rid, kind, seq[i].object, pos[0], pos[1]))

    def schedule(t, kind, rid, i):
        heapq.heappush(heap, (t, next(counter), kind, rid, i))

    def dispatch(t):
        nonlocal cursor
        while cursor < len(seq):
            idle = [r for r in robots.values() if r.state is RobotState.IDLE]
            choice = assign_next(seq, cursor, idle, lambda i: poses[i][0])
            if choice is None:
                return
            rid, _ = choice
            robot = robots[rid]
            i = cursor
            cursor += 1
            job[rid] = i
            src = poses[i][0]
            emit(t, rid, "assign", i, robot.position)
            emit(t, rid, "travel", i, robot.position)
            robot.state = RobotState.TO_PICK
            schedule(t + math.dist(robot.position, src) / robot.speed, "arrive_pick", rid, i)

    def can_pick(i):
        return picked_prefix >= i and (i not in parked_by or placed[parked_by[i]])

    def start_pick(t, rid, i):
        robot = robots[rid]
        robot.state = RobotState.PICKING
        emit(t, rid, "pick", i, robot.position)
        schedule(t + timing.pick_duration, "pick_done", rid, i)

    def wake_pickers(t):
        for entry in list(pick_waiters):
            rid, i = entry
            if can_pick(i):
                pick_waiters.remove(entry)
                start_pick(t, rid, i)

    def start_place(t, rid, i):
        robot = robots[rid]
        robot.state = RobotState.PLACING
        if not seq[i].is_buffer:
            depot_busy[seq[i].destination.group] = True
        emit(t, rid, "place", i, robot.position)
        schedule(t + timing.place_duration, "place_done", rid, i)

    def depot_ready(i):
        g = seq[i].destination.group
        return not depot_busy[g] and depot_height[g] == cat.rank_of[seq[i].object] - 1

    dispatch(0.0)
    while heap:
        t, _, kind, rid, i = heapq.heappop(heap)
        robot = robots[rid]
        src, dst = poses[i]
        if kind == "arrive_pick":
            robot.position = src
            if can_pick(i):
                start_pick(t, rid, i)
            else:
                robot.state = RobotState.WAITING
                emit(t, rid, "wait", i, src)
                pick_waiters.append((rid, i))
        elif kind == "pick_done":
            picked[i] = True
            while picked_prefix < len(seq) and picked[picked_prefix]:
                picked_prefix += 1
            robot.carrying = seq[i].object
            robot.state = RobotState.TO_PLACE
            emit(t, rid, "travel", i, src)
            schedule(t + math.dist(src, dst) / robot.speed, "arrive_place", rid, i)
            wake_pickers(t)
        elif kind == "arrive_place":
            robot.position = dst
            if seq[i].is_buffer or depot_ready(i):
                start_place(t, rid, i)
            else:
                robot.state = RobotState.WAITING
                emit(t, rid, "wait", i, dst)
                depot_queue[seq[i].destination.group].append((rid, i, t))
        elif kind == "place_done":
            placed[i] = True
            robot.carrying = None
            emit(t, rid, "placed", i, dst)
            trace.makespan = t
            if seq[i].is_buffer:
                wake_pickers(t)
            else:
                g = seq[i].destination.group
                depot_busy[g] = False
                depot_height[g] += 1
                # FIFO among waiters, but only the next rank may enter
                for entry in depot_queue[g]:
                    wrid, wi, since = entry
                    if depot_ready(wi):
                        depot_queue[g].remove(entry)
                        trace.per_depot_wait[g] += t - since
                        start_place(t, wrid, wi)
                        break
            robot.state = RobotState.IDLE
            job.pop(rid, None)
            dispatch(t)

    if not all(placed):
        raise RuntimeError("execution stalled before every step completed")
    return trace


def check_trace(instance: Instance, plan: PlanResult, trace: ExecutionTrace) -> list[str]:
    """Violations of the trace invariants; empty when the trace is sound."""
    problems = []
    times = [e.time for e in trace.events]
    if any(b < a for a, b in zip(times, times[1:])):
        problems.append("events are not time-ordered")
    cat = instance.catalogue
    carrying: dict[int, int] = {}
    holder: dict[int, int] = {}
    place_start: dict[tuple[int, int], float] = {}
    depot_intervals: dict[int, list[tuple[float, float, int]]] = {}
    depot_of = {tuple(p): g for g, p in enumerate(instance.depots)}
    location: dict[int, str] = {}
    for e in trace.events:
        if e.kind == "pick":
            if e.robot in carrying:
                problems.append(f"robot {e.robot} picks {e.object} while carrying {carrying[e.robot]}")
            if e.object in holder:
                problems.append(f"object {e.object} picked by two robots")
            carrying[e.robot] = e.object
            holder[e.object] = e.robot
        elif e.kind == "place":
            place_start[(e.robot, e.object)] = e.time
        elif e.kind == "placed":
            carrying.pop(e.robot, None)
            holder.pop(e.object, None)
            g = depot_of.get((e.x, e.y))
            if g is not None:
                location[e.object] = f"depot{g}"
                start = place_start.pop((e.robot, e.object), e.time)
                depot_intervals.setdefault(g, []).append((start, e.time, e.object))
            else:
                location[e.object] = "buffer"
    for g, spans in depot_intervals.items():
        ranks = [cat.rank_of[o] for _, _, o in spans]
        if ranks != list(range(1, len(cat.groups[g]) + 1)):
            problems.append(f"depot {g} received ranks {ranks}")
        for (s1, e1, _), (s2, _, _) in zip(spans, spans[1:]):
            if s2 < e1 - 1e-9:
                problems.append(f"overlapping placements at depot {g}")
    for o in instance.objects:
        if location.get(o.id) != f"depot{o.group}":
            problems.append(f"object {o.id} ends at {location.get(o.id)}")
    if trace.events and abs(trace.makespan - max(times)) > 1e-9:
        problems.append("makespan differs from the last event time")
    return problems


def single_robot_makespan(instance: Instance, plan: PlanResult, timing: TimingParams | None = None) -> float:
    """Closed-form duration when the first robot executes the whole plan alone."""
    timing = timing or TimingParams()
    r0 = instance.robots[0]
    speed = timing.speed if timing.speed is not None else r0.speed
    pos = (r0.x, r0.y)
    total = 0.0
    for src, dst in _step_poses(instance, plan.sequence):
        total += (math.dist(pos, src) + math.dist(src, dst)) / speed
        total += timing.pick_duration + timing.place_duration
        pos = dst
    return total
