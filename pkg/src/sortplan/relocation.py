"""Smallest set of occluders to park in buffers so a target becomes reachable."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from sortplan.accessibility import Configuration, blocked_intervals_for
from sortplan.geometry import EPS, TWO_PI, normalize_angle, union_covers_circle


class AlreadyAccessible(ValueError):
    pass


class RelocationInfeasible(RuntimeError):
    pass


class BufferExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class RelocationPlan:
    target: int
    to_relocate: tuple[int, ...]
    direction: float

    def __len__(self) -> int:
        return len(self.to_relocate)


def _critical_angles(intervals) -> list[float]:
    """Midpoints between consecutive arc endpoints, then every arc centre."""
    ends = sorted({normalize_angle(iv.start) for iv in intervals} | {normalize_angle(iv.end) for iv in intervals})
    mids = []
    for a, b in zip(ends, ends[1:] + [ends[0] + TWO_PI]):
        if b - a > 2 * EPS:
            mids.append(normalize_angle((a + b) / 2))
    centres = [normalize_angle(iv.start + iv.extent / 2) for iv in intervals]
    return mids + centres


def reloc_objs(
    config: Configuration,
    target: int,
    corridor_radius: float,
    *,
    _protected: frozenset[int] = frozenset(),
    _depth: int = 0,
) -> RelocationPlan:
    """Ordered list of in-clutter objects to move to buffers so ``target`` is accessible.

    Candidate approach directions are the critical angles of the blocked arcs;
    for each distinct blocking set the members are ordered by repeated
    extraction of an accessible member, clearing inaccessible members
    recursively.  The plan with the fewest total relocations wins, then the
    smaller blocking set, the smaller disc area, the smaller id tuple.
    """
    cat = config.catalogue
    key = (corridor_radius, config.unsorted_mask, target, _protected)
    hit = cat.reloc_cache.get(key)
    if hit is not None:
        if isinstance(hit, Exception):
            raise hit
        return hit

    blocking = blocked_intervals_for(target, config, corridor_radius)
    intervals = [iv for _, iv in blocking]
    if not union_covers_circle(intervals):
        raise AlreadyAccessible(f"object {target} is already accessible")
    if _depth > cat.n:
        raise RelocationInfeasible(f"relocation recursion exceeded {cat.n} levels")

    options: dict[frozenset[int], float] = {}
    for theta in _critical_angles(intervals):
        members = frozenset(oid for oid, iv in blocking if iv.contains_open(theta))
        if members & (_protected | {target}) or members in options:
            continue
        residual = [iv for oid, iv in blocking if oid not in members]
        if union_covers_circle(residual):
            continue
        options[members] = theta

    def tie_key(members):
        area = sum(cat.discs[m].area for m in members)
        return (len(members), round(area, 12), tuple(sorted(members)))

    best = None
    best_key = None
    protected = _protected | {target}
    for members in sorted(options, key=tie_key):
        if best_key is not None and len(members) >= best_key[0]:
            # no later option can produce a shorter plan
            break
        try:
            order = _extraction_order(config, members, corridor_radius, protected, _depth)
        except RelocationInfeasible:
            continue
        rank = (len(order), *tie_key(members))
        if best_key is None or rank < best_key:
            best_key = rank
            best = RelocationPlan(target, tuple(order), options[members])
        if _depth > 0 or len(order) == len(members):
            # nested levels take the first executable option; at the top an
            # option needing no extra clearing is already optimal
            break

    if best is None:
        err = RelocationInfeasible(f"no executable relocation clears object {target}")
        cat.reloc_cache[key] = err
        raise err
    cat.reloc_cache[key] = best
    return best


def _extraction_order(
    config: Configuration,
    members: frozenset[int],
    corridor_radius: float,
    protected: frozenset[int],
    depth: int,
) -> list[int]:
    cat = config.catalogue
    residual = config
    pending = sorted(members)
    order: list[int] = []
    while pending:
        ready = [m for m in pending if cat.is_accessible(m, residual.unsorted_mask, corridor_radius)]
        if ready:
            order.append(ready[0])
            pending.remove(ready[0])
            residual = residual.without([ready[0]])
            continue
        sub = None
        for m in pending:
            try:
                plan = reloc_objs(residual, m, corridor_radius, _protected=protected, _depth=depth + 1)
            except RelocationInfeasible:
                continue
            if sub is None or len(plan) < len(sub):
                sub = plan
        if sub is None:
            raise RelocationInfeasible("blocking set cannot be extracted")
        for oid in sub.to_relocate:
            order.append(oid)
            if oid in pending:
                pending.remove(oid)
            residual = residual.without([oid])
        if len(order) > cat.n:
            raise RelocationInfeasible("relocation plan longer than the object count")
    return order


def choose_buffer_slot(config: Configuration, buffers: Sequence | int) -> int:
    """Lowest-indexed buffer slot not holding an object."""
    n_slots = buffers if isinstance(buffers, int) else len(buffers)
    occupied = config.occupied_slots()
    for slot in range(n_slots):
        if slot not in occupied:
            return slot
    raise BufferExhausted(f"all {n_slots} buffer slots are occupied")


def plan_area(config: Configuration, plan: RelocationPlan) -> float:
    return math.fsum(config.catalogue.discs[o].area for o in plan.to_relocate)
