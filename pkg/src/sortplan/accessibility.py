"""World state during search and the accessible-object query."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from sortplan.geometry import (
    AngularInterval,
    Disc,
    arcs_cover_circle,
    blocked_half_angle,
    free_gaps,
)


class Catalogue:
    """Static description of the objects: discs, groups and pairwise blocking.

    Groups are tuples of object ids ordered by rank (rank 1 first).  Pairwise
    blocked arcs are computed once per corridor radius; accessibility results
    are memoised per set of in-clutter objects.
    """

    def __init__(self, discs: Iterable[Disc], groups: Sequence[Sequence[int]]):
        self.discs: dict[int, Disc] = {d.id: d for d in discs}
        self.groups: tuple[tuple[int, ...], ...] = tuple(tuple(g) for g in groups)
        self.ids: tuple[int, ...] = tuple(sorted(self.discs))
        self.index: dict[int, int] = {oid: i for i, oid in enumerate(self.ids)}
        self.group_of: dict[int, int] = {}
        self.rank_of: dict[int, int] = {}
        for gi, members in enumerate(self.groups):
            if not members:
                raise ValueError(f"group {gi} is empty")
            for rank, oid in enumerate(members, start=1):
                if oid in self.group_of:
                    raise ValueError(f"object {oid} appears in more than one group slot")
                self.group_of[oid] = gi
                self.rank_of[oid] = rank
        if set(self.group_of) != set(self.discs):
            missing = sorted(set(self.discs) ^ set(self.group_of))
            raise ValueError(f"objects and group members differ: {missing}")
        self._arcs: dict[float, list[list[tuple[float, float] | None]]] = {}
        self._access_cache: dict[tuple[float, int], frozenset[int]] = {}
        self.reloc_cache: dict = {}

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def k(self) -> int:
        return len(self.groups)

    def mask_of(self, ids: Iterable[int]) -> int:
        m = 0
        for oid in ids:
            m |= 1 << self.index[oid]
        return m

    def ids_of(self, mask: int) -> frozenset[int]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.ids[i])
            mask >>= 1
            i += 1
        return frozenset(out)

    def arcs(self, corridor_radius: float) -> list[list[tuple[float, float] | None]]:
        """``arcs[i][j]`` = (centre angle, half-angle) that disc j blocks on disc i."""
        table = self._arcs.get(corridor_radius)
        if table is None:
            discs = [self.discs[oid] for oid in self.ids]
            table = []
            for t in discs:
                row: list[tuple[float, float] | None] = []
                for b in discs:
                    if b is t:
                        row.append(None)
                        continue
                    dx = b.center[0] - t.center[0]
                    dy = b.center[1] - t.center[1]
                    d = math.hypot(dx, dy)
                    if d == 0.0:
                        raise ValueError(f"discs {t.id} and {b.id} have coincident centres")
                    half = blocked_half_angle(t.radius, b.radius, d, corridor_radius)
                    row.append((math.atan2(dy, dx), half) if half > 0 else None)
                table.append(row)
            self._arcs[corridor_radius] = table
        return table

    def blocking_intervals(
        self, target: int, clutter_mask: int, corridor_radius: float
    ) -> list[tuple[int, AngularInterval]]:
        """(blocker id, arc) for every other in-clutter disc that blocks ``target``."""
        row = self.arcs(corridor_radius)[self.index[target]]
        out = []
        for j, oid in enumerate(self.ids):
            if clutter_mask >> j & 1 and row[j] is not None:
                centre, half = row[j]
                out.append((oid, AngularInterval.centered(centre, half)))
        return out

    def accessible_in_clutter(self, clutter_mask: int, corridor_radius: float) -> frozenset[int]:
        """In-clutter objects with at least one free approach direction."""
        key = (corridor_radius, clutter_mask)
        hit = self._access_cache.get(key)
        if hit is not None:
            return hit
        table = self.arcs(corridor_radius)
        members = [i for i in range(len(self.ids)) if clutter_mask >> i & 1]
        result = []
        for i in members:
            row = table[i]
            if not arcs_cover_circle([row[j] for j in members if j != i and row[j] is not None]):
                result.append(self.ids[i])
        hit = frozenset(result)
        self._access_cache[key] = hit
        return hit

    def is_accessible(self, oid: int, clutter_mask: int, corridor_radius: float) -> bool:
        """Single-object accessibility against the in-clutter discs of ``clutter_mask``."""
        full = self._access_cache.get((corridor_radius, clutter_mask))
        if full is not None:
            return oid in full
        i = self.index[oid]
        row = self.arcs(corridor_radius)[i]
        arcs = [row[j] for j in range(len(self.ids)) if j != i and clutter_mask >> j & 1 and row[j] is not None]
        return not arcs_cover_circle(arcs)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Where every object currently is: clutter, a buffer slot, or a depot stack.

    ``heights[i]`` is the size of group i's depot stack; the stack content is
    always the first ``heights[i]`` members of the group, so the order
    constraint holds by construction.
    """

    catalogue: Catalogue
    unsorted_mask: int
    buffered: tuple[tuple[int, int], ...] = ()
    heights: tuple[int, ...] = field(default=())

    @classmethod
    def initial(cls, catalogue: Catalogue) -> Configuration:
        return cls(catalogue, (1 << catalogue.n) - 1, (), (0,) * catalogue.k)

    @classmethod
    def from_parts(
        cls,
        catalogue: Catalogue,
        unsorted: Iterable[int],
        buffered: Mapping[int, int] | None = None,
        sorted_stacks: Sequence[Sequence[int]] | None = None,
    ) -> Configuration:
        stacks = sorted_stacks or [()] * catalogue.k
        config = cls(
            catalogue,
            catalogue.mask_of(unsorted),
            tuple(sorted((buffered or {}).items())),
            tuple(len(s) for s in stacks),
        )
        for gi, stack in enumerate(stacks):
            if tuple(stack) != catalogue.groups[gi][: len(stack)]:
                raise ValueError(f"stack {gi} violates the rank order: {list(stack)}")
        config.validate()
        return config

    def validate(self) -> None:
        cat = self.catalogue
        if len(self.heights) != cat.k:
            raise ValueError("one stack height per group is required")
        seen = set(self.unsorted)
        for oid, _slot in self.buffered:
            if oid in seen:
                raise ValueError(f"object {oid} is both buffered and elsewhere")
            seen.add(oid)
        for stack in self.sorted:
            for oid in stack:
                if oid in seen:
                    raise ValueError(f"object {oid} is both sorted and elsewhere")
                seen.add(oid)
        if seen != set(cat.ids):
            raise ValueError(f"objects unaccounted for: {sorted(set(cat.ids) - seen)}")

    @property
    def unsorted(self) -> frozenset[int]:
        return self.catalogue.ids_of(self.unsorted_mask)

    @property
    def buffered_ids(self) -> frozenset[int]:
        return frozenset(oid for oid, _ in self.buffered)

    @property
    def sorted(self) -> tuple[tuple[int, ...], ...]:
        return tuple(g[:h] for g, h in zip(self.catalogue.groups, self.heights))

    @property
    def group_of(self) -> dict[int, int]:
        return self.catalogue.group_of

    @property
    def rank_of(self) -> dict[int, int]:
        return self.catalogue.rank_of

    @property
    def n_sorted(self) -> int:
        return sum(self.heights)

    def occupied_slots(self) -> set[int]:
        return {slot for _, slot in self.buffered}

    def location(self, oid: int) -> str:
        if self.unsorted_mask >> self.catalogue.index[oid] & 1:
            return "clutter"
        if oid in self.buffered_ids:
            return "buffer"
        return "depot"

    def sort(self, oid: int) -> Configuration:
        """Push ``oid`` onto its group stack; it must be next in rank."""
        cat = self.catalogue
        gi = cat.group_of[oid]
        if cat.rank_of[oid] != self.heights[gi] + 1:
            raise ValueError(f"object {oid} is not next in group {gi}")
        bit = 1 << cat.index[oid]
        heights = self.heights[:gi] + (self.heights[gi] + 1,) + self.heights[gi + 1 :]
        if self.unsorted_mask & bit:
            return Configuration(cat, self.unsorted_mask & ~bit, self.buffered, heights)
        buffered = tuple(b for b in self.buffered if b[0] != oid)
        if len(buffered) == len(self.buffered):
            raise ValueError(f"object {oid} is already sorted")
        return Configuration(cat, self.unsorted_mask, buffered, heights)

    def to_buffer(self, oid: int, slot: int) -> Configuration:
        bit = 1 << self.catalogue.index[oid]
        if not self.unsorted_mask & bit:
            raise ValueError(f"object {oid} is not in the clutter")
        if slot in self.occupied_slots():
            raise ValueError(f"buffer slot {slot} is occupied")
        buffered = tuple(sorted(self.buffered + ((oid, slot),)))
        return Configuration(self.catalogue, self.unsorted_mask & ~bit, buffered, self.heights)

    def without(self, oids: Iterable[int]) -> Configuration:
        """Clutter with ``oids`` lifted out; used for what-if accessibility probes."""
        mask = self.unsorted_mask & ~self.catalogue.mask_of(oids)
        return Configuration(self.catalogue, mask, self.buffered, self.heights)


def get_accessible_objects(config: Configuration, corridor_radius: float) -> frozenset[int]:
    """In-clutter objects with a free approach direction, plus every buffered object."""
    accessible = config.catalogue.accessible_in_clutter(config.unsorted_mask, corridor_radius)
    if config.buffered:
        return accessible | config.buffered_ids
    return accessible


def blocked_intervals_for(
    target: int, config: Configuration, corridor_radius: float
) -> list[tuple[int, AngularInterval]]:
    cat = config.catalogue
    if target not in cat.index:
        raise KeyError(f"unknown object id {target}")
    if not config.unsorted_mask >> cat.index[target] & 1:
        raise ValueError(f"object {target} is not in the clutter")
    return cat.blocking_intervals(target, config.unsorted_mask, corridor_radius)


def free_directions(target: int, config: Configuration, corridor_radius: float) -> list[AngularInterval]:
    """Approach arcs for ``target`` left open by the other in-clutter discs."""
    blocking = blocked_intervals_for(target, config, corridor_radius)
    return free_gaps([iv for _, iv in blocking])
