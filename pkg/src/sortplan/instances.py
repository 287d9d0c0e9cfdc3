"""Problem instances: random generation, validation and JSON round-tripping."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from shapely.geometry import MultiPoint, Point

from sortplan.accessibility import Catalogue, Configuration, get_accessible_objects
from sortplan.geometry import Disc

log = logging.getLogger(__name__)

Pose = tuple[float, float]

_MARGIN = 1e-5


class InstanceError(ValueError):
    """Malformed instance; the message starts with the offending field path."""


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ObjectSpec:
    id: int
    group: int
    rank: int
    x: float
    y: float
    r: float

    @property
    def disc(self) -> Disc:
        return Disc(self.id, (self.x, self.y), self.r)


@dataclass(frozen=True)
class RobotSpec:
    id: int
    x: float
    y: float
    speed: float = 1.0


@dataclass(frozen=True)
class GenParams:
    width: float = 4.0
    height: float = 4.0
    diameter_min: float = 0.24
    diameter_max: float = 0.36
    corridor_radius: float = 0.05
    max_attempts: int = 200000
    max_retries: int = 50
    speed: float = 1.0
    # when set, the workspace is a square of area N * area_per_object
    area_per_object: float | None = None

    def workspace_for(self, n: int) -> tuple[float, float]:
        if self.area_per_object is None:
            return (self.width, self.height)
        side = round(math.sqrt(n * self.area_per_object), 6)
        return (side, side)


@dataclass(frozen=True, eq=False)
class Instance:
    workspace: tuple[float, float]
    objects: tuple[ObjectSpec, ...]
    depots: tuple[Pose, ...]
    buffers: tuple[Pose, ...]
    robots: tuple[RobotSpec, ...]
    corridor_radius: float = 0.05
    seed: int | None = None
    retries: int = 0
    _catalogue: Catalogue | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        validate(self)
        groups: dict[int, list[ObjectSpec]] = {}
        for o in self.objects:
            groups.setdefault(o.group, []).append(o)
        ordered = [
            [o.id for o in sorted(groups[g], key=lambda o: o.rank)] for g in range(len(groups))
        ]
        object.__setattr__(self, "_catalogue", Catalogue([o.disc for o in self.objects], ordered))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return to_dict(self) == to_dict(other)

    __hash__ = object.__hash__

    @property
    def catalogue(self) -> Catalogue:
        return self._catalogue

    @property
    def n(self) -> int:
        return len(self.objects)

    @property
    def k(self) -> int:
        return len(self.depots)

    @property
    def m(self) -> int:
        return len(self.robots)

    @property
    def groups(self) -> tuple[tuple[int, ...], ...]:
        return self.catalogue.groups

    def object(self, oid: int) -> ObjectSpec:
        for o in self.objects:
            if o.id == oid:
                return o
        raise KeyError(oid)

    def initial_configuration(self) -> Configuration:
        return Configuration.initial(self.catalogue)


def _fail(path: str, msg: str):
    raise InstanceError(f"{path}: {msg}")


def validate(inst: Instance) -> None:
    """Check every instance invariant; raises InstanceError naming the field."""
    w, h = inst.workspace
    if not (w > 0 and h > 0):
        _fail("workspace", f"width and height must be positive, got {inst.workspace}")
    if inst.corridor_radius < 0:
        _fail("corridor_radius", "must be non-negative")
    if not inst.objects:
        _fail("objects", "at least one object is required")
    ids: dict[int, int] = {}
    for i, o in enumerate(inst.objects):
        if o.id in ids:
            _fail(f"objects[{i}].id", f"duplicate id {o.id}")
        ids[o.id] = i
        if not o.r > 0:
            _fail(f"objects[{i}].r", f"radius must be > 0, got {o.r}")
        if o.x - o.r < -1e-9 or o.y - o.r < -1e-9 or o.x + o.r > w + 1e-9 or o.y + o.r > h + 1e-9:
            _fail(f"objects[{i}]", f"disc {o.id} lies outside the workspace")
    k = len(inst.depots)
    if k < 1:
        _fail("depots", "at least one depot (group) is required")
    for i, o in enumerate(inst.objects):
        if not 0 <= o.group < k:
            _fail(f"objects[{i}].group", f"group {o.group} has no depot (K={k})")
    for g in range(k):
        ranks = sorted(o.rank for o in inst.objects if o.group == g)
        if not ranks:
            _fail(f"depots[{g}]", f"group {g} is empty; every group needs at least one object")
        if ranks != list(range(1, len(ranks) + 1)):
            _fail(f"objects(group={g}).rank", f"ranks must be 1..{len(ranks)}, got {ranks}")
    objs = inst.objects
    for i in range(len(objs)):
        for j in range(i + 1, len(objs)):
            a, b = objs[i], objs[j]
            if math.hypot(a.x - b.x, a.y - b.y) < a.r + b.r - 1e-12:
                _fail(f"objects[{j}]", f"discs {a.id} and {b.id} overlap")
    if len(inst.buffers) < len(objs):
        _fail("buffers", f"need at least N={len(objs)} buffer slots, got {len(inst.buffers)}")
    if not inst.robots:
        _fail("robots", "at least one robot is required")
    rids = set()
    for i, r in enumerate(inst.robots):
        if r.id in rids:
            _fail(f"robots[{i}].id", f"duplicate robot id {r.id}")
        rids.add(r.id)
        if not r.speed > 0:
            _fail(f"robots[{i}].speed", f"speed must be > 0, got {r.speed}")
    max_r = max(o.r for o in objs)
    keep_out = MultiPoint([(o.x, o.y) for o in objs]).convex_hull.buffer(max_r + 2 * max_r)
    for name, poses in (("depots", inst.depots), ("buffers", inst.buffers)):
        for i, (x, y) in enumerate(poses):
            if keep_out.contains(Point(x, y)):
                _fail(f"{name}[{i}]", f"pose ({x}, {y}) lies inside the inflated clutter hull")


def _perimeter_points(w: float, h: float, offset: float, count: int, phase: float) -> list[Pose]:
    """``count`` evenly spaced points on the rectangle grown by ``offset``."""
    x0, y0, x1, y1 = -offset, -offset, w + offset, h + offset
    sides = [x1 - x0, y1 - y0, x1 - x0, y1 - y0]
    total = sum(sides)
    pts = []
    for i in range(count):
        s = ((i + phase) / count) * total
        if s < sides[0]:
            pts.append((x0 + s, y0))
        elif s < sides[0] + sides[1]:
            pts.append((x1, y0 + s - sides[0]))
        elif s < sides[0] + sides[1] + sides[2]:
            pts.append((x1 - (s - sides[0] - sides[1]), y1))
        else:
            pts.append((x0, y1 - (s - sides[0] - sides[1] - sides[2])))
    return [(round(x, 6), round(y, 6)) for x, y in pts]


def periphery(
    w: float, h: float, n: int, k: int, m: int, max_diameter: float, speed: float = 1.0
) -> tuple[tuple[Pose, ...], tuple[Pose, ...], tuple[RobotSpec, ...]]:
    """Depots and robots around the workspace, buffer slots in a grid past the top edge."""
    offset = 2.0 * max_diameter
    depots = tuple(_perimeter_points(w, h, offset, k, 0.5))
    robots = tuple(
        RobotSpec(i, x, y, speed) for i, (x, y) in enumerate(_perimeter_points(w, h, offset, m, 0.0))
    )
    pitch = 1.25 * max_diameter
    cols = max(1, int(w // pitch))
    buffers = tuple(
        (round((i % cols + 0.5) * pitch, 6), round(h + 2 * offset + (i // cols) * pitch, 6))
        for i in range(n)
    )
    return depots, buffers, robots


def make_instance(
    discs: Sequence[tuple[int, int, int, float, float, float]],
    *,
    m: int = 1,
    corridor_radius: float = 0.05,
    workspace: tuple[float, float] | None = None,
    seed: int | None = None,
) -> Instance:
    """Build an instance from (id, group, rank, x, y, r) rows, placing the periphery.

    Coordinates may be anywhere; they are shifted so the clutter sits in a
    workspace anchored at the origin.
    """
    xs0 = min(x - r for _, _, _, x, _, r in discs)
    ys0 = min(y - r for _, _, _, _, y, r in discs)
    objs = tuple(
        ObjectSpec(i, g, rk, x - xs0, y - ys0, r) for i, g, rk, x, y, r in discs
    )
    if workspace is None:
        workspace = (
            max(o.x + o.r for o in objs) + 1e-9,
            max(o.y + o.r for o in objs) + 1e-9,
        )
    k = max(o.group for o in objs) + 1
    max_d = 2 * max(o.r for o in objs)
    depots, buffers, robots = periphery(workspace[0], workspace[1], len(objs), k, m, max_d)
    return Instance(workspace, objs, depots, buffers, robots, corridor_radius, seed)


def random_composition(n: int, k: int, rng: np.random.Generator) -> list[int]:
    """Uniform draw over compositions of ``n`` into ``k`` positive parts."""
    if k == 1:
        return [n]
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False))
    bounds = [0, *cuts.tolist(), n]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def _sample_discs(
    n: int, params: GenParams, rng: np.random.Generator
) -> list[tuple[float, float, float]]:
    """Sequential rejection sampling; a jammed layout is discarded and restarted."""
    width, height = params.workspace_for(n)
    per_disc = max(200, params.max_attempts // 20)
    budget = params.max_attempts
    while budget > 0:
        placed: list[tuple[float, float, float]] = []
        for _ in range(n):
            r = rng.uniform(params.diameter_min, params.diameter_max) / 2
            for _ in range(per_disc):
                budget -= 1
                # margin keeps discs valid after rounding to micrometres
                x = rng.uniform(r + _MARGIN, width - r - _MARGIN)
                y = rng.uniform(r + _MARGIN, height - r - _MARGIN)
                if all((x - px) ** 2 + (y - py) ** 2 >= (r + pr + _MARGIN) ** 2 for px, py, pr in placed):
                    placed.append((x, y, r))
                    break
            else:
                break
        if len(placed) == n:
            return placed
    raise GenerationError(
        f"could not place {n} discs in a {width} x {height} m workspace; "
        "reduce N or enlarge the workspace"
    )


def generate_instance(n: int, k: int, m: int, seed: int, params: GenParams | None = None) -> Instance:
    """Random instance: uniform positions, composition group sizes, periphery depots.

    The robot count only affects robot poses, so instances with different
    ``m`` share the same objects.
    """
    params = params or GenParams()
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= K <= N, got N={n}, K={k}")
    if m < 1:
        raise ValueError(f"need M >= 1, got {m}")
    for retry in range(params.max_retries + 1):
        rng = np.random.default_rng([seed, n, k, retry])
        sizes = random_composition(n, k, rng)
        discs = _sample_discs(n, params, rng)
        objs = []
        oid = 0
        for g, size in enumerate(sizes):
            for rank in range(1, size + 1):
                x, y, r = discs[oid]
                objs.append(ObjectSpec(oid, g, rank, round(x, 6), round(y, 6), round(r, 6)))
                oid += 1
        max_d = params.diameter_max
        width, height = params.workspace_for(n)
        depots, buffers, robots = periphery(width, height, n, k, m, max_d, params.speed)
        inst = Instance(
            (width, height),
            tuple(objs),
            depots,
            buffers,
            robots,
            params.corridor_radius,
            seed,
            retry,
        )
        if get_accessible_objects(inst.initial_configuration(), inst.corridor_radius):
            return inst
        log.info("seed %s: no accessible object, regenerating (retry %d)", seed, retry + 1)
    raise GenerationError(f"seed {seed}: every retry produced a fully occluded instance")


def to_dict(inst: Instance) -> dict[str, Any]:
    return {
        "workspace": {"width": inst.workspace[0], "height": inst.workspace[1]},
        "corridor_radius": inst.corridor_radius,
        "seed": inst.seed,
        "retries": inst.retries,
        "objects": [
            {"id": o.id, "group": o.group, "rank": o.rank, "x": o.x, "y": o.y, "r": o.r}
            for o in inst.objects
        ],
        "depots": [{"x": x, "y": y} for x, y in inst.depots],
        "buffers": [{"x": x, "y": y} for x, y in inst.buffers],
        "robots": [{"id": r.id, "x": r.x, "y": r.y, "speed": r.speed} for r in inst.robots],
    }


def serialize(inst: Instance) -> str:
    return json.dumps(to_dict(inst), indent=2)


def _get(d: Any, key: str, path: str, kind=None):
    if not isinstance(d, dict):
        _fail(path, "expected an object")
    if key not in d:
        _fail(f"{path}.{key}" if path else key, "missing field")
    value = d[key]
    where = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(where, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(where, f"expected an integer, got {value!r}")
        return value
    if kind is list and not isinstance(value, list):
        _fail(where, "expected a list")
    return value


def from_dict(data: Any) -> Instance:
    ws = _get(data, "workspace", "")
    workspace = (_get(ws, "width", "workspace", float), _get(ws, "height", "workspace", float))
    seed = data.get("seed") if isinstance(data, dict) else None
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        _fail("seed", f"expected an integer or null, got {seed!r}")
    objects = tuple(
        ObjectSpec(
            _get(o, "id", f"objects[{i}]", int),
            _get(o, "group", f"objects[{i}]", int),
            _get(o, "rank", f"objects[{i}]", int),
            _get(o, "x", f"objects[{i}]", float),
            _get(o, "y", f"objects[{i}]", float),
            _get(o, "r", f"objects[{i}]", float),
        )
        for i, o in enumerate(_get(data, "objects", "", list))
    )

    def poses(name):
        return tuple(
            (_get(p, "x", f"{name}[{i}]", float), _get(p, "y", f"{name}[{i}]", float))
            for i, p in enumerate(_get(data, name, "", list))
        )

    robots = tuple(
        RobotSpec(
            _get(r, "id", f"robots[{i}]", int),
            _get(r, "x", f"robots[{i}]", float),
            _get(r, "y", f"robots[{i}]", float),
            _get(r, "speed", f"robots[{i}]", float),
        )
        for i, r in enumerate(_get(data, "robots", "", list))
    )
    retries = data.get("retries", 0)
    return Instance(
        workspace,
        objects,
        poses("depots"),
        poses("buffers"),
        robots,
        _get(data, "corridor_radius", "", float),
        seed,
        retries if isinstance(retries, int) else 0,
    )


def parse(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"<document>: not valid JSON ({exc})") from exc
    return from_dict(data)


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(inst))
        fh.write("\n")
