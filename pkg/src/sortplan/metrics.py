"""Benchmark metrics, the brute-force optimality oracle and the benchmark harness."""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from sortplan.instances import GenParams, Instance, generate_instance
from sortplan.planner import Outcome, PlanResult, Step, Strategy, replay_validate, sort_objects

log = logging.getLogger(__name__)

CSV_HEADER = (
    "N",
    "K",
    "M",
    "seed",
    "strategy",
    "outcome",
    "len_os",
    "nodes",
    "planning_ms",
    "repetitiveness",
    "nonmonotone",
)

ORACLE_MAX_N = 8


def _groups_of(sequence: Sequence[Step], group_of) -> list[int]:
    if group_of is None:
        raise ValueError("group_of is required for Step sequences")
    return [group_of[s.object] for s in sequence]


def repetitiveness(sequence: Sequence, group_of=None) -> int:
    """Adjacent pairs in the sequence that belong to the same group.

    ``sequence`` is either a list of group labels or a list of Steps together
    with an object-to-group mapping.
    """
    seq = list(sequence)
    if seq and isinstance(seq[0], Step):
        seq = _groups_of(seq, group_of)
    return sum(a == b for a, b in zip(seq, seq[1:]))


def is_nonmonotone(instance: Instance, result: PlanResult) -> bool:
    if result.outcome is not Outcome.SUCCESS:
        raise ValueError("nonmonotonicity is only defined for solved instances")
    return len(result.sequence) > instance.n


def brute_force_min_sequence(instance: Instance, *, max_n: int = ORACLE_MAX_N) -> int:
    """Minimum manipulation count over all legal action sequences.

    Actions are: sort an accessible next-in-rank object (from clutter or a
    buffer), or move any accessible in-clutter object to a buffer.  Depth-first
    enumeration with branch-and-bound on the incumbent, plus a transposition
    table keyed on the full state.  ``max_n`` raises the size guard for
    callers willing to pay for larger enumerations.
    """
    n = instance.n
    if n > max_n:
        raise ValueError(f"brute-force oracle refuses N={n} > {max_n}")
    cat = instance.catalogue
    corridor = instance.corridor_radius
    groups = [[cat.index[o] for o in g] for g in cat.groups]
    best = math.inf
    seen: dict[tuple[int, int, tuple[int, ...]], int] = {}

    def visit(clutter: int, buffered: int, heights: tuple[int, ...], g: int) -> None:
        nonlocal best
        remaining = n - sum(heights)
        if remaining == 0:
            best = min(best, g)
            return
        if g + remaining >= best:
            return
        key = (clutter, buffered, heights)
        if seen.get(key, math.inf) <= g:
            return
        seen[key] = g
        reachable = cat.mask_of(cat.accessible_in_clutter(clutter, corridor))
        for gi, members in enumerate(groups):
            h = heights[gi]
            if h == len(members):
                continue
            bit = 1 << members[h]
            if (reachable | buffered) & bit:
                nh = heights[:gi] + (h + 1,) + heights[gi + 1 :]
                visit(clutter & ~bit, buffered & ~bit, nh, g + 1)
        for i in range(n):
            bit = 1 << i
            if reachable & bit:
                visit(clutter & ~bit, buffered | bit, heights, g + 1)

    visit((1 << n) - 1, 0, (0,) * cat.k, 0)
    if best is math.inf:
        raise ValueError("instance has no complete sorting sequence")
    return int(best)


@dataclass(frozen=True)
class BenchRow:
    N: int
    K: int
    M: int
    seed: int
    strategy: str
    outcome: str
    len_os: int
    nodes: int
    planning_ms: float
    repetitiveness: int
    nonmonotone: bool
    valid: bool = True

    def csv_fields(self) -> list:
        return [
            self.N,
            self.K,
            self.M,
            self.seed,
            self.strategy,
            self.outcome,
            self.len_os,
            self.nodes,
            f"{self.planning_ms:.3f}",
            self.repetitiveness,
            int(self.nonmonotone),
        ]


def parse_grid(text: str) -> list[tuple[int, int]]:
    """``"10,15x1,3,5"`` -> every (N, K) pair of the two lists."""
    try:
        ns, ks = text.lower().split("x")
        n_values = [int(v) for v in ns.split(",") if v.strip()]
        k_values = [int(v) for v in ks.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"grid must look like '10,15x1,3,5', got {text!r}") from None
    if not n_values or not k_values:
        raise ValueError(f"grid {text!r} has an empty axis")
    return [(n, k) for n in n_values for k in k_values]


def _bench_instance(args) -> list[BenchRow]:
    n, k, m, seed, strategies, time_limit, params = args
    inst = generate_instance(n, k, m, seed, params)
    rows = []
    for strategy in strategies:
        result = sort_objects(inst, strategy, time_limit, m)
        solved = result.outcome is Outcome.SUCCESS and result.elapsed <= time_limit
        outcome = result.outcome.value if result.outcome is not Outcome.SUCCESS or solved else "timeout"
        rows.append(
            BenchRow(
                n,
                k,
                m,
                seed,
                Strategy.parse(strategy).value,
                outcome,
                len(result.sequence),
                result.nodes_expanded,
                result.elapsed * 1000.0,
                repetitiveness(result.sequence, inst.catalogue.group_of),
                solved and len(result.sequence) > n,
                replay_validate(inst, result.sequence) if solved else False,
            )
        )
    return rows


def run_benchmark(
    grid: Iterable[tuple[int, int]],
    seeds: int,
    strategies: Iterable[str | Strategy],
    time_limit: float = 30.0,
    m: int = 3,
    params: GenParams | None = None,
    jobs: int = 1,
) -> list[BenchRow]:
    """One row per (instance, strategy); every strategy sees the same instance set.

    Rows come back ordered by (N, K, seed, strategy order given).
    """
    strategies = [Strategy.parse(s) for s in strategies]
    tasks = [
        (n, k, m, seed, strategies, time_limit, params)
        for n, k in sorted(set(grid))
        for seed in range(seeds)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_bench_instance, tasks))
    else:
        chunks = []
        for task in tasks:
            chunks.append(_bench_instance(task))
            log.info("bench N=%d K=%d seed=%d done", task[0], task[1], task[3])
    return [row for chunk in chunks for row in chunk]


@dataclass(frozen=True)
class CellSummary:
    N: int
    K: int
    strategy: str
    count: int
    mean_len: float
    sd_len: float
    success_pct: float
    nonmonotone_ratio: float
    mean_repetitiveness: float
    mean_nodes: float
    mean_ms: float


def summarize(rows: Sequence[BenchRow]) -> list[CellSummary]:
    """Per-(N, K, strategy) aggregates; length statistics cover solved rows only."""
    cells: dict[tuple[int, int, str], list[BenchRow]] = {}
    for row in rows:
        cells.setdefault((row.N, row.K, row.strategy), []).append(row)
    out = []
    for (n, k, strategy), group in sorted(cells.items()):
        solved = [r for r in group if r.outcome == Outcome.SUCCESS.value]
        lens = [r.len_os for r in solved]
        out.append(
            CellSummary(
                n,
                k,
                strategy,
                len(group),
                statistics.fmean(lens) if lens else math.nan,
                statistics.pstdev(lens) if len(lens) > 1 else 0.0,
                100.0 * len(solved) / len(group),
                statistics.fmean([r.nonmonotone for r in solved]) if solved else math.nan,
                statistics.fmean([r.repetitiveness for r in solved]) if solved else math.nan,
                statistics.fmean([r.nodes for r in group]),
                statistics.fmean([r.planning_ms for r in group]),
            )
        )
    return out


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def rows_from_csv(text: str) -> list[BenchRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [
        BenchRow(
            int(r["N"]),
            int(r["K"]),
            int(r["M"]),
            int(r["seed"]),
            r["strategy"],
            r["outcome"],
            int(r["len_os"]),
            int(r["nodes"]),
            float(r["planning_ms"]),
            int(r["repetitiveness"]),
            bool(int(r["nonmonotone"])),
        )
        for r in reader
    ]


def summary_table(summaries: Sequence[CellSummary]) -> str:
    lines = ["N   K  strategy  n   mean|O_S|  sd    success%  nonmono  rep    nodes      ms"]
    for s in summaries:
        lines.append(
            f"{s.N:<3} {s.K:<2} {s.strategy:<9} {s.count:<3} {s.mean_len:9.2f}  {s.sd_len:4.2f}"
            f"  {s.success_pct:7.1f}  {s.nonmonotone_ratio:7.2f}  {s.mean_repetitiveness:5.2f}"
            f"  {s.mean_nodes:9.1f}  {s.mean_ms:8.1f}"
        )
    return "\n".join(lines)


def as_dicts(rows: Sequence[BenchRow]) -> list[dict]:
    return [asdict(r) for r in rows]
