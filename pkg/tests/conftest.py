import itertools
import math

import numpy as np
import pytest

from sortplan.instances import GenParams, make_instance

# Workspace scaled with N so that small and large instances are equally dense;
# the fixed 4x4 m default leaves N=10 almost occlusion-free.
MATCHED = GenParams(area_per_object=0.3)


def strip_blocked(target_r, blocker_xy, blocker_r, corridor, angles):
    """Ray-cast oracle: does the blocker disc meet the approach half-strip at each angle.

    Target sits at the origin.  The half-strip runs from the origin to infinity
    along each angle with half-width target_r + corridor.
    """
    w = target_r + corridor
    px, py = blocker_xy
    ux, uy = np.cos(angles), np.sin(angles)
    along = px * ux + py * uy
    across = -px * uy + py * ux
    ds = np.maximum(0.0, -along)
    dt = np.maximum(0.0, np.abs(across) - w)
    return np.hypot(ds, dt) < blocker_r


def ring_rows(n_ring=8, r=0.15, d=0.7):
    """Target disc 0 at the origin, ``n_ring`` discs of group 1 on a circle of radius d."""
    rows = [(0, 0, 1, 0.0, 0.0, r)]
    for i in range(n_ring):
        a = 2 * math.pi * i / n_ring
        rows.append((i + 1, 1, i + 1, d * math.cos(a), d * math.sin(a), r))
    return rows


def tri_rows(groups=(0, 0, 0), d=0.38, r=0.15):
    """Target 0 (group 0, rank 1) sealed by three discs at 120 degree spacing.

    Each blocker covers more than a third of the circle, and any two leave a
    gap, so every minimal blocking set has one member.
    """
    rows = [(0, 0, 1, 0.0, 0.0, r)]
    next_rank = {0: 2}
    for i, g in enumerate(groups):
        a = 2 * math.pi * i / 3
        rank = next_rank.get(g, 1)
        next_rank[g] = rank + 1
        rows.append((i + 1, g, rank, d * math.cos(a), d * math.sin(a), r))
    return rows


def pair_rows(blocker_groups=(0, 0), d=0.32, r=0.15):
    """Target 0 (group 0, rank 1) between two near blockers on either side."""
    rows = [(0, 0, 1, 0.0, 0.0, r)]
    next_rank = {0: 2}
    for i, g in enumerate(blocker_groups):
        rank = next_rank.get(g, 1)
        next_rank[g] = rank + 1
        rows.append((i + 1, g, rank, d if i == 0 else -d, 0.0, r))
    return rows


@pytest.fixture
def seven_discs():
    """Seven well-separated discs: red r1 r2, green g1 g2 g3, blue b1 b2 (ids 0..6)."""
    rows = [
        (0, 0, 1, 0.0, 0.0, 0.15),  # r1
        (1, 0, 2, 1.0, 0.0, 0.15),  # r2
        (2, 1, 1, 2.0, 0.0, 0.15),  # g1
        (3, 1, 2, 0.0, 1.0, 0.15),  # g2
        (4, 1, 3, 1.0, 1.0, 0.15),  # g3
        (5, 2, 1, 2.0, 1.0, 0.15),  # b1
        (6, 2, 2, 1.0, 2.0, 0.15),  # b2
    ]
    return make_instance(rows, m=1)


@pytest.fixture
def tri():
    return make_instance(tri_rows(), m=1)


def executable(config, target, subset, corridor):
    """Can ``subset`` be lifted out one accessible disc at a time, freeing ``target``?

    Removing discs never blocks anything, so greedy extraction decides this.
    """
    cat = config.catalogue
    mask = config.unsorted_mask
    if not cat.is_accessible(target, mask & ~cat.mask_of(subset), corridor):
        return False
    pending = set(subset)
    while pending:
        ready = [o for o in pending if cat.is_accessible(o, mask, corridor)]
        if not ready:
            return False
        pending.discard(ready[0])
        mask &= ~cat.mask_of(ready[:1])
    return True


def freeing_subsets(config, target, corridor):
    """Every smallest executable subset of other in-clutter discs that frees ``target``."""
    others = sorted(config.unsorted - {target})
    for size in range(0, len(others) + 1):
        found = [set(s) for s in itertools.combinations(others, size) if executable(config, target, s, corridor)]
        if found:
            return found
    return []
