import pytest

from conftest import MATCHED, pair_rows, tri_rows
from sortplan import planner
from sortplan.accessibility import Catalogue, Configuration
from sortplan.geometry import Disc
from sortplan.instances import generate_instance, make_instance
from sortplan.metrics import brute_force_min_sequence, repetitiveness
from sortplan.planner import (
    Buffer,
    Depot,
    Outcome,
    SearchNode,
    Step,
    Strategy,
    expand,
    get_next_objs,
    penalty,
    replay_validate,
    result_from_dict,
    result_to_dict,
    search,
    sort_objects,
)

STRATEGIES = list(Strategy)


def steps_for(instance, ids):
    return [Step(o, Depot(instance.catalogue.group_of[o])) for o in ids]


def test_next_objects_mid_sort():
    # red r1 r2, green g1 g2 g3, blue b1 b2 b3
    discs = [Disc(i, (i, 0), 0.1) for i in range(8)]
    cat = Catalogue(discs, [[0, 1], [2, 3, 4], [5, 6, 7]])
    config = Configuration.from_parts(cat, [1, 2, 3, 4, 7], {}, [[0], [], [5, 6]])
    assert get_next_objs(config) == {1, 2, 7}
    done = Configuration.from_parts(cat, [], {}, cat.groups)
    assert get_next_objs(done) == frozenset()
    assert get_next_objs(Configuration.initial(cat)) == {0, 2, 5}


def test_root_of_monotone_example_has_one_child_per_leader(seven_discs):
    root = SearchNode(seven_discs.initial_configuration(), h=seven_discs.n)
    children = expand(root, seven_discs.corridor_radius)
    assert [c.steps[0].object for c in children] == [0, 2, 5]
    for c in children:
        assert (c.g, c.h) == (1, seven_discs.n - 1)


def test_first_expansion_buffers_the_blocker():
    inst = make_instance(tri_rows(), m=1)
    (child,) = expand(SearchNode(inst.initial_configuration(), h=inst.n), inst.corridor_radius)
    assert child.steps == (Step(1, Buffer(0)), Step(0, Depot(0)))
    assert child.g == 2 and child.h == inst.n - 1


def test_penalty_window():
    g = {0: 1, 1: 2, 2: 1, 3: 1, 4: 2, 5: 2}
    assert penalty(steps_for_groups([0, 1, 2], g), 3, g) == 0
    assert penalty(steps_for_groups([0, 2, 3], g), 3, g) == 2
    assert penalty(steps_for_groups([0, 2, 1, 4], g), 3, g) == 1
    with pytest.raises(ValueError):
        penalty([], 0, g)


def steps_for_groups(ids, group_of):
    return [Step(o, Depot(group_of[o])) for o in ids]


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_monotone_example_sorts_in_seven(seven_discs, strategy):
    result = sort_objects(seven_discs, strategy)
    assert result.outcome is Outcome.SUCCESS
    assert len(result.sequence) == 7
    assert replay_validate(seven_discs, result.sequence)
    for members in seven_discs.groups:
        order = [s.object for s in result.sequence if s.object in members]
        assert order == list(members)


def test_replay_checks(seven_discs):
    r1, r2, g1, g2, g3, b1, b2 = range(7)
    good = steps_for(seven_discs, [r1, g1, r2, g2, b1, g3, b2])
    assert replay_validate(seven_discs, good)
    assert replay_validate(seven_discs, steps_for(seven_discs, [g1, g2, g3, r1, r2, b1, b2]))
    assert not replay_validate(seven_discs, steps_for(seven_discs, [r2, g1, r1, g2, b1, g3, b2]))
    assert not replay_validate(seven_discs, good[:-1])
    wrong_depot = good[:1] + [Step(g1, Depot(2))] + good[2:]
    assert not replay_validate(seven_discs, wrong_depot)


def test_replay_rejects_inaccessible_pick():
    inst = make_instance(tri_rows())
    assert not replay_validate(inst, steps_for(inst, [0, 1, 2, 3]))
    ok = [Step(1, Buffer(0))] + steps_for(inst, [0, 1, 2, 3])
    assert replay_validate(inst, ok)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_toy_instances_match_oracle(strategy):
    for rows, expected in [(tri_rows(), 5), (pair_rows((1, 0)), 3), (pair_rows((0, 0)), 4)]:
        inst = make_instance(rows)
        result = sort_objects(inst, strategy)
        assert len(result.sequence) == expected == brute_force_min_sequence(inst)


def test_node_bookkeeping_along_search():
    inst = generate_instance(9, 2, 1, 11, MATCHED)

    def check(node, children):
        assert node.g == len(node.path)
        assert node.h == inst.n - node.config.n_sorted
        for c in children:
            assert c.g == node.g + len(c.steps)
            assert c.h == node.h - 1

    for strategy in STRATEGIES:
        result, goal = search(inst, strategy, on_expand=check)
        assert result.outcome is Outcome.SUCCESS and goal.h == 0


def test_greedy_strategies_expand_one_node_per_sort():
    inst = generate_instance(15, 3, 1, 4, MATCHED)
    for strategy in (Strategy.DFS, Strategy.BEST_FIRST):
        result = sort_objects(inst, strategy)
        assert result.nodes_expanded == inst.n


def test_best_first_prefers_mixing_groups(seven_discs):
    best = sort_objects(seven_discs, Strategy.BEST_FIRST, m=3)
    dfs = sort_objects(seven_discs, Strategy.DFS, m=3)
    group_of = seven_discs.catalogue.group_of
    assert repetitiveness(best.sequence, group_of) == 0
    assert repetitiveness(best.sequence, group_of) <= repetitiveness(dfs.sequence, group_of)


def test_timeout_is_reported():
    inst = generate_instance(20, 1, 1, 0, MATCHED)
    result = sort_objects(inst, Strategy.BFS, time_limit=1e-6)
    assert result.outcome is Outcome.TIMEOUT and result.sequence == ()


def test_nothing_accessible_is_infeasible(monkeypatch, seven_discs):
    monkeypatch.setattr(planner, "get_accessible_objects", lambda config, cr: frozenset())
    assert sort_objects(seven_discs).outcome is Outcome.INFEASIBLE


def test_bad_arguments():
    with pytest.raises(ValueError):
        Strategy.parse("bfss")
    assert Strategy.parse("A*") is Strategy.ASTAR
    inst = make_instance(tri_rows())
    with pytest.raises(ValueError):
        sort_objects(inst, time_limit=0)
    with pytest.raises(ValueError):
        sort_objects(inst, m=0)


def test_plan_round_trip():
    inst = make_instance(tri_rows())
    result = sort_objects(inst, Strategy.ASTAR)
    back = result_from_dict(result_to_dict(result))
    assert back.sequence == result.sequence
    assert back.outcome is result.outcome and back.strategy is result.strategy
    assert back.relocations == 1


def test_relocation_choice_is_myopic():
    # Relocation clears one target at a time with its cheapest set, and can
    # pass over a slightly larger set that would also free the next object of
    # the group; every strategy then ends one manipulation above the minimum.
    inst = generate_instance(7, 1, 1, 974, MATCHED)
    assert brute_force_min_sequence(inst) == 8
    for strategy in (Strategy.BFS, Strategy.ASTAR):
        result = sort_objects(inst, strategy)
        assert replay_validate(inst, result.sequence)
        assert len(result.sequence) == 9
