import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import DEMO5, DEMO5_CHAIN, demo5_sg
from oracles import costs, random_instance, reaches_root

from storeplan.core import (Cost, CostMatrices, StoragePlan, VersionGraph, WorkloadProfile,
                            build_solver_graph, check_triangle, dump_matrices, dump_plan,
                            evaluate, parse_matrices, parse_plan, recreation_costs, validate_plan)
from storeplan.errors import InvalidInputError, InvalidPlanError


def test_solver_graph_root_edges_and_demo_weights():
    sg = demo5_sg()
    assert sg.edges[(0, 1)] == Cost(10000, 10000)
    assert sg.edges[(3, 5)] == Cost(200, 550)
    assert sg.edges[(2, 5)] == Cost(800, 2500)
    assert list(sg.edges) == sorted(sg.edges)


def test_single_version_graph():
    sg = build_solver_graph(None, CostMatrices(True, {(1, 1): Cost(7, 7)}))
    assert sg.n == 1
    assert dict(sg.edges) == {(0, 1): Cost(7, 7)}


def test_undirected_entries_become_edge_pairs():
    m = CostMatrices(False, {(1, 1): Cost(5, 5), (2, 2): Cost(6, 6), (3, 3): Cost(4, 4),
                             (1, 2): Cost(2, 3), (2, 1): Cost(2, 3)})
    sg = build_solver_graph(None, m)
    assert sg.edges[(1, 2)] == sg.edges[(2, 1)] == Cost(2, 3)
    assert not sg.directed


def test_missing_diagonal_is_rejected():
    m = CostMatrices(True, {(1, 1): Cost(5, 5), (1, 2): Cost(1, 1)})
    with pytest.raises(InvalidInputError, match="no materialization cost"):
        build_solver_graph(VersionGraph(2, frozenset(), {1: (5, 5), 2: (5, 5)}), m)


def test_half_known_entry_is_invalid():
    with pytest.raises(InvalidInputError, match="both delta and phi"):
        CostMatrices(True, {(1, 1): (5, None)})


def test_asymmetric_undirected_entries_rejected():
    with pytest.raises(InvalidInputError):
        CostMatrices(False, {(1, 1): Cost(1, 1), (2, 2): Cost(1, 1),
                             (1, 2): Cost(1, 1), (2, 1): Cost(2, 2)})


def test_negative_cost_rejected():
    with pytest.raises(InvalidInputError):
        CostMatrices(True, {(1, 1): Cost(-1, 1)})


def test_version_graph_rejects_cycles():
    with pytest.raises(InvalidInputError, match="cycle"):
        VersionGraph(2, frozenset({(1, 2), (2, 1)}), {1: (1, 1), 2: (1, 1)})


def test_demo_costs():
    sg = demo5_sg()
    everything = StoragePlan.from_list([0] * 5)
    assert evaluate(everything, sg).total_storage == 49720
    rep = evaluate(DEMO5_CHAIN, sg)
    assert rep.total_storage == 11450
    assert rep.recreation[5] == 13550
    assert validate_plan(DEMO5_CHAIN, sg) == []


def test_single_materialized_version():
    sg = build_solver_graph(None, CostMatrices(True, {(1, 1): Cost(9, 4)}))
    rep = evaluate(StoragePlan.from_list([0]), sg)
    assert (rep.total_storage, rep.recreation[1], rep.max_recreation) == (9, 4, 4)


def test_two_cycle_reported():
    sg = build_solver_graph(None, CostMatrices(True, {(1, 1): Cost(1, 1), (2, 2): Cost(1, 1),
                                                      (1, 2): Cost(1, 1), (2, 1): Cost(1, 1)}))
    kinds = {v.kind for v in validate_plan(StoragePlan.from_list([2, 1]), sg)}
    assert "cycle" in kinds


def test_unrevealed_edge_reported():
    sg = demo5_sg()
    bad = StoragePlan.from_list([0, 4, 1, 0, 3])
    found = validate_plan(bad, sg)
    assert [(v.kind, v.version) for v in found] == [("edge", 2)]
    assert "not revealed" in found[0].detail


def test_all_violations_listed():
    sg = demo5_sg()
    bad = StoragePlan.from_list([2, 1, 4, 1, 9])
    kinds = sorted((v.kind, v.version) for v in validate_plan(bad, sg))
    assert ("parent", 5) in kinds
    assert ("edge", 3) in kinds
    assert any(k == "cycle" for k, _ in kinds)
    with pytest.raises(InvalidPlanError):
        evaluate(bad, sg)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=5, max_size=5))
def test_validate_matches_union_find(parents):
    # complete directed graph so only structure matters
    entries = {(i, j): Cost(1, 1) for i in range(1, 6) for j in range(1, 6)}
    sg = build_solver_graph(None, CostMatrices(True, entries))
    plan = StoragePlan.from_list(parents)
    assert (validate_plan(plan, sg) == []) == reaches_root(plan.parents)


def test_evaluate_matches_independent_sums():
    rng = random.Random(11)
    for _ in range(50):
        sg = random_instance(rng, 6, rng.random() < 0.5)
        # random valid plan: attach each version to an earlier-visited node
        order = list(range(1, 7))
        rng.shuffle(order)
        parents = [-1] * 7
        placed = [0]
        for v in order:
            options = [u for u in placed if (u, v) in sg.edges]
            parents[v] = rng.choice(options)
            placed.append(v)
        plan = StoragePlan(tuple(parents))
        rep = evaluate(plan, sg)
        c, rec = costs(sg, plan.parents)
        assert rep.total_storage == c
        assert list(rep.recreation) == rec
        for v in range(1, 7):
            p = parents[v]
            assert rec[v] == rec[p] + sg.edges[(p, v)].phi


def test_evaluate_invariant_under_relabelling():
    rng = random.Random(5)
    for _ in range(20):
        sg = random_instance(rng, 5, True, density=1.0)
        plan = StoragePlan.from_list([0, 1, 2, 1, 4])
        perm = list(range(1, 6))
        rng.shuffle(perm)
        relabel = {0: 0, **{i + 1: perm[i] for i in range(5)}}
        # root edges come back as diagonal entries
        entries = {(relabel[u or v], relabel[v]): c for (u, v), c in sg.edges.items()}
        sg2 = build_solver_graph(None, CostMatrices(True, entries))
        plan2 = StoragePlan.from_mapping({relabel[i]: relabel[p] for i, p in plan.items()})
        a, b = evaluate(plan, sg), evaluate(plan2, sg2)
        assert (a.total_storage, a.sum_recreation, a.max_recreation) == \
            (b.total_storage, b.sum_recreation, b.max_recreation)
        assert all(a.recreation[i] == b.recreation[relabel[i]] for i in range(1, 6))


def test_weighted_sum_and_scaling():
    sg = demo5_sg()
    wl = WorkloadProfile({5: 3, 1: 1})
    rep = evaluate(DEMO5_CHAIN, sg, wl)
    assert rep.weighted_sum == 3 * 13550 + 10000
    assert evaluate(DEMO5_CHAIN, sg, wl.scaled(2)).weighted_sum == 2 * rep.weighted_sum


def test_workload_needs_positive_weight():
    with pytest.raises(InvalidInputError):
        WorkloadProfile({1: 0.0})


def test_recreation_path_additive_on_chain():
    sg = demo5_sg()
    rec = recreation_costs(DEMO5_CHAIN, sg)
    assert rec[5] == 10000 + 3000 + 550


def test_triangle_direct_arithmetic():
    m = CostMatrices(False, {(1, 1): Cost(100, 100), (2, 2): Cost(100, 100), (3, 3): Cost(100, 100),
                             (1, 2): Cost(5, 5), (2, 1): Cost(5, 5), (2, 3): Cost(3, 3),
                             (3, 2): Cost(3, 3), (1, 3): Cost(9, 9), (3, 1): Cost(9, 9)})
    found = check_triangle(m)
    assert any(set(v.nodes) == {1, 2, 3} for v in found)

    m = CostMatrices(False, {(1, 1): Cost(10, 10), (2, 2): Cost(20, 20),
                             (1, 2): Cost(2, 2), (2, 1): Cost(2, 2)})
    assert check_triangle(m)


def test_triangle_clean_instance():
    m = CostMatrices(False, {(1, 1): Cost(10, 10), (2, 2): Cost(11, 11),
                             (1, 2): Cost(3, 3), (2, 1): Cost(3, 3)})
    assert check_triangle(m) == []


def test_matrix_and_plan_files_round_trip(tmp_path):
    m = CostMatrices(True, {k: Cost(*v) for k, v in DEMO5.items()})
    text = dump_matrices(m)
    assert text.splitlines()[0] == "directed"
    assert "3\t5\t200\t550" in text.splitlines()
    assert parse_matrices(text) == m
    assert parse_plan(dump_plan(DEMO5_CHAIN)) == DEMO5_CHAIN


@pytest.mark.parametrize("bad", ["sideways\n", "directed\n1\t1\t5\n", "directed\n1\t1\tx\t1\n",
                                 "directed\n1\t1\t1\t1\n1\t1\t2\t2\n"])
def test_bad_matrix_files(bad):
    with pytest.raises(InvalidInputError):
        parse_matrices(bad)
