# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

import numpy as np
import pytest

from mismatchlab import (
    BudgetExceededException,
    HistoryPolicy,
    Interval,
    Measure1D,
    OpenLoopPolicy,
    PiecewisePolynomial,
    PolicyMeasurabilityException,
    RegionModel,
    RegionPolicy,
    SolverException,
    StationaryPolicy,
    TabularPOMDP,
    as_pomdp,
    evaluate_history_policy,
    evaluate_policy_exact,
    evaluate_region_policy,
    policy_iterate,
    random_tabular_mdp,
    random_tabular_pomdp,
    solve,
    solve_pomdp_belief_tree,
    value_iterate,
)
from mismatchlab.robustness import enumerate_history_policies
from mismatchlab.solvers import (
    iterate_histories,
    tail_bound,
    truncated_history_cost,
    truncation_horizon,
)
from mismatchlab.util import make_rng

from .conftest import chain_mdp


def region_model(channel_tag="full"):
    """Region [0, split) jumps to 1/4, region [split, 1] draws uniformly
    from [0, 1/2); action 1 costs one more than action 0."""
    regions = [Interval.half_open(0, 0.5), Interval.closed(0.5, 1)]
    table = {}
    for action in (0, 1):
        table[(0, action)] = Measure1D.dirac(0.25)
        table[(1, action)] = Measure1D.uniform(0, 0.5)
    return RegionModel(
        regions,
        [0.0, 1.0],
        table,
        [
            PiecewisePolynomial.polynomial([0, 1], 0, 1),
            PiecewisePolynomial.polynomial([1, 1], 0, 1),
        ],
        0.5,
        Measure1D.dirac(0.75),
        channel_tag=channel_tag,
        name="jump",
    )


def test_truncation_horizon():
    assert truncation_horizon(1.0, 0.5, 0.1) == 4
    assert tail_bound(1.0, 0.5, 4) == pytest.approx(0.0625)
    assert tail_bound(1.0, 0.5, 3) > 0.1
    assert truncation_horizon(0.0, 0.5, 1e-9) == 0
    with pytest.raises(ValueError):
        truncation_horizon(1.0, 0.5, 0.0)


def test_value_iterate_chain():
    model = chain_mdp()
    values, policy, iterations = value_iterate(model, 1e-9)
    np.testing.assert_allclose(values, [1.0, 0.0], atol=1e-9)
    assert policy == StationaryPolicy([1, 0])
    assert iterations >= 1

    gaps = []
    value_iterate(model, 1e-6, on_iteration=lambda k, gap: gaps.append(gap))
    assert len(gaps) >= 1
    assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("discount", [0.3, 0.5, 0.9])
def test_value_iterate_matches_policy_iterate(rng, discount):
    for _ in range(5):
        model = random_tabular_mdp(rng, 4, 3, discount=discount)
        values, policy, _ = value_iterate(model, 1e-9)
        exact, _, _ = policy_iterate(model)
        np.testing.assert_allclose(values, exact, atol=1e-9)
        greedy = evaluate_policy_exact(model, policy)
        slack = 2e-9 * discount / (1 - discount) + 1e-12
        assert np.all(greedy <= exact + slack)


def test_evaluate_policy_exact():
    model = chain_mdp()
    np.testing.assert_allclose(
        evaluate_policy_exact(model, StationaryPolicy([0, 0])), [2.0, 0.0]
    )
    with pytest.raises(ValueError, match="covers 3 states"):
        evaluate_policy_exact(model, StationaryPolicy([0, 0, 0]))
    with pytest.raises(ValueError, match="out of range"):
        evaluate_policy_exact(model, StationaryPolicy([0, 2]))
    with pytest.raises(ValueError):
        StationaryPolicy([])


def test_history_policy():
    assert list(iterate_histories(2, 2)) == [
        (0,),
        (1,),
        (0, 0),
        (0, 1),
        (1, 0),
        (1, 1),
    ]
    policy = HistoryPolicy.constant(1, 2, 2)
    assert policy.nodes == 6
    assert policy.action((0, 1)) == 1
    assert policy.action((0, 1, 1)) == policy.default_action == 1
    assert HistoryPolicy.from_json(policy.to_json()).nodes == 6

    with pytest.raises(ValueError, match="needs 6 nodes"):
        HistoryPolicy({(0,): 0}, 2, 2)
    with pytest.raises(ValueError, match="invalid history"):
        HistoryPolicy({(0,): 0, (2,): 0}, 1, 2)


def test_truncated_history_cost():
    model = as_pomdp(chain_mdp())
    stay = HistoryPolicy.constant(0, 3, 2)
    assert truncated_history_cost(model, stay, 2) == pytest.approx(1.75)
    with pytest.raises(ValueError, match="observations"):
        truncated_history_cost(model, HistoryPolicy.constant(0, 1, 3), 2)


def test_belief_tree_fully_observed():
    model = as_pomdp(chain_mdp())
    value, policy = solve_pomdp_belief_tree(model, 1e-3)
    assert value == pytest.approx(1.0, abs=1e-3)
    assert policy.action((0,)) == 1
    assert policy.action((0, 1)) == 0
    assert evaluate_history_policy(model, policy, 1e-3) == pytest.approx(
        1.0, abs=1e-3
    )


def test_belief_tree_matches_value_iteration(rng):
    mdp = random_tabular_mdp(rng, 2, 2, discount=0.3)
    values, _, _ = value_iterate(mdp, 1e-6)
    value, _ = solve_pomdp_belief_tree(as_pomdp(mdp), 1e-4)
    assert value == pytest.approx(float(mdp.initial @ values), abs=2e-4)


def test_belief_tree_uninformative():
    blind = TabularPOMDP(chain_mdp(), uninformative=True)
    value, policy = solve_pomdp_belief_tree(blind, 1e-6)
    assert value == pytest.approx(1.0, abs=1e-6)
    assert policy.n_observations == 1
    assert policy.action((0,)) == 1


def test_belief_tree_budget():
    with pytest.raises(BudgetExceededException) as info:
        solve_pomdp_belief_tree(as_pomdp(chain_mdp()), 1e-9, node_budget=10)
    assert info.value.budget == 10
    assert info.value.required > 10
    assert "budget: 10" in str(info.value)


def test_belief_tree_matches_enumeration(rng):
    for _ in range(3):
        model = random_tabular_pomdp(rng, 2, 2, 2, discount=0.5)
        tol = 0.6 * model.cost_sup
        assert truncation_horizon(model.cost_sup, 0.5, tol) == 1
        value, policy = solve_pomdp_belief_tree(model, tol)
        best = min(
            truncated_history_cost(model, candidate, 1)
            for candidate in enumerate_history_policies(2, 2, 2)
        )
        assert value == pytest.approx(best, abs=1e-12)
        assert truncated_history_cost(model, policy, 1) == pytest.approx(
            value, abs=1e-12
        )


def test_belief_tree_counts_belief_nodes():
    model = random_tabular_pomdp(make_rng(3), 2, 2, 2, discount=0.5)
    tol = 0.01 * model.cost_sup
    assert truncation_horizon(model.cost_sup, 0.5, tol) == 7
    with pytest.raises(BudgetExceededException, match="belief tree") as info:
        solve_pomdp_belief_tree(model, tol, node_budget=1000)
    assert info.value.required > 1000

    value, policy = solve_pomdp_belief_tree(model, tol)
    assert policy.depth == 8
    assert evaluate_history_policy(model, policy, tol) == pytest.approx(
        value, abs=2 * tol
    )


def test_evaluate_region_policy():
    model = region_model()
    constant = RegionPolicy.constant(0, (0, 1))
    # 3/4 at t = 0, then 1/4 forever after
    assert evaluate_region_policy(model, constant, 1e-9) == pytest.approx(
        1.0, abs=1e-9
    )
    costly = RegionPolicy.constant(1, (0, 1))
    assert evaluate_region_policy(model, costly, 1e-9) == pytest.approx(
        3.0, abs=1e-9
    )
    split = RegionPolicy(
        [Interval.half_open(0, 0.25), Interval.closed(0.25, 1)], [1, 0]
    )
    assert evaluate_region_policy(model, split, 1e-9) == pytest.approx(
        1.25, abs=1e-9
    )
    open_loop = OpenLoopPolicy([1], tail=0)
    assert evaluate_region_policy(model, open_loop, 1e-9) == pytest.approx(
        2.0, abs=1e-9
    )


def test_region_policy_measurability():
    model = region_model()
    gap = RegionPolicy([Interval.half_open(0, 0.5)], [0])
    with pytest.raises(PolicyMeasurabilityException, match="partition"):
        evaluate_region_policy(model, gap, 1e-6)

    blind = region_model(channel_tag="uninformative")
    split = RegionPolicy(
        [Interval.half_open(0, 0.5), Interval.closed(0.5, 1)], [1, 0]
    )
    with pytest.raises(PolicyMeasurabilityException, match="uninformative"):
        evaluate_region_policy(blind, split, 1e-6)
    with pytest.raises(PolicyMeasurabilityException):
        evaluate_region_policy(model, HistoryPolicy.constant(0, 1, 1), 1e-6)


def test_solve():
    result = solve(chain_mdp(), 1e-9)
    assert result.solver == "value-iteration"
    assert result.value == pytest.approx(1.0, abs=1e-9)
    assert result.to_json()["policy"] == {
        "kind": "stationary",
        "actions": [1, 0],
    }

    tree = solve(as_pomdp(chain_mdp()), 1e-3)
    assert tree.solver == "belief-tree"
    assert tree.nodes == tree.policy.nodes

    with pytest.raises(SolverException, match="no solver"):
        solve(region_model(), 1e-6)
