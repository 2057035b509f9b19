# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

import math

import numpy as np
import pytest

from mismatchlab import (
    BudgetExceededException,
    HistoryPolicy,
    IncompatibleModelsException,
    SolverException,
    TabularMDP,
    TabularPOMDP,
    as_pomdp,
    continuity_bound,
    enumerate_history_policies,
    mismatch_loss,
    mix_kernels,
    policy_sup_gap,
    random_tabular_pomdp,
    robustness_bound,
    strategic_tv,
    tightness_ratio,
)
from mismatchlab.models import random_stochastic
from mismatchlab.robustness import (
    MISMATCH_COLUMNS,
    bound_from_tv,
    policy_sup_gap_bruteforce,
    random_mismatch_pair,
    sup_gap_tail,
)
from mismatchlab.solvers import iterate_histories

from .conftest import chain_mdp


def flipped_chain():
    chain = chain_mdp()
    return chain.with_kernel(chain.kernel[:, ::-1, :], name="flipped")


def test_bounds():
    assert bound_from_tv(1.0, 0.5, 0.1) == pytest.approx(0.2)
    assert continuity_bound(chain_mdp(), flipped_chain()) == pytest.approx(4)
    assert robustness_bound(chain_mdp(), flipped_chain()) == pytest.approx(8)
    assert continuity_bound(chain_mdp(), chain_mdp()) == 0.0
    with pytest.raises(IncompatibleModelsException, match="discounts"):
        continuity_bound(chain_mdp(0.5), chain_mdp(0.9))
    with pytest.raises(ValueError):
        bound_from_tv(1.0, 1.0, 0.1)


def test_mismatch_loss_chain():
    record = mismatch_loss(chain_mdp(), flipped_chain(), 1e-9)
    assert record.true_model == "chain"
    assert record.design_model == "flipped"
    assert record.j_opt_true == pytest.approx(1.0, abs=1e-8)
    assert record.j_opt_design == pytest.approx(4 / 3, abs=1e-8)
    assert record.j_cross == pytest.approx(2.0, abs=1e-8)
    assert record.loss == pytest.approx(1.0, abs=1e-8)
    assert record.sup_tv == pytest.approx(2.0)
    assert record.sup_w1 == pytest.approx(1.0)
    assert record.bound_holds and record.continuity_holds
    assert record.provenance == "solver"
    assert tightness_ratio(record) == pytest.approx(1 / 12, abs=1e-8)


def test_mismatch_loss_identical(small_mdp):
    record = mismatch_loss(small_mdp, small_mdp, 1e-9)
    assert record.sup_tv == 0.0
    assert abs(record.loss) <= record.slack
    assert math.isnan(tightness_ratio(record))


@pytest.mark.parametrize("eps", [0.0, 0.01, 0.2, 1.0])
@pytest.mark.parametrize("discount", [0.3, 0.9])
def test_random_pairs_respect_bounds(rng, eps, discount):
    for pair in range(5):
        true_model, design = random_mismatch_pair(
            rng, 4, 3, eps, discount, name=f"pair{pair}"
        )
        record = mismatch_loss(true_model, design, 1e-9)
        assert record.sup_tv <= 2 * eps + 1e-12
        assert record.loss >= -record.slack
        assert record.continuity_holds, str(record)
        assert record.bound_holds, str(record)


def test_mismatch_record_rows():
    record = mismatch_loss(
        chain_mdp(), flipped_chain(), 1e-9, extra={"pair": 3}
    )
    body = record.to_json()
    assert body["pair"] == 3
    assert body["bound_holds"] == 1
    row = record.to_row()
    assert len(row) == len(MISMATCH_COLUMNS)
    assert row[0] == "chain"
    assert record.to_row(("pair", "loss"))[0] == 3
    assert "loss=1" in str(record)


def test_mismatch_loss_errors(small_mdp):
    with pytest.raises(SolverException, match="no solver applies"):
        mismatch_loss(chain_mdp(), as_pomdp(chain_mdp()), 1e-6)
    with pytest.raises(IncompatibleModelsException):
        mismatch_loss(chain_mdp(), small_mdp, 1e-6)


def test_mismatch_loss_pomdp(small_pomdp, rng):
    other = random_stochastic(rng, small_pomdp.kernel.shape)
    design = mix_kernels(small_pomdp, other, 0.1)
    record = mismatch_loss(small_pomdp, design, 1e-2)
    assert record.sup_tv <= 0.2 + 1e-12
    assert record.loss >= -record.slack
    assert record.bound_holds


def first_observation_policy(policy, depth):
    """Extends a depth-1 history policy to the given depth by repeating its
    first decision."""
    return HistoryPolicy(
        {h: policy.action(h[:1]) for h in iterate_histories(2, depth)},
        depth,
        2,
    )


def test_strategic_tv(rng):
    policies = list(enumerate_history_policies(2, 2, 1))
    assert len(policies) == 4
    for pair in range(8):
        first = random_tabular_pomdp(rng, 3, 2, 2, discount=0.9)
        other = random_stochastic(rng, first.kernel.shape)
        second = mix_kernels(first, other, 0.2)
        policy = first_observation_policy(policies[pair % 4], 3)
        previous = 0.0
        for k in range(4):
            exact, bound, holds = strategic_tv(first, second, policy, k)
            assert holds, (k, exact, bound)
            assert exact >= previous - 1e-12
            previous = exact
        assert strategic_tv(first, second, policy, 0)[:2] == (0.0, 0.0)
        assert strategic_tv(first, first, policy, 3)[0] == 0.0


def test_strategic_tv_errors(small_pomdp):
    policy = HistoryPolicy.constant(0, 3, 2)
    with pytest.raises(BudgetExceededException):
        strategic_tv(small_pomdp, small_pomdp, policy, 3, budget=100)
    with pytest.raises(ValueError):
        strategic_tv(small_pomdp, small_pomdp, policy, -1)
    other = random_tabular_pomdp(np.random.default_rng(0), 2, 2, 3)
    with pytest.raises(IncompatibleModelsException):
        strategic_tv(small_pomdp, other, policy, 1)

    swapped = TabularPOMDP(small_pomdp.mdp, small_pomdp.channel[:, ::-1])
    with pytest.raises(IncompatibleModelsException, match="channels"):
        strategic_tv(small_pomdp, swapped, policy, 0)
    mdp = small_pomdp.mdp
    started = TabularPOMDP(
        TabularMDP(mdp.kernel, mdp.cost, mdp.discount, initial=[1.0, 0.0]),
        small_pomdp.channel,
    )
    with pytest.raises(IncompatibleModelsException, match="initial"):
        strategic_tv(small_pomdp, started, policy, 0)


@pytest.mark.parametrize("horizon", [0, 1])
def test_policy_sup_gap_matches_bruteforce(rng, horizon):
    for _ in range(5):
        first = random_tabular_pomdp(rng, 2, 2, 2, discount=0.5)
        other = random_stochastic(rng, first.kernel.shape)
        second = mix_kernels(first, other, 0.1)
        assert policy_sup_gap(first, second, horizon) == pytest.approx(
            policy_sup_gap_bruteforce(first, second, horizon), abs=1e-12
        )


@pytest.mark.slow
def test_policy_sup_gap_matches_bruteforce_deep(rng):
    first = random_tabular_pomdp(rng, 2, 2, 2, discount=0.5)
    second = mix_kernels(first, random_stochastic(rng, (2, 2, 2)), 0.1)
    assert policy_sup_gap(first, second, 2) == pytest.approx(
        policy_sup_gap_bruteforce(first, second, 2), abs=1e-12
    )


def test_policy_sup_gap(small_pomdp, rng):
    assert policy_sup_gap(small_pomdp, small_pomdp, 2) == 0.0
    other = random_stochastic(rng, small_pomdp.kernel.shape)
    gaps = [
        policy_sup_gap(small_pomdp, mix_kernels(small_pomdp, other, eps), 2)
        for eps in (0.2, 0.1, 0.05, 0.0)
    ]
    assert gaps[0] > 0.0
    assert gaps[-1] == 0.0
    assert sup_gap_tail(small_pomdp, 2) == pytest.approx(
        small_pomdp.cost_sup * 0.5 ** 3 / 0.5
    )

    with pytest.raises(BudgetExceededException):
        policy_sup_gap(small_pomdp, small_pomdp, 10)
    with pytest.raises(ValueError):
        policy_sup_gap(small_pomdp, small_pomdp, -1)
