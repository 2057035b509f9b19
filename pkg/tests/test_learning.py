# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

import numpy as np
import pytest

from mismatchlab import (
    EstimatorException,
    LearningCurve,
    Measure1D,
    PiecewisePolynomial,
    RegionPolicy,
    StationaryPolicy,
    Trajectory,
    empirical_kernel,
    histogram_density,
    kernel_tv_sup,
    kernel_w1_sup,
    learning_curve,
    make_additive_noise,
    mismatch_loss,
    pushforward_kernel,
    random_tabular_mdp,
    recover_noise,
    simulate,
    simulate_additive,
    tv_distance,
    w1_distance,
)
from mismatchlab.gallery import make_scaling_noise_model
from mismatchlab.learning import (
    LEARNING_COLUMNS,
    UNIFORM_RANDOM,
    default_bin_count,
)
from mismatchlab.robustness import MismatchRecord
from mismatchlab.util import make_rng

from .conftest import chain_mdp


def loss_record(loss, n, seed):
    return MismatchRecord(
        "true",
        "design",
        0.5,
        0.0,
        0.0,
        1.0,
        1.0,
        1.0 + loss,
        1.0,
        1e-9,
        extra={"N": n, "seed": seed},
    )


def test_trajectory():
    tr = Trajectory([0, 0, 0, 1, 0, 0], [0, 0, 0, 1, 0], "manual", seed=3)
    assert len(tr) == 5
    assert tr.tabular
    assert tr.seed == 3
    assert list(tr.transitions())[2] == (0, 0, 1)
    assert len(tr.prefix(2)) == 2
    assert tr.prefix(0).states.tolist() == [0]
    with pytest.raises(ValueError, match="prefix length"):
        tr.prefix(6)
    with pytest.raises(ValueError, match="needs 3 states"):
        Trajectory([0, 1], [0, 0], "manual")
    assert not Trajectory([0.5, 0.25], [0], "manual").tabular


def test_simulate_cycle():
    switch = StationaryPolicy([1, 1])
    tr = simulate(chain_mdp(), switch, 4, make_rng(1), seed=1)
    assert tr.states.tolist() == [0, 1, 0, 1, 0]
    assert tr.actions.tolist() == [1, 1, 1, 1]
    assert tr.exploration == "stationary:1,1"


def test_simulate_deterministic(small_mdp):
    first = simulate(small_mdp, UNIFORM_RANDOM, 500, make_rng(9), seed=9)
    second = simulate(small_mdp, UNIFORM_RANDOM, 500, make_rng(9), seed=9)
    np.testing.assert_array_equal(first.states, second.states)
    np.testing.assert_array_equal(first.actions, second.actions)
    assert first.exploration == UNIFORM_RANDOM
    other = simulate(small_mdp, UNIFORM_RANDOM, 500, make_rng(10))
    assert not np.array_equal(first.states, other.states)


def test_simulate_errors(small_mdp):
    with pytest.raises(ValueError, match="negative"):
        simulate(small_mdp, UNIFORM_RANDOM, -1, make_rng(0))
    with pytest.raises(EstimatorException, match="StationaryPolicy"):
        simulate(
            small_mdp, RegionPolicy.constant(0, (0.0, 1.0)), 3, make_rng(0)
        )
    with pytest.raises(ValueError, match="does not cover"):
        simulate(small_mdp, StationaryPolicy([0, 1]), 3, make_rng(0))
    with pytest.raises(ValueError, match="unknown exploration"):
        simulate(small_mdp, "greedy", 3, make_rng(0))


def test_empirical_kernel_counts():
    tr = Trajectory([0, 0, 0, 1, 0, 0], [0, 0, 0, 1, 0], "manual")
    kernel, unvisited = empirical_kernel(tr, (3, 2))
    np.testing.assert_allclose(kernel[0, 0], [0.75, 0.25, 0.0])
    np.testing.assert_allclose(kernel[1, 1], [1.0, 0.0, 0.0])
    np.testing.assert_allclose(kernel[0, 1], [1 / 3, 1 / 3, 1 / 3])
    np.testing.assert_allclose(kernel.sum(axis=2), 1.0)
    assert unvisited.tolist() == [
        [False, True],
        [True, False],
        [True, True],
    ]

    kernel, _ = empirical_kernel(tr, (3, 2), fallback=[0.0, 0.0, 1.0])
    np.testing.assert_allclose(kernel[2, 0], [0.0, 0.0, 1.0])


def test_empirical_kernel_errors():
    with pytest.raises(EstimatorException, match="no transitions"):
        empirical_kernel(Trajectory([0], [], "manual"), (2, 2))
    with pytest.raises(EstimatorException, match="tabular"):
        empirical_kernel(Trajectory([0.5, 0.25], [0], "manual"), (2, 2))
    with pytest.raises(ValueError, match="fallback"):
        empirical_kernel(
            Trajectory([0, 1], [0], "manual"), (3, 2), fallback=[0.5, 0.5]
        )


def test_empirical_kernel_consistency():
    rng = make_rng(20260101)
    truth = random_tabular_mdp(rng, 5, 3, concentration=10.0, name="truth")
    tr = simulate(truth, UNIFORM_RANDOM, 100_000, rng)
    kernel, unvisited = empirical_kernel(tr, (5, 3))
    assert not unvisited.any()
    estimate = truth.with_kernel(kernel, name="estimate")
    assert kernel_tv_sup(estimate, truth) <= 0.05


def test_recover_noise():
    model = make_scaling_noise_model()
    tr = simulate_additive(model, UNIFORM_RANDOM, 10_000, make_rng(5))
    assert not tr.tabular
    noise = recover_noise(tr, model)
    assert noise.total_mass == pytest.approx(1.0)
    assert w1_distance(noise, Measure1D.uniform(0.0, 1.0)) <= 0.02


def test_recover_noise_noiseless():
    model = make_scaling_noise_model(Measure1D.dirac(0.0))
    tr = simulate_additive(model, UNIFORM_RANDOM, 10, make_rng(5))
    noise = recover_noise(tr, model)
    ((location, mass),) = noise.atoms
    assert location == pytest.approx(0.0, abs=1e-12)
    assert mass == pytest.approx(1.0)


def test_simulate_additive_errors():
    model = make_scaling_noise_model()
    with pytest.raises(EstimatorException, match="RegionPolicy"):
        simulate_additive(model, StationaryPolicy([0]), 3, make_rng(0))
    leaky = make_additive_noise(
        [PiecewisePolynomial.constant(0.9, 0.0, 1.0)],
        Measure1D.uniform(0.2, 0.5),
        [0.0],
        (0.0, 1.0),
    )
    with pytest.raises(EstimatorException, match="left the state interval"):
        simulate_additive(leaky, UNIFORM_RANDOM, 3, make_rng(0))


def test_simulate_additive_region_policy():
    model = make_scaling_noise_model()
    policy = RegionPolicy.constant(1, (0.0, 2.0), name="scale")
    tr = simulate_additive(model, policy, 20, make_rng(2))
    assert tr.exploration == "region:scale"
    assert set(tr.actions.tolist()) == {1}


def test_histogram_density():
    single = histogram_density([0.3] * 7, bins=10)
    assert len(single.pieces) == 1
    assert single.total_mass == pytest.approx(1.0)

    samples = make_rng(11).random(100_000)
    estimate = histogram_density(samples, bins=20, value_range=(0.0, 1.0))
    assert estimate.total_mass == pytest.approx(1.0)
    assert tv_distance(estimate, Measure1D.uniform(0.0, 1.0)) <= 0.05

    with pytest.raises(EstimatorException):
        histogram_density([])
    with pytest.raises(ValueError, match="outside the range"):
        histogram_density([0.5, 1.5], value_range=(0.0, 1.0))


def test_default_bin_count():
    assert default_bin_count(1) == 5
    assert default_bin_count(2000) == 13
    assert default_bin_count(100_000) == 47
    assert default_bin_count(10 ** 8) == 200


def test_pushforward_kernel():
    model = make_scaling_noise_model()
    table = pushforward_kernel(Measure1D.dirac(0.0), model)
    for i, x in enumerate(model.state_grid):
        assert table.cell(i, 0).atoms == [(0.0, 1.0)]
        ((location, mass),) = table.cell(i, 1).atoms
        assert location == pytest.approx(x / 2)

    narrow = Measure1D.uniform(-0.1, 0.1)
    wide = Measure1D.uniform(-0.1, 0.15)
    first = pushforward_kernel(narrow, model)
    second = pushforward_kernel(wide, model)
    assert tv_distance(narrow, wide) == pytest.approx(0.4)
    assert kernel_tv_sup(first, second) == pytest.approx(0.4)
    assert kernel_w1_sup(first, second) == pytest.approx(
        w1_distance(narrow, wide)
    )
    assert w1_distance(narrow, wide) == pytest.approx(0.025)


def test_learning_curve_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        LearningCurve("counting", [10, 10], [])
    record = mismatch_loss(chain_mdp(), chain_mdp(), 1e-9)
    with pytest.raises(ValueError, match="N and seed"):
        LearningCurve("counting", [10], [record])


def test_learning_curve_quartiles():
    losses = [3.0, 0.0, 2.0, 1.0]
    records = [loss_record(loss, 10, seed) for seed, loss in enumerate(losses)]
    records += [loss_record(0.0, 100, seed) for seed in range(4)]
    curve = LearningCurve("counting", [10, 100], records)
    (n, q1, median, q3), last = curve.quartiles()
    assert n == 10
    assert (q1, median, q3) == pytest.approx((0.75, 1.5, 2.25))
    assert last == (100, 0.0, 0.0, 0.0)
    assert curve.median_nonincreasing()
    assert curve.losses(10).tolist() == losses
    assert curve.bound_violations() == []


def test_learning_curve_deterministic_model():
    curve = learning_curve(chain_mdp(), "counting", [200], [1, 2], 1e-9)
    for record in curve.records:
        assert record.extra["unvisited_cells"] == 0
        assert record.loss <= 2e-9


def test_learning_curve_counting(small_mdp):
    sizes, seeds = [100, 1000], [1, 2, 3]
    curve = learning_curve(small_mdp, "counting", sizes, seeds, 1e-9)
    assert len(curve.records) == 6
    assert [r.extra["N"] for r in curve.records] == [100] * 3 + [1000] * 3
    assert curve.bound_violations() == []
    rows = curve.to_rows()
    assert len(rows[0]) == len(LEARNING_COLUMNS)
    assert rows[0][LEARNING_COLUMNS.index("estimator")] == "counting"

    again = learning_curve(small_mdp, "counting", sizes, seeds, 1e-9)
    assert again.to_rows() == rows


@pytest.mark.parametrize("estimator", ["noise-empirical", "noise-histogram"])
def test_learning_curve_noise(estimator):
    model = make_scaling_noise_model()
    curve = learning_curve(model, estimator, [200, 2000], [4], 1e-9, n_bins=10)
    assert len(curve.records) == 2
    assert curve.bound_violations() == []
    for record in curve.records:
        assert record.extra["estimator"] == estimator
        assert record.sup_tv <= 2.0


def test_learning_curve_errors(small_mdp):
    with pytest.raises(EstimatorException, match="unknown estimator"):
        learning_curve(small_mdp, "bogus", [10], [1], 1e-9)
    with pytest.raises(EstimatorException, match="TabularMDP"):
        learning_curve(
            make_scaling_noise_model(), "counting", [10], [1], 1e-9
        )
    with pytest.raises(EstimatorException, match="AdditiveNoiseModel"):
        learning_curve(small_mdp, "noise-empirical", [10], [1], 1e-9)


@pytest.mark.slow
def test_learning_curve_acceptance():
    truth = random_tabular_mdp(make_rng(20260101), 5, 3, name="truth")
    curve = learning_curve(
        truth, "counting", [100, 1000, 10_000, 100_000], range(20), 1e-9
    )
    assert curve.bound_violations() == []
    assert curve.median_nonincreasing(slack=2e-9)
    final_median = curve.quartiles()[-1][2]
    assert final_median <= 0.05 * truth.cost_sup / (1 - truth.discount)
