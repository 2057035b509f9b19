# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Learning kernels from data: simulation, count-ratio kernel estimates,
noise recovery for additive-noise models, histogram densities, and
learning curves that design against the estimate and measure the loss on
the true model."""

import math
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import util
from .exceptions import EstimatorException
from .measures import Measure1D, pushforward_affine, sample
from .models import AdditiveNoiseModel, KernelTable, TabularMDP, discretize
from .robustness import BOUND_SLACK, MismatchRecord, mismatch_loss
from .solvers import RegionPolicy, StationaryPolicy

UNIFORM_RANDOM = "uniform-random"
ESTIMATORS = ("counting", "noise-empirical", "noise-histogram")
MIN_BINS = 5
MAX_BINS = 200
DEFAULT_DISCRETIZATION = 20

LEARNING_COLUMNS = (
    "N",
    "seed",
    "estimator",
    "sup_tv",
    "sup_w1",
    "j_opt_true",
    "j_cross",
    "loss",
    "robustness_bound",
    "bound_holds",
    "unvisited_cells",
)

Exploration = Union[str, StationaryPolicy, RegionPolicy]


class Trajectory:
    """A sampled path x_0, u_0, x_1, u_1, ..., x_N.

    :param states: N + 1 states; indices for tabular models, reals for
        additive-noise models.
    :param actions: N action indices.
    :param exploration: Identifier of the policy that chose the actions.
    :param seed: (Optional) seed of the generator that produced the path.
    """

    def __init__(
        self,
        states: Sequence,
        actions: Sequence[int],
        exploration: str,
        seed: Optional[int] = None,
    ):
        self._states = np.asarray(states)
        self._actions = np.asarray(actions, dtype=np.int64)
        if self._states.size != self._actions.size + 1:
            raise ValueError(
                f"a path with {self._actions.size} actions needs "
                f"{self._actions.size + 1} states, got {self._states.size}"
            )
        self._exploration = exploration
        self._seed = seed

    @property
    def states(self) -> np.ndarray:
        return self._states

    @property
    def actions(self) -> np.ndarray:
        return self._actions

    @property
    def current_states(self) -> np.ndarray:
        return self._states[:-1]

    @property
    def next_states(self) -> np.ndarray:
        return self._states[1:]

    @property
    def exploration(self) -> str:
        return self._exploration

    @property
    def seed(self) -> Optional[int]:
        return self._seed

    @property
    def tabular(self) -> bool:
        return np.issubdtype(self._states.dtype, np.integer)

    def prefix(self, steps: int) -> "Trajectory":
        """Returns the first `steps` transitions."""
        if not 0 <= steps <= len(self):
            raise ValueError(
                f"prefix length {steps} outside [0, {len(self)}]"
            )
        return Trajectory(
            self._states[: steps + 1],
            self._actions[:steps],
            self._exploration,
            self._seed,
        )

    def transitions(self) -> Iterator[Tuple]:
        return zip(
            self.current_states.tolist(),
            self._actions.tolist(),
            self.next_states.tolist(),
        )

    def __len__(self):
        return int(self._actions.size)

    def __str__(self):
        return (
            f"Trajectory(steps={len(self)}, exploration={self._exploration},"
            f" seed={self._seed})"
        )


def _exploration_id(exploration: Exploration) -> str:
    if isinstance(exploration, str):
        if exploration != UNIFORM_RANDOM:
            raise ValueError(f"unknown exploration {exploration!r}")
        return exploration
    if isinstance(exploration, StationaryPolicy):
        return "stationary:" + ",".join(map(str, exploration.actions))
    return f"region:{exploration.name}"


def simulate(
    m: TabularMDP,
    exploration: Exploration,
    steps: int,
    rng: np.random.Generator,
    seed: Optional[int] = None,
) -> Trajectory:
    """Samples a path of a tabular model.

    The initial state, then all actions (for uniform-random exploration),
    then all transition uniforms are drawn from rng in that order, so a path
    is a deterministic function of the generator state.

    :param m: The model.
    :param exploration: "uniform-random" or a StationaryPolicy.
    :param steps: Number of transitions.
    :param rng: Random generator.
    :param seed: (Optional) seed recorded on the trajectory.
    """
    if steps < 0:
        raise ValueError("steps must not be negative")
    if isinstance(exploration, RegionPolicy):
        raise EstimatorException("tabular models need a StationaryPolicy")
    exploration_id = _exploration_id(exploration)
    n_states = m.n_states
    cumulative = np.cumsum(m.kernel, axis=2)
    initial = np.cumsum(m.initial)
    state = min(
        int(np.searchsorted(initial, rng.random(), side="right")),
        n_states - 1,
    )
    if isinstance(exploration, StationaryPolicy):
        if exploration.actions.size != n_states:
            raise ValueError("exploration policy does not cover the model")
        chosen = None
    else:
        chosen = rng.integers(m.n_actions, size=steps)
    draws = rng.random(steps)
    states = np.empty(steps + 1, dtype=np.int64)
    actions = np.empty(steps, dtype=np.int64)
    states[0] = state
    for t in range(steps):
        action = exploration(state) if chosen is None else int(chosen[t])
        row = cumulative[state, action]
        state = min(
            int(np.searchsorted(row, draws[t], side="right")), n_states - 1
        )
        actions[t] = action
        states[t + 1] = state
    util.log_debug(
        "Simulated trajectory", model=m.name, steps=steps, seed=seed
    )
    return Trajectory(states, actions, exploration_id, seed)


def simulate_additive(
    m: AdditiveNoiseModel,
    exploration: Exploration,
    steps: int,
    rng: np.random.Generator,
    seed: Optional[int] = None,
) -> Trajectory:
    """Samples a path of x' = f(x, u) + w.

    :param exploration: "uniform-random" or a RegionPolicy on the state
        interval.
    :raises EstimatorException: if the path leaves the state interval.
    """
    if steps < 0:
        raise ValueError("steps must not be negative")
    if isinstance(exploration, StationaryPolicy):
        raise EstimatorException("additive-noise models need a RegionPolicy")
    exploration_id = _exploration_id(exploration)
    lo, hi = m.state_interval
    state = float(sample(m.initial, rng))
    if isinstance(exploration, RegionPolicy):
        chosen = None
    else:
        chosen = rng.integers(m.n_actions, size=steps)
    noise = np.atleast_1d(sample(m.noise, rng, size=steps))
    states = np.empty(steps + 1)
    actions = np.empty(steps, dtype=np.int64)
    states[0] = state
    for t in range(steps):
        if chosen is None:
            action = exploration.action_at(state)
            if action is None:
                raise EstimatorException(
                    f"exploration policy has no action at {state}"
                )
        else:
            action = int(chosen[t])
        state = float(m.drift_at(state, action)) + float(noise[t])
        if not lo <= state <= hi:
            raise EstimatorException(
                f"state {state} left the state interval [{lo}, {hi}] at "
                f"step {t + 1}"
            )
        actions[t] = action
        states[t + 1] = state
    return Trajectory(states, actions, exploration_id, seed)


def empirical_kernel(
    tr: Trajectory,
    shape: Tuple[int, int],
    fallback: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Estimates a tabular kernel by count ratios.

    Row (x, u) is the share of visits to (x, u) followed by each next state.
    Unvisited rows take the fallback distribution (uniform by default).

    :param tr: Tabular trajectory.
    :param shape: (number of states, number of actions).
    :param fallback: (Optional) distribution for unvisited rows.
    :return: tuple (kernel of shape (S, A, S), bool array of unvisited
        cells of shape (S, A)).
    :raises EstimatorException: if the trajectory is empty or not tabular.
    """
    if len(tr) == 0:
        raise EstimatorException("trajectory has no transitions")
    if not tr.tabular:
        raise EstimatorException("count ratios need a tabular trajectory")
    n_states, n_actions = shape
    if fallback is None:
        fallback = np.full(n_states, 1.0 / n_states)
    fallback = np.asarray(fallback, dtype=float)
    if fallback.shape != (n_states,) or abs(fallback.sum() - 1.0) > 1e-12:
        raise ValueError("fallback must be a distribution over the states")
    counts = np.zeros((n_states, n_actions, n_states))
    np.add.at(counts, (tr.current_states, tr.actions, tr.next_states), 1.0)
    visits = counts.sum(axis=2)
    unvisited = visits == 0
    kernel = np.where(
        unvisited[:, :, None],
        fallback[None, None, :],
        counts / np.where(unvisited, 1.0, visits)[:, :, None],
    )
    return kernel, unvisited


def noise_residuals(tr: Trajectory, m: AdditiveNoiseModel) -> np.ndarray:
    """Returns w_i = x_{i+1} - f(x_i, u_i) for every transition."""
    if len(tr) == 0:
        raise EstimatorException("trajectory has no transitions")
    if tr.tabular:
        raise EstimatorException("noise recovery needs real-valued states")
    current = tr.current_states.astype(float)
    drift = np.empty(current.size)
    for action in range(m.n_actions):
        mask = tr.actions == action
        if np.any(mask):
            drift[mask] = m.drift_at(current[mask], action)
    return tr.next_states.astype(float) - drift


def recover_noise(tr: Trajectory, m: AdditiveNoiseModel) -> Measure1D:
    """Returns the empirical measure of the noise residuals: one atom of
    mass 1/N per transition."""
    return Measure1D.empirical(noise_residuals(tr, m))


def default_bin_count(n_samples: int) -> int:
    """Returns ceil(N ** (1/3)) clipped to [MIN_BINS, MAX_BINS]."""
    return int(min(MAX_BINS, max(MIN_BINS, math.ceil(n_samples ** (1 / 3)))))


def histogram_density(
    samples: Sequence[float],
    bins: Optional[int] = None,
    value_range: Optional[Tuple[float, float]] = None,
) -> Measure1D:
    """Returns the histogram density estimate as a piecewise-constant
    measure.

    :param samples: Nonempty sample values.
    :param bins: (Optional) number of equal-width bins; default_bin_count
        of the sample size by default.
    :param value_range: (Optional) histogram range; the sample range by
        default (widened by 1/2 on each side when all samples coincide).
    :raises EstimatorException: if samples is empty.
    """
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        raise EstimatorException("cannot estimate a density from no samples")
    if bins is None:
        bins = default_bin_count(values.size)
    if bins < 1:
        raise ValueError("bins must be at least 1")
    if value_range is not None:
        lo, hi = value_range
        if values.min() < lo or values.max() > hi:
            raise ValueError(
                f"samples fall outside the range [{lo}, {hi}]"
            )
    counts, edges = np.histogram(values, bins=bins, range=value_range)
    heights = counts / (values.size * np.diff(edges))
    return Measure1D(
        pieces=[
            (edges[j], edges[j + 1], heights[j])
            for j in range(bins)
            if counts[j] > 0
        ]
    )


def pushforward_kernel(noise: Measure1D, m: AdditiveNoiseModel) -> KernelTable:
    """Returns the kernel x' = f(x, u) + w, w ~ noise, on the model's state
    grid: each cell is the noise shifted by f(x, u)."""
    cells = {}
    for j in range(m.n_actions):
        shifts = np.atleast_1d(m.drift_at(m.state_grid, j))
        for i, shift in enumerate(shifts):
            cells[(i, j)] = pushforward_affine(noise, 1.0, float(shift))
    return KernelTable(m.state_grid, m.actions, cells)


class LearningCurve:
    """Mismatch records of designs learned from growing samples.

    :param estimator: Estimator identifier.
    :param sample_sizes: Strictly increasing sample sizes N.
    :param records: MismatchRecords carrying "N" and "seed" in their extra
        parameters.
    """

    def __init__(
        self,
        estimator: str,
        sample_sizes: Sequence[int],
        records: Sequence[MismatchRecord],
    ):
        sizes = [int(n) for n in sample_sizes]
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sample sizes must be strictly increasing")
        for record in records:
            if "seed" not in record.extra or "N" not in record.extra:
                raise ValueError("every record must carry its N and seed")
        self.estimator = estimator
        self.sample_sizes = sizes
        self.records = sorted(
            records, key=lambda r: (r.extra["N"], r.extra["seed"])
        )

    def losses(self, n: int) -> np.ndarray:
        return np.array([r.loss for r in self.records if r.extra["N"] == n])

    def quartiles(self) -> List[Tuple[int, float, float, float]]:
        """Returns (N, first quartile, median, third quartile) of the loss
        per sample size."""
        rows = []
        for n in self.sample_sizes:
            losses = self.losses(n)
            if losses.size == 0:
                continue
            q1, median, q3 = np.percentile(losses, [25, 50, 75])
            rows.append((n, float(q1), float(median), float(q3)))
        return rows

    def median_nonincreasing(self, slack: float = 0.0) -> bool:
        medians = [median for _, _, median, _ in self.quartiles()]
        return all(b <= a + slack for a, b in zip(medians, medians[1:]))

    def bound_violations(self) -> List[MismatchRecord]:
        return [r for r in self.records if not r.bound_holds]

    def to_rows(self, columns=LEARNING_COLUMNS) -> List[List]:
        return [r.to_row(columns) for r in self.records]

    def __str__(self):
        return (
            f"LearningCurve(estimator={self.estimator}, "
            f"N={self.sample_sizes}, records={len(self.records)})"
        )


def _check_estimator(model, estimator: str):
    if estimator not in ESTIMATORS:
        raise EstimatorException(
            f"unknown estimator {estimator!r}; choose from "
            f"{', '.join(ESTIMATORS)}"
        )
    if estimator == "counting" and not isinstance(model, TabularMDP):
        raise EstimatorException("counting needs a TabularMDP")
    if estimator != "counting" and not isinstance(model, AdditiveNoiseModel):
        raise EstimatorException(f"{estimator} needs an AdditiveNoiseModel")


def curve_records(
    true_model: Union[TabularMDP, AdditiveNoiseModel],
    estimator: str,
    sample_sizes: Sequence[int],
    seed: int,
    tol: float,
    exploration: Exploration = UNIFORM_RANDOM,
    n_bins: int = DEFAULT_DISCRETIZATION,
) -> List[MismatchRecord]:
    """Runs one seed of a learning curve: a single path of length max(N)
    is simulated and every sample size uses its prefix.

    Additive-noise models are compared after discretize(., n_bins); the
    design model drives the same drift with the estimated noise.
    """
    _check_estimator(true_model, estimator)
    rng = util.make_rng(seed)
    longest = max(sample_sizes)
    records = []
    if estimator == "counting":
        path = simulate(true_model, exploration, longest, rng, seed)
        truth = true_model
    else:
        path = simulate_additive(true_model, exploration, longest, rng, seed)
        truth = discretize(true_model, n_bins)
    for n in sample_sizes:
        prefix = path.prefix(n)
        unvisited = 0
        if estimator == "counting":
            kernel, flags = empirical_kernel(
                prefix, (truth.n_states, truth.n_actions)
            )
            unvisited = int(flags.sum())
            design = truth.with_kernel(
                kernel, name=f"{truth.name}/N={n}/seed={seed}"
            )
        else:
            residuals = noise_residuals(prefix, true_model)
            if estimator == "noise-histogram":
                noise = histogram_density(residuals)
            else:
                noise = Measure1D.empirical(residuals)
            design = discretize(
                true_model.with_noise(
                    noise, name=f"{true_model.name}/N={n}/seed={seed}"
                ),
                n_bins,
            )
        records.append(
            mismatch_loss(
                truth,
                design,
                tol,
                extra={
                    "N": n,
                    "seed": seed,
                    "estimator": estimator,
                    "unvisited_cells": unvisited,
                },
            )
        )
    util.log_info(
        "Learning curve seed finished",
        estimator=estimator,
        seed=seed,
        points=len(records),
    )
    return records


def learning_curve(
    true_model: Union[TabularMDP, AdditiveNoiseModel],
    estimator: str,
    sample_sizes: Sequence[int],
    seeds: Sequence[int],
    tol: float,
    exploration: Exploration = UNIFORM_RANDOM,
    n_bins: int = DEFAULT_DISCRETIZATION,
) -> LearningCurve:
    """Estimates the kernel from N samples for each N and seed, designs the
    optimal policy of the estimate and measures its loss on the true model.

    :raises EstimatorException: if the estimator does not fit the model.
    """
    _check_estimator(true_model, estimator)
    records: List[MismatchRecord] = []
    for seed in seeds:
        records.extend(
            curve_records(
                true_model,
                estimator,
                sample_sizes,
                seed,
                tol,
                exploration,
                n_bins,
            )
        )
    curve = LearningCurve(estimator, sample_sizes, records)
    summary: Dict[str, object] = {
        "estimator": estimator,
        "records": len(curve.records),
        "violations": len(curve.bound_violations()),
        "slack": BOUND_SLACK * tol,
    }
    util.log_info("Learning curve finished", **summary)
    return curve
