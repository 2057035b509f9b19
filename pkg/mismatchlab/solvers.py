# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Discounted-cost solvers and policy evaluation for tabular MDPs, tabular
POMDPs and region models."""

import itertools
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import util
from .exceptions import (
    BudgetExceededException,
    PolicyMeasurabilityException,
    SolverException,
)
from .measures import (
    MAX_DEGREE,
    Interval,
    Measure1D,
    cell_masses_and_integrals,
)
from .models import (
    RegionModel,
    TabularMDP,
    TabularPOMDP,
    locate_cells,
    partition_grid,
)

DEFAULT_NODE_BUDGET = 1_000_000
BELIEF_DECIMALS = 10
RESIDUAL_TOLERANCE = 1e-10

History = Tuple[int, ...]


class StationaryPolicy:
    """A deterministic stationary policy on a tabular model: one action
    index per state index."""

    def __init__(self, actions: Sequence[int]):
        actions = np.array(actions, dtype=int)
        if actions.ndim != 1 or actions.size == 0:
            raise ValueError("policy needs one action per state")
        actions.flags.writeable = False
        self._actions = actions

    @property
    def actions(self) -> np.ndarray:
        return self._actions

    def __call__(self, state: int) -> int:
        return int(self._actions[state])

    def __eq__(self, other):
        if not isinstance(other, StationaryPolicy):
            return NotImplemented
        return np.array_equal(self._actions, other._actions)

    __hash__ = None  # type: ignore[assignment]

    def to_json(self) -> dict:
        return {"kind": "stationary", "actions": self._actions.tolist()}

    def __str__(self):
        return f"StationaryPolicy({self._actions.tolist()})"


class RegionPolicy:
    """A piecewise-constant policy on a region model: each cell (an
    interval or a point) carries an action index. Cells need not coincide
    with the model's regions; evaluation works on the common refinement.

    :param cells: Disjoint intervals covering the state interval.
    :param actions: Action index for each cell.
    :param name: (Optional) identifier used in result records.
    """

    def __init__(
        self,
        cells: Sequence[Interval],
        actions: Sequence[int],
        name: str = "region-policy",
    ):
        if len(cells) != len(actions):
            raise ValueError("policy needs one action per cell")
        if len(cells) == 0:
            raise ValueError("policy needs at least one cell")
        self._cells = tuple(cells)
        self._actions = tuple(int(a) for a in actions)
        self._name = name

    @staticmethod
    def constant(
        action: int, state_interval: Tuple[float, float], name="constant"
    ) -> "RegionPolicy":
        return RegionPolicy(
            [Interval.closed(*state_interval)], [action], name=name
        )

    @property
    def cells(self) -> Tuple[Interval, ...]:
        return self._cells

    @property
    def actions(self) -> Tuple[int, ...]:
        return self._actions

    @property
    def name(self) -> str:
        return self._name

    def action_at(self, x: float) -> Optional[int]:
        for cell, action in zip(self._cells, self._actions):
            if cell.contains(x):
                return action
        return None

    def to_json(self) -> dict:
        return {
            "kind": "region",
            "name": self._name,
            "cells": [c.to_json() for c in self._cells],
            "actions": list(self._actions),
        }


class OpenLoopPolicy:
    """A time-indexed action sequence, followed by a constant tail action.
    The only admissible policies when the channel is uninformative.

    :param sequence: Action indices for t = 0, 1, ...
    :param tail: Action index for every t >= len(sequence).
    """

    def __init__(
        self, sequence: Sequence[int], tail: int, name: str = "open-loop"
    ):
        self._sequence = tuple(int(a) for a in sequence)
        self._tail = int(tail)
        self._name = name

    @property
    def sequence(self) -> Tuple[int, ...]:
        return self._sequence

    @property
    def tail(self) -> int:
        return self._tail

    @property
    def name(self) -> str:
        return self._name

    def action_at_time(self, t: int) -> int:
        if t < len(self._sequence):
            return self._sequence[t]
        return self._tail

    def to_json(self) -> dict:
        return {
            "kind": "open-loop",
            "name": self._name,
            "sequence": list(self._sequence),
            "tail": self._tail,
        }


def history_count(n_observations: int, depth: int) -> int:
    """Number of nodes of a complete observation-history tree of the given
    depth: sum of Y**t for t = 1..depth."""
    return sum(n_observations ** t for t in range(1, depth + 1))


class HistoryPolicy:
    """A finite-horizon deterministic policy given as a decision tree over
    observation histories. The action at time t depends on (y_0, ..., y_t);
    the tree has one node per history of length 1..depth. Beyond the depth
    the default action applies.

    :param actions: Mapping history tuple -> action index.
    :param depth: Number of decision stages covered by the tree.
    :param n_observations: Size of the observation alphabet.
    :param default_action: Action index used beyond the depth.
    """

    def __init__(
        self,
        actions: Dict[History, int],
        depth: int,
        n_observations: int,
        default_action: int = 0,
    ):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        expected = history_count(n_observations, depth)
        if len(actions) != expected:
            raise ValueError(
                f"history tree of depth {depth} over {n_observations} "
                f"observations needs {expected} nodes, got {len(actions)}"
            )
        for history in actions:
            if not 1 <= len(history) <= depth or any(
                not 0 <= y < n_observations for y in history
            ):
                raise ValueError(f"invalid history {history}")
        self._actions = {tuple(h): int(a) for h, a in actions.items()}
        self._depth = depth
        self._n_observations = n_observations
        self._default_action = int(default_action)

    @staticmethod
    def constant(
        action: int, depth: int, n_observations: int
    ) -> "HistoryPolicy":
        return HistoryPolicy(
            {
                h: action
                for h in iterate_histories(n_observations, depth)
            },
            depth,
            n_observations,
            default_action=action,
        )

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def n_observations(self) -> int:
        return self._n_observations

    @property
    def default_action(self) -> int:
        return self._default_action

    @property
    def nodes(self) -> int:
        return len(self._actions)

    def action(self, history: Sequence[int]) -> int:
        if len(history) > self._depth:
            return self._default_action
        return self._actions[tuple(history)]

    def to_json(self) -> dict:
        return {
            "kind": "history",
            "depth": self._depth,
            "n_observations": self._n_observations,
            "default_action": self._default_action,
            "nodes": [
                {"history": list(h), "action": a}
                for h, a in sorted(self._actions.items())
            ],
        }

    @staticmethod
    def from_json(json) -> "HistoryPolicy":
        return HistoryPolicy(
            {tuple(n["history"]): n["action"] for n in json["nodes"]},
            json["depth"],
            json["n_observations"],
            json.get("default_action", 0),
        )


def iterate_histories(n_observations: int, depth: int):
    """Yields every observation history of length 1..depth, shortest
    first."""
    for length in range(1, depth + 1):
        yield from itertools.product(range(n_observations), repeat=length)


Policy = Union[StationaryPolicy, RegionPolicy, OpenLoopPolicy, HistoryPolicy]


class SolverResult:
    """Outcome of a solver run.

    :param solver: Name of the solver.
    :param value: Optimal value at the initial distribution.
    :param error_bound: Certified bound on |value - true value|.
    :param values: (Optional) value per state.
    :param policy: (Optional) the computed policy.
    :param iterations: (Optional) number of iterations.
    :param nodes: (Optional) number of belief or history nodes.
    :param horizon: (Optional) truncation horizon.
    :param default_action: (Optional) action used beyond a history tree.
    """

    def __init__(
        self,
        solver: str,
        value: float,
        error_bound: float,
        values: Optional[np.ndarray] = None,
        policy: Optional[Policy] = None,
        iterations: Optional[int] = None,
        nodes: Optional[int] = None,
        horizon: Optional[int] = None,
        default_action: Optional[int] = None,
    ):
        self.solver = solver
        self.value = float(value)
        self.error_bound = float(error_bound)
        self.values = values
        self.policy = policy
        self.iterations = iterations
        self.nodes = nodes
        self.horizon = horizon
        self.default_action = default_action

    def to_json(self) -> dict:
        return {
            "solver": self.solver,
            "value": self.value,
            "error_bound": self.error_bound,
            "values": None if self.values is None else self.values.tolist(),
            "policy": None if self.policy is None else self.policy.to_json(),
            "iterations": self.iterations,
            "nodes": self.nodes,
            "horizon": self.horizon,
            "default_action": self.default_action,
        }

    def __str__(self):
        return (
            f"{self.solver}: value={self.value:.12g} "
            f"(error <= {self.error_bound:.3g})"
        )


def truncation_horizon(cost_sup: float, discount: float, tol: float) -> int:
    """Returns the smallest H >= 0 with
    cost_sup * discount**(H + 1) / (1 - discount) <= tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if cost_sup <= 0:
        return 0
    horizon = max(
        0,
        math.ceil(
            math.log(tol * (1.0 - discount) / cost_sup) / math.log(discount)
        )
        - 1,
    )
    while horizon > 0 and tail_bound(cost_sup, discount, horizon - 1) <= tol:
        horizon -= 1
    while tail_bound(cost_sup, discount, horizon) > tol:
        horizon += 1
    return horizon


def tail_bound(cost_sup: float, discount: float, horizon: int) -> float:
    """Returns cost_sup * discount**(horizon + 1) / (1 - discount)."""
    return cost_sup * discount ** (horizon + 1) / (1.0 - discount)


def _q_values(m: TabularMDP, v: np.ndarray) -> np.ndarray:
    return m.cost + m.discount * np.einsum("xuy,y->xu", m.kernel, v)


def value_iterate(
    m: TabularMDP,
    tol: float,
    on_iteration: Optional[Callable[[int, float], None]] = None,
) -> Tuple[np.ndarray, StationaryPolicy, int]:
    """Runs value iteration from v = 0 until the sup-norm distance to the
    fixed point is at most tol.

    Iteration stops when the successive-iterate gap is at most
    tol * (1 - beta) / beta, or after
    k >= log(tol * (1 - beta) / ||c||) / log(beta) iterations, whichever
    comes first.

    :param m: The model.
    :param tol: Positive accuracy target.
    :param on_iteration: (Optional) called with (k, gap) after every
        iteration.
    :return: tuple (values, greedy policy, iteration count).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    beta = m.discount
    cost_sup = m.cost_sup
    if cost_sup > 0:
        max_iterations = max(
            1,
            math.ceil(
                math.log(tol * (1.0 - beta) / cost_sup) / math.log(beta)
            ),
        )
    else:
        max_iterations = 1
    gap_target = tol * (1.0 - beta) / beta
    v = np.zeros(m.n_states)
    iterations = 0
    while True:
        iterations += 1
        v_next = _q_values(m, v).min(axis=1)
        gap = float(np.abs(v_next - v).max())
        v = v_next
        if on_iteration is not None:
            on_iteration(iterations, gap)
        if gap <= gap_target or iterations >= max_iterations:
            break
    policy = StationaryPolicy(np.argmin(_q_values(m, v), axis=1))
    util.log_debug(
        "Value iteration finished",
        model=m.name,
        iterations=iterations,
        gap=gap,
    )
    return v, policy, iterations


def evaluate_policy_exact(
    m: TabularMDP, policy: StationaryPolicy
) -> np.ndarray:
    """Solves (I - beta * P_pi) v = c_pi by direct elimination."""
    if policy.actions.size != m.n_states:
        raise ValueError(
            f"policy covers {policy.actions.size} states, model has "
            f"{m.n_states}"
        )
    if np.any((policy.actions < 0) | (policy.actions >= m.n_actions)):
        raise ValueError("policy action index out of range")
    states = np.arange(m.n_states)
    transition = m.kernel[states, policy.actions]
    stage_cost = m.cost[states, policy.actions]
    system = np.eye(m.n_states) - m.discount * transition
    try:
        v = np.linalg.solve(system, stage_cost)
    except np.linalg.LinAlgError as error:
        raise SolverException(f"policy evaluation failed: {error}")
    residual = float(np.abs(system @ v - stage_cost).max())
    if residual > RESIDUAL_TOLERANCE * max(1.0, float(np.abs(v).max())):
        raise SolverException(
            f"policy evaluation residual {residual:.3g} is too large"
        )
    return v


def policy_iterate(
    m: TabularMDP, max_iterations: int = 1000
) -> Tuple[np.ndarray, StationaryPolicy, int]:
    """Howard policy iteration; an exact cross-check for value_iterate.
    The current action is kept unless another is strictly better."""
    actions = np.argmin(m.cost, axis=1)
    for iteration in range(1, max_iterations + 1):
        policy = StationaryPolicy(actions)
        v = evaluate_policy_exact(m, policy)
        q = _q_values(m, v)
        current = q[np.arange(m.n_states), actions]
        best = q.min(axis=1)
        improve = best < current - 1e-12 * max(1.0, float(np.abs(v).max()))
        if not np.any(improve):
            return v, policy, iteration
        actions = np.where(improve, np.argmin(q, axis=1), actions)
    raise SolverException(
        f"policy iteration did not converge in {max_iterations} iterations"
    )


def _region_cell_actions(
    m: RegionModel, policy: Union[RegionPolicy, OpenLoopPolicy], grid
):
    """Action index per grid point and per gap, or None for open-loop
    policies."""
    if isinstance(policy, OpenLoopPolicy):
        return None
    point_owner, point_count, gap_owner, gap_count = locate_cells(
        grid, policy.cells
    )
    if np.any(point_count != 1) or np.any(gap_count != 1):
        raise PolicyMeasurabilityException(
            f"policy {policy.name!r} cells do not partition the state "
            f"interval {m.state_interval}"
        )
    actions = np.asarray(policy.actions)
    point_actions = actions[point_owner]
    gap_actions = actions[gap_owner]
    if np.any((actions < 0) | (actions >= m.n_actions)):
        raise ValueError("policy action index out of range")
    if m.channel_tag == "uninformative" and (
        np.unique(np.concatenate((point_actions, gap_actions))).size > 1
    ):
        raise PolicyMeasurabilityException(
            f"model {m.name!r} has an uninformative channel; policy "
            f"{policy.name!r} depends on the state"
        )
    return point_actions, gap_actions


def _cost_tables(m: RegionModel, grid: np.ndarray):
    """Per-action coefficient rows on each gap and values at each grid
    point."""
    midpoints = 0.5 * (grid[:-1] + grid[1:])
    gap_coefficients = np.zeros(
        (m.n_actions, midpoints.size, MAX_DEGREE + 1)
    )
    point_values = np.zeros((m.n_actions, grid.size))
    for a, cost in enumerate(m.cost):
        gap_coefficients[a] = cost.coefficients[cost.piece_index(midpoints)]
        point_values[a] = cost(grid)
    return gap_coefficients, point_values


def evaluate_region_policy(
    m: RegionModel,
    policy: Union[RegionPolicy, OpenLoopPolicy],
    tol: float,
) -> float:
    """Returns the discounted cost of a piecewise-constant or open-loop
    policy from the model's initial distribution, within tol.

    The state distribution is propagated exactly: because kernels are
    constant on regions, the next distribution is the mixture of kernel
    entries weighted by the mass of each (region, action) cell. Stage costs
    are integrated exactly on the common refinement of the regions, the
    policy cells and the cost breakpoints.
    """
    if not isinstance(policy, (OpenLoopPolicy, RegionPolicy)):
        raise PolicyMeasurabilityException(
            f"{type(policy).__name__} cannot be evaluated on a region model"
        )
    horizon = truncation_horizon(m.cost_sup, m.discount, tol)
    extra: List[float] = []
    for cost in m.cost:
        extra += cost.breakpoints.tolist()
    cells = policy.cells if isinstance(policy, RegionPolicy) else ()
    grid = partition_grid(m.state_interval, m.regions, cells, extra=extra)
    point_region, _, gap_region, _ = locate_cells(grid, m.regions)
    if np.any(point_region < 0) or np.any(gap_region < 0):
        raise PolicyMeasurabilityException(
            f"regions of model {m.name!r} do not cover the state interval"
        )
    cell_actions = _region_cell_actions(m, policy, grid)
    gap_coefficients, point_values = _cost_tables(m, grid)
    n_regions = len(m.regions)
    gap_index = np.arange(grid.size - 1)
    point_index = np.arange(grid.size)

    mu = m.initial
    total = 0.0
    weight = 1.0
    for t in range(horizon + 1):
        if cell_actions is None:
            action = policy.action_at_time(t)  # type: ignore[union-attr]
            point_actions = np.full(grid.size, action)
            gap_actions = np.full(grid.size - 1, action)
        else:
            point_actions, gap_actions = cell_actions
        gap_mass, point_mass, gap_cost, point_cost = (
            cell_masses_and_integrals(
                mu,
                grid,
                grid,
                gap_coefficients[gap_actions, gap_index],
                point_values[point_actions, point_index],
            )
        )
        total += weight * float(gap_cost.sum() + point_cost.sum())
        pair_mass = np.zeros(n_regions * m.n_actions)
        np.add.at(
            pair_mass, gap_region * m.n_actions + gap_actions, gap_mass
        )
        np.add.at(
            pair_mass, point_region * m.n_actions + point_actions, point_mass
        )
        keys = np.nonzero(pair_mass > 0)[0]
        mu = Measure1D.mixture(
            pair_mass[keys].tolist(),
            [
                m.kernel(int(k) // m.n_actions, int(k) % m.n_actions)
                for k in keys
            ],
        )
        weight *= m.discount
    util.log_debug(
        "Evaluated region policy",
        model=m.name,
        policy=getattr(policy, "name", ""),
        horizon=horizon,
        value=total,
    )
    return total


def _merge_beliefs(beliefs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Merges beliefs that agree after rounding to BELIEF_DECIMALS.

    :return: tuple (representatives, index of the representative of every
        input row).
    """
    rounded = np.round(beliefs, BELIEF_DECIMALS)
    _, first, inverse = np.unique(
        rounded, axis=0, return_index=True, return_inverse=True
    )
    return beliefs[first], np.asarray(inverse).reshape(-1)


class _BeliefLevels:
    """Reachable beliefs of a POMDP, one level per time step up to the
    horizon, with beliefs that coincide merged at every level.

    priors[t] has shape (M_t, S): the distinct state distributions before
    y_t is observed. posteriors[t] has shape (M_t, Y, S) and masses[t] shape
    (M_t, Y). successors[t][i, y, u] is the row of priors[t + 1] reached
    from prior i after observing y and taking action u.
    """

    def __init__(self, m: TabularPOMDP, horizon: int, node_budget: int):
        self.priors: List[np.ndarray] = [m.initial[None, :]]
        self.posteriors: List[np.ndarray] = []
        self.masses: List[np.ndarray] = []
        self.successors: List[np.ndarray] = []
        self.nodes = 0
        for t in range(horizon + 1):
            prior = self.priors[t]
            joint = prior[:, :, None] * m.channel[None, :, :]
            mass = joint.sum(axis=1)
            self.nodes += mass.size
            if self.nodes > node_budget:
                raise BudgetExceededException(
                    f"belief tree exceeds the node budget at t={t}",
                    required=self.nodes,
                    budget=node_budget,
                )
            reachable = mass > 0
            posterior = np.transpose(joint, (0, 2, 1)) / np.where(
                reachable, mass, 1.0
            )[:, :, None]
            # unreachable observations keep the prior; they carry no mass
            posterior = np.where(
                reachable[:, :, None], posterior, prior[:, None, :]
            )
            self.posteriors.append(posterior)
            self.masses.append(mass)
            if t < horizon:
                moved = np.einsum("iys,sux->iyux", posterior, m.kernel)
                following, index = _merge_beliefs(
                    moved.reshape(-1, m.n_states)
                )
                self.priors.append(following)
                self.successors.append(index.reshape(moved.shape[:3]))

    @property
    def beliefs(self) -> int:
        return sum(prior.shape[0] for prior in self.priors)


def solve_pomdp_belief_tree(
    m: TabularPOMDP,
    tol: float,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Tuple[float, HistoryPolicy]:
    """Computes a tol-optimal value at the prior and the corresponding
    history policy by an exact dynamic program over reachable beliefs,
    truncated at the horizon H where the tail bound falls below tol.

    Beliefs are expanded level by level and merged when they agree to 1e-10,
    so histories that lead to the same belief share work. Without merges the
    tree has sum of (Y * U)**t * Y posterior nodes for t = 0..H.

    :raises BudgetExceededException: if the history tree or the belief tree
        would exceed node_budget nodes.
    """
    horizon = truncation_horizon(m.cost_sup, m.discount, tol)
    depth = horizon + 1
    required = history_count(m.n_observations, depth)
    if required > node_budget:
        raise BudgetExceededException(
            f"history tree of depth {depth} is too large",
            required=required,
            budget=node_budget,
        )
    levels = _BeliefLevels(m, horizon, node_budget)

    decisions: List[np.ndarray] = [np.empty(0)] * depth
    value_to_go = np.zeros(0)
    for t in reversed(range(depth)):
        q = levels.posteriors[t] @ m.cost
        if t < horizon:
            q = q + m.discount * value_to_go[levels.successors[t]]
        decisions[t] = np.argmin(q, axis=2)
        value_to_go = (levels.masses[t] * q.min(axis=2)).sum(axis=1)
    value = float(value_to_go[0])

    actions: Dict[History, int] = {}
    level: List[Tuple[History, Optional[int]]] = [((), 0)]
    for t in range(depth):
        next_level: List[Tuple[History, Optional[int]]] = []
        for history, index in level:
            for y in range(m.n_observations):
                node = history + (y,)
                if index is None or levels.masses[t][index, y] == 0:
                    actions[node] = 0
                    next_level.append((node, None))
                    continue
                action = int(decisions[t][index, y])
                actions[node] = action
                following = None
                if t < horizon:
                    following = int(levels.successors[t][index, y, action])
                next_level.append((node, following))
        level = next_level
    util.log_info(
        "Solved POMDP by belief tree",
        model=m.name,
        horizon=horizon,
        beliefs=levels.beliefs,
        nodes=len(actions),
        value=value,
    )
    return value, HistoryPolicy(actions, depth, m.n_observations)


def evaluate_history_policy(
    m: TabularPOMDP,
    policy: HistoryPolicy,
    tol: float,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> float:
    """Returns the discounted cost of a history policy within tol, by
    exact forward enumeration of observation histories to the truncation
    horizon. Histories longer than the policy depth all use the default
    action, so they are merged into a single state distribution."""
    horizon = truncation_horizon(m.cost_sup, m.discount, tol)
    return truncated_history_cost(m, policy, horizon, node_budget)


def truncated_history_cost(
    m: TabularPOMDP,
    policy: HistoryPolicy,
    horizon: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> float:
    """Returns the exact expected cost sum over t = 0..horizon of a history
    policy."""
    if policy.n_observations != m.n_observations:
        raise ValueError(
            f"policy uses {policy.n_observations} observations, model has "
            f"{m.n_observations}"
        )
    required = history_count(m.n_observations, min(horizon + 1, policy.depth))
    if required > node_budget:
        raise BudgetExceededException(
            "history enumeration is too large",
            required=required,
            budget=node_budget,
        )
    # joint[h][x] = P(x_t = x, y_0..y_{t-1} = h)
    joint: Dict[Optional[History], np.ndarray] = {(): m.initial.copy()}
    total = 0.0
    weight = 1.0
    for t in range(horizon + 1):
        following: Dict[Optional[History], np.ndarray] = {}
        for history, alpha in joint.items():
            for y in range(m.n_observations):
                observed = alpha * m.channel[:, y]
                if not observed.any():
                    continue
                if history is None or t + 1 > policy.depth:
                    node: Optional[History] = None
                    action = policy.default_action
                else:
                    node = history + (y,)
                    action = policy.action(node)
                total += weight * float(observed @ m.cost[:, action])
                moved = observed @ m.kernel[:, action, :]
                if node in following:
                    following[node] = following[node] + moved
                else:
                    following[node] = moved
        joint = following
        weight *= m.discount
    return total


def solve(
    model: Union[TabularMDP, TabularPOMDP, RegionModel],
    tol: float,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SolverResult:
    """Computes the optimal value of a model with the applicable solver.

    :raises SolverException: if no solver applies, e.g. for region models,
        which are only evaluated under known policies.
    """
    if isinstance(model, TabularMDP):
        values, policy, iterations = value_iterate(model, tol)
        return SolverResult(
            "value-iteration",
            float(model.initial @ values),
            tol,
            values=values,
            policy=policy,
            iterations=iterations,
        )
    if isinstance(model, TabularPOMDP):
        value, tree = solve_pomdp_belief_tree(model, tol, node_budget)
        return SolverResult(
            "belief-tree",
            value,
            tol,
            policy=tree,
            nodes=tree.nodes,
            horizon=tree.depth - 1,
            default_action=tree.default_action,
        )
    raise SolverException(
        f"no solver applies to {type(model).__name__}; evaluate a known "
        f"policy instead"
    )
