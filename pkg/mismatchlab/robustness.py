# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Continuity and robustness bounds, mismatch experiments, strategic-measure
total variation and sup-over-policies cost gaps."""

import itertools
import math
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from . import util
from .exceptions import (
    BudgetExceededException,
    IncompatibleModelsException,
    SolverException,
)
from .models import (
    RegionModel,
    TabularMDP,
    TabularPOMDP,
    kernel_tv_sup,
    kernel_w1_sup,
    mix_kernels,
    random_stochastic,
    random_tabular_mdp,
)
from .solvers import (
    HistoryPolicy,
    OpenLoopPolicy,
    RegionPolicy,
    evaluate_history_policy,
    evaluate_policy_exact,
    evaluate_region_policy,
    history_count,
    iterate_histories,
    solve_pomdp_belief_tree,
    tail_bound,
    truncated_history_cost,
    value_iterate,
)

BOUND_SLACK = 4.0
DEFAULT_POLICY_BUDGET = 100_000
DEFAULT_TRAJECTORY_BUDGET = 1_000_000

MISMATCH_COLUMNS = (
    "true_model",
    "design_model",
    "discount",
    "sup_tv",
    "sup_w1",
    "j_opt_true",
    "j_opt_design",
    "j_cross",
    "loss",
    "continuity_bound",
    "robustness_bound",
    "continuity_holds",
    "bound_holds",
    "tol",
    "provenance",
)

Model = Union[TabularMDP, TabularPOMDP, RegionModel]
RegionPolicyLike = Union[RegionPolicy, OpenLoopPolicy]


def bound_from_tv(cost_sup: float, discount: float, sup_tv: float) -> float:
    """Returns cost_sup * discount / (1 - discount)**2 * sup_tv."""
    if not 0.0 < discount < 1.0:
        raise ValueError(f"discount {discount} not in (0, 1)")
    return cost_sup * discount / (1.0 - discount) ** 2 * sup_tv


def _shared_constants(first: Model, second: Model) -> Tuple[float, float]:
    if abs(first.discount - second.discount) > 0.0:
        raise IncompatibleModelsException(
            f"discounts differ: {first.discount} vs {second.discount}"
        )
    return max(first.cost_sup, second.cost_sup), first.discount


def continuity_bound(first: Model, second: Model) -> float:
    """Returns ||c|| * beta / (1 - beta)**2 * kernel_tv_sup, which bounds
    the difference of the optimal costs of the two models."""
    cost_sup, discount = _shared_constants(first, second)
    return bound_from_tv(cost_sup, discount, kernel_tv_sup(first, second))


def robustness_bound(first: Model, second: Model) -> float:
    """Returns twice the continuity bound, which bounds the loss of applying
    one model's optimal policy to the other model."""
    return 2.0 * continuity_bound(first, second)


class MismatchRecord:
    """One mismatch experiment: a policy optimal for the design model is
    applied to the true model.

    :param true_model: Identifier of the true model.
    :param design_model: Identifier of the design model.
    :param discount: Discount factor shared by both models.
    :param sup_tv: kernel_tv_sup of the pair.
    :param sup_w1: kernel_w1_sup of the pair, None where undefined.
    :param j_opt_true: Optimal cost of the true model.
    :param j_opt_design: Optimal cost of the design model.
    :param j_cross: Cost on the true model of the design-optimal policy.
    :param cost_sup: Sup-norm of the stage cost.
    :param tol: Solver tolerance; each cost carries error at most tol.
    :param provenance: "solver" if policies were computed, "analytic" if
        they were given.
    :param extra: (Optional) experiment parameters, e.g. n or seed.
    """

    def __init__(
        self,
        true_model: str,
        design_model: str,
        discount: float,
        sup_tv: float,
        sup_w1: Optional[float],
        j_opt_true: float,
        j_opt_design: float,
        j_cross: float,
        cost_sup: float,
        tol: float,
        provenance: str = "solver",
        extra: Optional[Dict[str, Any]] = None,
    ):
        self.true_model = true_model
        self.design_model = design_model
        self.discount = discount
        self.sup_tv = sup_tv
        self.sup_w1 = sup_w1
        self.j_opt_true = j_opt_true
        self.j_opt_design = j_opt_design
        self.j_cross = j_cross
        self.cost_sup = cost_sup
        self.tol = tol
        self.provenance = provenance
        self.extra = dict(extra or {})

    @property
    def loss(self) -> float:
        return self.j_cross - self.j_opt_true

    @property
    def continuity_bound(self) -> float:
        return bound_from_tv(self.cost_sup, self.discount, self.sup_tv)

    @property
    def robustness_bound(self) -> float:
        return 2.0 * self.continuity_bound

    @property
    def slack(self) -> float:
        return BOUND_SLACK * self.tol

    @property
    def continuity_holds(self) -> bool:
        gap = abs(self.j_opt_true - self.j_opt_design)
        return gap <= self.continuity_bound + self.slack

    @property
    def bound_holds(self) -> bool:
        return self.loss <= self.robustness_bound + self.slack

    def to_json(self) -> Dict[str, Any]:
        body = {
            "true_model": self.true_model,
            "design_model": self.design_model,
            "discount": self.discount,
            "sup_tv": self.sup_tv,
            "sup_w1": self.sup_w1,
            "j_opt_true": self.j_opt_true,
            "j_opt_design": self.j_opt_design,
            "j_cross": self.j_cross,
            "loss": self.loss,
            "continuity_bound": self.continuity_bound,
            "robustness_bound": self.robustness_bound,
            "continuity_holds": int(self.continuity_holds),
            "bound_holds": int(self.bound_holds),
            "tol": self.tol,
            "provenance": self.provenance,
        }
        body.update(self.extra)
        return body

    def to_row(self, columns=MISMATCH_COLUMNS) -> List[Any]:
        body = self.to_json()
        return [body.get(column) for column in columns]

    def __str__(self):
        return (
            f"MismatchRecord({self.true_model} <- {self.design_model}: "
            f"loss={self.loss:.6g}, bound={self.robustness_bound:.6g})"
        )


def tightness_ratio(record: MismatchRecord) -> float:
    """Returns |J*_true - J*_design| / continuity bound; descriptive only.
    NaN when the bound is zero."""
    if record.continuity_bound == 0.0:
        return math.nan
    gap = abs(record.j_opt_true - record.j_opt_design)
    return gap / record.continuity_bound


def _safe_w1(first: Model, second: Model) -> Optional[float]:
    try:
        return kernel_w1_sup(first, second)
    except ValueError:
        return None


def mismatch_loss(
    true_model: Model,
    design_model: Model,
    tol: float,
    design_policy: Optional[RegionPolicyLike] = None,
    true_policy: Optional[RegionPolicyLike] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> MismatchRecord:
    """Applies the policy optimal for design_model to true_model.

    Tabular models are solved (value iteration, or the belief tree for
    POMDPs). Region models need the known optimal policies of both models,
    which are only evaluated; the record's provenance is then "analytic".

    :raises SolverException: if no solver applies.
    """
    cost_sup, discount = _shared_constants(true_model, design_model)
    sup_tv = kernel_tv_sup(true_model, design_model)
    sup_w1 = _safe_w1(true_model, design_model)
    provenance = "solver"
    if isinstance(true_model, TabularMDP) and isinstance(
        design_model, TabularMDP
    ):
        v_true, _, _ = value_iterate(true_model, tol)
        v_design, design_greedy, _ = value_iterate(design_model, tol)
        j_opt_true = float(true_model.initial @ v_true)
        j_opt_design = float(design_model.initial @ v_design)
        cross_values = evaluate_policy_exact(true_model, design_greedy)
        j_cross = float(true_model.initial @ cross_values)
    elif isinstance(true_model, TabularPOMDP) and isinstance(
        design_model, TabularPOMDP
    ):
        j_opt_true, _ = solve_pomdp_belief_tree(true_model, tol)
        j_opt_design, design_tree = solve_pomdp_belief_tree(design_model, tol)
        j_cross = evaluate_history_policy(true_model, design_tree, tol)
    elif isinstance(true_model, RegionModel) and isinstance(
        design_model, RegionModel
    ):
        if design_policy is None or true_policy is None:
            raise SolverException(
                "region models need the known optimal policies of both "
                "models"
            )
        provenance = "analytic"
        j_opt_true = evaluate_region_policy(true_model, true_policy, tol)
        j_opt_design = evaluate_region_policy(
            design_model, design_policy, tol
        )
        j_cross = evaluate_region_policy(true_model, design_policy, tol)
    else:
        raise SolverException(
            f"no solver applies to the pair {type(true_model).__name__}, "
            f"{type(design_model).__name__}"
        )
    record = MismatchRecord(
        true_model.name,
        design_model.name,
        discount,
        sup_tv,
        sup_w1,
        j_opt_true,
        j_opt_design,
        j_cross,
        cost_sup,
        tol,
        provenance,
        extra,
    )
    util.log_debug(
        "Computed mismatch record",
        true=true_model.name,
        design=design_model.name,
        loss=record.loss,
        bound=record.robustness_bound,
    )
    return record


def random_mismatch_pair(
    rng: np.random.Generator,
    n_states: int,
    n_actions: int,
    eps: float,
    discount: float,
    name: str = "pair",
) -> Tuple[TabularMDP, TabularMDP]:
    """Returns (true, design) where the design kernel is the true kernel
    mixed toward a random stochastic kernel by eps, so kernel_tv_sup is at
    most 2 * eps."""
    true_model = random_tabular_mdp(
        rng, n_states, n_actions, discount, name=f"{name}/true"
    )
    other = random_stochastic(rng, true_model.kernel.shape)
    design = mix_kernels(true_model, other, eps, name=f"{name}/design")
    return true_model, design


def _trajectory_masses(
    m: TabularPOMDP, policy: HistoryPolicy, k: int
) -> Dict[Tuple[int, ...], np.ndarray]:
    """Returns, for each observation history (y_0..y_k), the probabilities
    of all state sequences (x_0..x_k) as an array with one axis per time.
    Actions are fixed by the policy, so these are the strategic-measure
    masses of all trajectories."""
    masses: Dict[Tuple[int, ...], np.ndarray] = {}
    for y in range(m.n_observations):
        masses[(y,)] = m.initial * m.channel[:, y]
    for _ in range(k):
        following = {}
        for history, mass in masses.items():
            action = policy.action(history)
            moved = mass[..., None] * m.kernel[:, action, :]
            for y in range(m.n_observations):
                following[history + (y,)] = moved * m.channel[:, y]
        masses = following
    return masses


def strategic_tv(
    first: TabularPOMDP,
    second: TabularPOMDP,
    policy: HistoryPolicy,
    k: int,
    budget: int = DEFAULT_TRAJECTORY_BUDGET,
) -> Tuple[float, float, bool]:
    """Returns (exact TV, k * kernel_tv_sup, exact <= bound + 1e-10) for the
    trajectory measures on (x, y, u) at times 0..k induced by the policy
    under both models."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if (
        first.n_states != second.n_states
        or first.n_observations != second.n_observations
    ):
        raise IncompatibleModelsException("state or observation spaces differ")
    if not np.array_equal(first.channel, second.channel):
        raise IncompatibleModelsException(
            "channels differ; the bound covers kernel changes only"
        )
    if not np.array_equal(first.initial, second.initial):
        raise IncompatibleModelsException(
            "initial distributions differ; the bound covers kernel changes "
            "only"
        )
    required = (first.n_states * first.n_observations) ** (k + 1)
    if required > budget:
        raise BudgetExceededException(
            f"trajectory enumeration to k={k} is too large",
            required=required,
            budget=budget,
        )
    bound = k * kernel_tv_sup(first, second)
    masses_first = _trajectory_masses(first, policy, k)
    masses_second = _trajectory_masses(second, policy, k)
    exact = float(
        sum(
            np.abs(masses_first[h] - masses_second[h]).sum()
            for h in masses_first
        )
    )
    return exact, bound, exact <= bound + 1e-10


def enumerate_history_policies(
    n_actions: int, n_observations: int, depth: int
) -> Iterator[HistoryPolicy]:
    """Yields every deterministic history policy of the given depth."""
    histories = list(iterate_histories(n_observations, depth))
    for choice in itertools.product(range(n_actions), repeat=len(histories)):
        yield HistoryPolicy(
            dict(zip(histories, choice)), depth, n_observations
        )


class _GapTree:
    """Exact extremes of the truncated cost difference over all history
    policies, by maximizing node by node: given its parent's actions, a
    subtree's contribution depends only on its own actions."""

    def __init__(self, first: TabularPOMDP, second: TabularPOMDP, horizon):
        self.first = first
        self.second = second
        self.horizon = horizon

    def extremes(self, t, alpha_first, alpha_second) -> Tuple[float, float]:
        """(max, min) of the discounted cost difference from time t, given
        the joint state masses before y_t under each model."""
        if t > self.horizon:
            return 0.0, 0.0
        high = low = 0.0
        weight = self.first.discount ** t
        for y in range(self.first.n_observations):
            observed_first = alpha_first * self.first.channel[:, y]
            observed_second = alpha_second * self.second.channel[:, y]
            if not (observed_first.any() or observed_second.any()):
                continue
            best_high, best_low = -math.inf, math.inf
            for u in range(self.first.n_actions):
                stage = weight * (
                    observed_first @ self.first.cost[:, u]
                    - observed_second @ self.second.cost[:, u]
                )
                child_high, child_low = self.extremes(
                    t + 1,
                    observed_first @ self.first.kernel[:, u, :],
                    observed_second @ self.second.kernel[:, u, :],
                )
                best_high = max(best_high, stage + child_high)
                best_low = min(best_low, stage + child_low)
            high += best_high
            low += best_low
        return high, low


def policy_sup_gap(
    first: TabularPOMDP,
    second: TabularPOMDP,
    horizon: int,
    budget: int = DEFAULT_POLICY_BUDGET,
) -> float:
    """Returns the exact maximum, over all deterministic history policies
    deciding at times 0..horizon, of the absolute difference of their
    truncated costs under the two models.

    :raises BudgetExceededException: if the number of such policies exceeds
        budget.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if (
        first.n_states != second.n_states
        or first.n_actions != second.n_actions
        or first.n_observations != second.n_observations
    ):
        raise IncompatibleModelsException(
            "state, action or observation spaces differ"
        )
    nodes = history_count(first.n_observations, horizon + 1)
    log_policies = nodes * math.log(first.n_actions)
    if log_policies > math.log(budget):
        raise BudgetExceededException(
            f"too many depth-{horizon + 1} history policies",
            required=math.exp(min(log_policies, 700.0)),
            budget=budget,
        )
    high, low = _GapTree(first, second, horizon).extremes(
        0, first.initial, second.initial
    )
    return max(high, -low, 0.0)


def policy_sup_gap_bruteforce(
    first: TabularPOMDP,
    second: TabularPOMDP,
    horizon: int,
    budget: int = DEFAULT_POLICY_BUDGET,
) -> float:
    """policy_sup_gap by evaluating every policy separately."""
    nodes = history_count(first.n_observations, horizon + 1)
    if first.n_actions ** nodes > budget:
        raise BudgetExceededException(
            f"too many depth-{horizon + 1} history policies",
            required=first.n_actions ** nodes,
            budget=budget,
        )
    return max(
        abs(
            truncated_history_cost(first, policy, horizon)
            - truncated_history_cost(second, policy, horizon)
        )
        for policy in enumerate_history_policies(
            first.n_actions, first.n_observations, horizon + 1
        )
    )


def sup_gap_tail(m: Model, horizon: int) -> float:
    """Tail bound of the truncated costs used by policy_sup_gap."""
    return tail_bound(m.cost_sup, m.discount, horizon)
