# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Controlled transition kernels: finite tabular models, region-structured
continuous-state models and additive-noise models, together with validation
and kernel-level distances."""

import math
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from . import util
from .exceptions import IncompatibleModelsException, InvalidModelException
from .measures import (
    TOLERANCE,
    Interval,
    Measure1D,
    PiecewisePolynomial,
    _snap,
    pushforward_affine,
    tv_distance,
    w1_distance,
)

SCHEMA_VERSION = 1
CHANNEL_TAGS = ("full", "uninformative")
DEFECT_THRESHOLD = 1e-6


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.flags.writeable = False
    return array


class Diagnostic:
    """One violated model invariant.

    :param code: Short violation category, e.g. "stochasticity".
    :param message: Human-readable description.
    :param where: Indices locating the violation, e.g. (state, action).
    """

    def __init__(self, code: str, message: str, where: Tuple = ()):
        self.code = code
        self.message = message
        self.where = tuple(where)

    def __str__(self):
        if self.where:
            return f"{self.code} at {self.where}: {self.message}"
        return f"{self.code}: {self.message}"

    def __repr__(self):
        return f"Diagnostic({self})"


class TabularMDP:
    """A finite controlled Markov model.

    The constructor checks only array shapes; use validate() or
    ensure_valid() to check the probabilistic invariants.

    :param kernel: Array of shape (S, A, S); kernel[x, u] is the distribution
        of the next state.
    :param cost: Array of shape (S, A) of stage costs.
    :param discount: Discount factor in (0, 1).
    :param initial: (Optional) initial distribution of shape (S,), uniform by
        default.
    :param state_labels: (Optional) real labels of the states, shape (S,) or
        (S, 2); defaults to 0..S-1.
    :param action_labels: (Optional) real labels of the actions; defaults to
        0..A-1.
    :param name: (Optional) identifier used in result records.
    :param metadata: (Optional) free-form dictionary, e.g. discretization
        defects.
    """

    def __init__(
        self,
        kernel,
        cost,
        discount: float,
        initial=None,
        state_labels=None,
        action_labels=None,
        name: str = "mdp",
        metadata: Optional[Dict[str, Any]] = None,
    ):
        kernel = np.asarray(kernel, dtype=float)
        if kernel.ndim != 3 or kernel.shape[0] != kernel.shape[2]:
            raise ValueError(
                f"kernel must have shape (S, A, S), got {kernel.shape}"
            )
        n_states, n_actions = kernel.shape[:2]
        if n_states == 0 or n_actions == 0:
            raise ValueError("model needs at least one state and one action")
        cost = np.asarray(cost, dtype=float)
        if cost.shape != (n_states, n_actions):
            raise ValueError(
                f"cost must have shape {(n_states, n_actions)}, got "
                f"{cost.shape}"
            )
        if initial is None:
            initial = np.full(n_states, 1.0 / n_states)
        initial = np.asarray(initial, dtype=float)
        if initial.shape != (n_states,):
            raise ValueError(f"initial must have shape ({n_states},)")
        if state_labels is None:
            state_labels = np.arange(n_states, dtype=float)
        labels = np.asarray(state_labels, dtype=float)
        if labels.ndim == 1:
            labels = labels[:, None]
        if labels.shape[0] != n_states or labels.shape[1] not in (1, 2):
            raise ValueError("state labels must be reals or 2-vectors")
        if action_labels is None:
            action_labels = np.arange(n_actions, dtype=float)
        actions = np.asarray(action_labels, dtype=float)
        if actions.shape != (n_actions,):
            raise ValueError(f"expected {n_actions} action labels")

        self._kernel = _frozen(kernel)
        self._cost = _frozen(cost)
        self._discount = float(discount)
        self._initial = _frozen(initial)
        self._state_labels = _frozen(labels)
        self._action_labels = _frozen(actions)
        self._name = name
        self._metadata = dict(metadata or {})

    @property
    def kernel(self) -> np.ndarray:
        return self._kernel

    @property
    def cost(self) -> np.ndarray:
        return self._cost

    @property
    def discount(self) -> float:
        return self._discount

    @property
    def initial(self) -> np.ndarray:
        return self._initial

    @property
    def state_labels(self) -> np.ndarray:
        return self._state_labels

    @property
    def action_labels(self) -> np.ndarray:
        return self._action_labels

    @property
    def n_states(self) -> int:
        return self._kernel.shape[0]

    @property
    def n_actions(self) -> int:
        return self._kernel.shape[1]

    @property
    def name(self) -> str:
        return self._name

    @property
    def metadata(self) -> Dict[str, Any]:
        return dict(self._metadata)

    @property
    def cost_sup(self) -> float:
        return float(np.abs(self._cost).max())

    def with_kernel(self, kernel, name: Optional[str] = None) -> "TabularMDP":
        """Returns a copy of this model with the transition kernel
        replaced."""
        return TabularMDP(
            kernel,
            self._cost,
            self._discount,
            self._initial,
            self._state_labels,
            self._action_labels,
            name=name or self._name,
        )

    def with_discount(self, discount: float) -> "TabularMDP":
        return TabularMDP(
            self._kernel,
            self._cost,
            discount,
            self._initial,
            self._state_labels,
            self._action_labels,
            name=self._name,
            metadata=self._metadata,
        )

    def __str__(self):
        return (
            f"TabularMDP(name={self._name}, states={self.n_states}, "
            f"actions={self.n_actions}, discount={self._discount})"
        )


class TabularPOMDP:
    """A TabularMDP observed through a finite channel.

    :param mdp: The underlying state model.
    :param channel: (Optional) array of shape (S, Y); channel[x] is the
        observation distribution in state x.
    :param uninformative: If True, the observation space collapses to a
        single symbol and channel must be omitted.
    :param name: (Optional) identifier, defaults to the MDP's name.
    """

    def __init__(
        self,
        mdp: TabularMDP,
        channel=None,
        uninformative: bool = False,
        name: Optional[str] = None,
    ):
        if uninformative:
            if channel is not None:
                raise ValueError(
                    "an uninformative POMDP takes no channel matrix"
                )
            channel = np.ones((mdp.n_states, 1))
        elif channel is None:
            raise ValueError("channel is required unless uninformative")
        channel = np.asarray(channel, dtype=float)
        if channel.ndim != 2 or channel.shape[0] != mdp.n_states:
            raise ValueError(
                f"channel must have shape ({mdp.n_states}, Y), got "
                f"{channel.shape}"
            )
        self._mdp = mdp
        self._channel = _frozen(channel)
        self._uninformative = uninformative
        self._name = name or mdp.name

    @property
    def mdp(self) -> TabularMDP:
        return self._mdp

    @property
    def channel(self) -> np.ndarray:
        return self._channel

    @property
    def state_labels(self) -> np.ndarray:
        return self._mdp.state_labels

    @property
    def uninformative(self) -> bool:
        return self._uninformative

    @property
    def kernel(self) -> np.ndarray:
        return self._mdp.kernel

    @property
    def cost(self) -> np.ndarray:
        return self._mdp.cost

    @property
    def discount(self) -> float:
        return self._mdp.discount

    @property
    def initial(self) -> np.ndarray:
        return self._mdp.initial

    @property
    def n_states(self) -> int:
        return self._mdp.n_states

    @property
    def n_actions(self) -> int:
        return self._mdp.n_actions

    @property
    def n_observations(self) -> int:
        return self._channel.shape[1]

    @property
    def cost_sup(self) -> float:
        return self._mdp.cost_sup

    @property
    def name(self) -> str:
        return self._name

    def with_kernel(
        self, kernel, name: Optional[str] = None
    ) -> "TabularPOMDP":
        mdp = self._mdp.with_kernel(kernel, name=name)
        if self._uninformative:
            return TabularPOMDP(mdp, uninformative=True, name=name)
        return TabularPOMDP(mdp, self._channel, name=name or self._name)

    def __str__(self):
        return (
            f"TabularPOMDP(name={self._name}, states={self.n_states}, "
            f"actions={self.n_actions}, observations="
            f"{self.n_observations})"
        )


KernelKey = Tuple[int, int]


class RegionModel:
    """A continuous-state model on a bounded interval whose kernel depends
    on the state only through a finite partition into regions.

    :param regions: Disjoint intervals (points are closed degenerate
        intervals) covering the state interval.
    :param actions: Finite list of action values.
    :param kernel_table: Mapping (region index, action index) -> Measure1D.
    :param cost: One PiecewisePolynomial in x per action.
    :param discount: Discount factor in (0, 1).
    :param initial: Initial state distribution.
    :param state_interval: (Optional) (lo, hi); defaults to the hull of the
        regions.
    :param channel_tag: "full" or "uninformative".
    :param assumption_profile: (Optional) declared status of the standing
        continuity assumptions, e.g. {"a": "violated"}; documentation only.
    :param action_range: (Optional) (lo, hi) of the continuous action set
        the finite actions are drawn from; metadata only.
    :param name: (Optional) identifier used in result records.
    """

    def __init__(
        self,
        regions: Sequence[Interval],
        actions: Sequence[float],
        kernel_table: Mapping[KernelKey, Measure1D],
        cost: Sequence[PiecewisePolynomial],
        discount: float,
        initial: Measure1D,
        state_interval: Optional[Tuple[float, float]] = None,
        channel_tag: str = "full",
        assumption_profile: Optional[Dict[str, Any]] = None,
        action_range: Optional[Tuple[float, float]] = None,
        name: str = "region",
    ):
        if len(regions) == 0:
            raise ValueError("at least one region is required")
        if len(actions) == 0:
            raise ValueError("at least one action is required")
        self._regions = tuple(regions)
        self._actions = _frozen(actions)
        self._kernel_table = {
            (int(r), int(a)): m for (r, a), m in kernel_table.items()
        }
        self._cost = tuple(cost)
        self._discount = float(discount)
        self._initial = initial
        if state_interval is None:
            state_interval = (
                min(r.a for r in regions),
                max(r.b for r in regions),
            )
        self._state_interval = (
            float(state_interval[0]),
            float(state_interval[1]),
        )
        self._channel_tag = channel_tag
        self._assumption_profile = dict(assumption_profile or {})
        self._action_range = (
            None
            if action_range is None
            else (float(action_range[0]), float(action_range[1]))
        )
        self._name = name

    @property
    def regions(self) -> Tuple[Interval, ...]:
        return self._regions

    @property
    def actions(self) -> np.ndarray:
        return self._actions

    @property
    def n_actions(self) -> int:
        return self._actions.size

    @property
    def kernel_table(self) -> Dict[KernelKey, Measure1D]:
        return dict(self._kernel_table)

    @property
    def cost(self) -> Tuple[PiecewisePolynomial, ...]:
        return self._cost

    @property
    def discount(self) -> float:
        return self._discount

    @property
    def initial(self) -> Measure1D:
        return self._initial

    @property
    def state_interval(self) -> Tuple[float, float]:
        return self._state_interval

    @property
    def channel_tag(self) -> str:
        return self._channel_tag

    @property
    def assumption_profile(self) -> Dict[str, Any]:
        return dict(self._assumption_profile)

    @property
    def action_range(self) -> Optional[Tuple[float, float]]:
        return self._action_range

    @property
    def name(self) -> str:
        return self._name

    @property
    def cost_sup(self) -> float:
        return max(c.sup_abs() for c in self._cost)

    def kernel(self, region: int, action: int) -> Measure1D:
        return self._kernel_table[(region, action)]

    def locate(self, x: float) -> Optional[int]:
        """Returns the index of the region containing x, or None."""
        for index, region in enumerate(self._regions):
            if region.contains(x):
                return index
        return None

    def with_discount(self, discount: float) -> "RegionModel":
        return RegionModel(
            self._regions,
            self._actions,
            self._kernel_table,
            self._cost,
            discount,
            self._initial,
            self._state_interval,
            self._channel_tag,
            self._assumption_profile,
            self._action_range,
            self._name,
        )

    def __str__(self):
        return (
            f"RegionModel(name={self._name}, regions={len(self._regions)}, "
            f"actions={self._actions.tolist()}, discount={self._discount})"
        )


class KernelTable:
    """A kernel given on a finite grid of state points: (state index,
    action index) -> Measure1D.

    :param states: State points.
    :param actions: Action values.
    :param cells: Mapping (state index, action index) -> Measure1D.
    :param state_interval: (Optional) interval containing every cell's
        support.
    """

    def __init__(
        self,
        states: Sequence[float],
        actions: Sequence[float],
        cells: Mapping[KernelKey, Measure1D],
        state_interval: Optional[Tuple[float, float]] = None,
    ):
        self._states = _frozen(states)
        self._actions = _frozen(actions)
        self._cells = {(int(i), int(j)): m for (i, j), m in cells.items()}
        self._state_interval = state_interval

    @property
    def states(self) -> np.ndarray:
        return self._states

    @property
    def actions(self) -> np.ndarray:
        return self._actions

    @property
    def state_interval(self) -> Optional[Tuple[float, float]]:
        return self._state_interval

    def cell(self, state: int, action: int) -> Measure1D:
        return self._cells[(state, action)]

    def keys(self) -> List[KernelKey]:
        return sorted(self._cells)


class AdditiveNoiseModel:
    """The model x' = f(x, u) + w with w drawn from a fixed noise measure.

    :param drift: One PiecewisePolynomial f(., u) per action.
    :param noise: Noise distribution.
    :param actions: Action values, one per drift entry.
    :param state_interval: (lo, hi) bounded state interval.
    :param cost: (Optional) one PiecewisePolynomial per action; zero by
        default.
    :param discount: Discount factor used when the model is discretized.
    :param initial: (Optional) initial distribution; uniform on the state
        interval by default.
    :param state_grid: (Optional) state points for pushforward kernels;
        11 equally spaced points by default.
    :param name: (Optional) identifier.
    """

    def __init__(
        self,
        drift: Sequence[PiecewisePolynomial],
        noise: Measure1D,
        actions: Sequence[float],
        state_interval: Tuple[float, float],
        cost: Optional[Sequence[PiecewisePolynomial]] = None,
        discount: float = 0.9,
        initial: Optional[Measure1D] = None,
        state_grid: Optional[Sequence[float]] = None,
        name: str = "additive",
    ):
        lo, hi = float(state_interval[0]), float(state_interval[1])
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValueError(
                f"state interval [{lo}, {hi}] must be bounded and nonempty"
            )
        if len(drift) != len(actions):
            raise ValueError("drift needs one function per action")
        if cost is None:
            cost = [PiecewisePolynomial.constant(0.0, lo, hi)] * len(actions)
        if state_grid is None:
            state_grid = np.linspace(lo, hi, 11)
        self._drift = tuple(drift)
        self._noise = noise
        self._actions = _frozen(actions)
        self._state_interval = (lo, hi)
        self._cost = tuple(cost)
        self._discount = float(discount)
        self._initial = initial or Measure1D.uniform(lo, hi)
        self._state_grid = _frozen(state_grid)
        self._name = name

    @property
    def drift(self) -> Tuple[PiecewisePolynomial, ...]:
        return self._drift

    @property
    def noise(self) -> Measure1D:
        return self._noise

    @property
    def actions(self) -> np.ndarray:
        return self._actions

    @property
    def n_actions(self) -> int:
        return self._actions.size

    @property
    def state_interval(self) -> Tuple[float, float]:
        return self._state_interval

    @property
    def cost(self) -> Tuple[PiecewisePolynomial, ...]:
        return self._cost

    @property
    def discount(self) -> float:
        return self._discount

    @property
    def initial(self) -> Measure1D:
        return self._initial

    @property
    def state_grid(self) -> np.ndarray:
        return self._state_grid

    @property
    def name(self) -> str:
        return self._name

    def drift_at(self, x, action: int):
        return self._drift[action](x)

    def with_noise(
        self, noise: Measure1D, name: Optional[str] = None
    ) -> "AdditiveNoiseModel":
        """Returns a copy of this model driven by another noise measure."""
        return AdditiveNoiseModel(
            self._drift,
            noise,
            self._actions,
            self._state_interval,
            self._cost,
            self._discount,
            self._initial,
            self._state_grid,
            name or self._name,
        )

    def __str__(self):
        return (
            f"AdditiveNoiseModel(name={self._name}, actions="
            f"{self._actions.tolist()}, interval={self._state_interval})"
        )


Model = Union[
    TabularMDP, TabularPOMDP, RegionModel, AdditiveNoiseModel, KernelTable
]


def partition_grid(
    state_interval: Tuple[float, float],
    *interval_lists: Sequence[Interval],
    extra: Sequence[float] = (),
) -> np.ndarray:
    """Returns the sorted endpoints of all given intervals and extra points
    inside the state interval, including both ends of the state interval.

    The grid splits the state interval into elementary cells: every grid
    point, and every open gap between consecutive grid points. Each interval
    of every list is a union of elementary cells.
    """
    lo, hi = state_interval
    values = [lo, hi] + list(extra)
    for intervals in interval_lists:
        for interval in intervals:
            values += [interval.a, interval.b]
    grid = _snap(np.asarray(values, dtype=float))
    return grid[(grid >= lo - TOLERANCE) & (grid <= hi + TOLERANCE)]


def locate_cells(
    grid: np.ndarray, regions: Sequence[Interval]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Assigns each elementary cell of grid to the region containing it.

    :return: tuple (point_owner, point_count, gap_owner, gap_count); owners
        are the index of the first containing region or -1, counts are the
        number of containing regions.
    """
    midpoints = 0.5 * (grid[:-1] + grid[1:])
    point_owner = np.full(grid.size, -1)
    gap_owner = np.full(midpoints.size, -1)
    point_count = np.zeros(grid.size, dtype=int)
    gap_count = np.zeros(midpoints.size, dtype=int)
    for index, region in enumerate(regions):
        at_points = region.contains_array(grid)
        at_gaps = region.contains_array(midpoints)
        point_owner[at_points & (point_owner < 0)] = index
        gap_owner[at_gaps & (gap_owner < 0)] = index
        point_count += at_points
        gap_count += at_gaps
    return point_owner, point_count, gap_owner, gap_count


def _check_discount(discount: float, diagnostics: List[Diagnostic]):
    if not 0.0 < discount < 1.0:
        diagnostics.append(
            Diagnostic("discount", f"discount {discount} not in (0, 1)")
        )


def _check_measure(
    measure: Measure1D,
    interval: Optional[Tuple[float, float]],
    code: str,
    where: Tuple,
    diagnostics: List[Diagnostic],
):
    mass = measure.total_mass
    if abs(mass - 1.0) > TOLERANCE:
        diagnostics.append(
            Diagnostic(code, f"total mass {mass:.17g} is not 1", where)
        )
    support = measure.support()
    if interval is not None and support is not None:
        if (
            support[0] < interval[0] - TOLERANCE
            or support[1] > interval[1] + TOLERANCE
        ):
            diagnostics.append(
                Diagnostic(
                    "support",
                    f"support [{support[0]}, {support[1]}] leaves the state "
                    f"interval [{interval[0]}, {interval[1]}]",
                    where,
                )
            )


def _check_costs(
    costs: Sequence[PiecewisePolynomial],
    n_actions: int,
    interval: Tuple[float, float],
    diagnostics: List[Diagnostic],
):
    if len(costs) != n_actions:
        diagnostics.append(
            Diagnostic(
                "cost",
                f"{len(costs)} cost functions for {n_actions} actions",
            )
        )
        return
    for action, cost in enumerate(costs):
        if not cost.covers(*interval):
            diagnostics.append(
                Diagnostic(
                    "cost",
                    f"cost domain {cost.domain} does not cover the state "
                    f"interval",
                    (action,),
                )
            )
            continue
        low, _ = cost.bounds()
        if low < -TOLERANCE:
            diagnostics.append(
                Diagnostic("cost", f"cost reaches {low:.17g} < 0", (action,))
            )


def _validate_tabular(m: TabularMDP) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []
    kernel = m.kernel
    if not np.all(np.isfinite(kernel)):
        diagnostics.append(Diagnostic("kernel", "non-finite entries"))
        return diagnostics
    for x, u in zip(*np.nonzero((kernel < -TOLERANCE).any(axis=2))):
        diagnostics.append(
            Diagnostic(
                "negative-probability",
                "kernel row has negative entries",
                (int(x), int(u)),
            )
        )
    sums = kernel.sum(axis=2)
    for x, u in zip(*np.nonzero(np.abs(sums - 1.0) > TOLERANCE)):
        diagnostics.append(
            Diagnostic(
                "stochasticity",
                f"kernel row sums to {sums[x, u]:.17g}",
                (int(x), int(u)),
            )
        )
    cost = m.cost
    if not np.all(np.isfinite(cost)):
        diagnostics.append(Diagnostic("cost", "non-finite stage costs"))
    for x, u in zip(*np.nonzero(cost < 0)):
        diagnostics.append(
            Diagnostic("cost", "negative stage cost", (int(x), int(u)))
        )
    _check_discount(m.discount, diagnostics)
    initial = m.initial
    if np.any(initial < -TOLERANCE) or abs(initial.sum() - 1.0) > TOLERANCE:
        diagnostics.append(
            Diagnostic(
                "initial",
                f"initial distribution sums to {initial.sum():.17g} or has "
                f"negative entries",
            )
        )
    return diagnostics


def _validate_pomdp(m: TabularPOMDP) -> List[Diagnostic]:
    diagnostics = _validate_tabular(m.mdp)
    channel = m.channel
    sums = channel.sum(axis=1)
    for x in np.nonzero(
        (np.abs(sums - 1.0) > TOLERANCE) | (channel < -TOLERANCE).any(axis=1)
    )[0]:
        diagnostics.append(
            Diagnostic(
                "channel",
                f"channel row sums to {sums[x]:.17g} or has negative "
                f"entries",
                (int(x),),
            )
        )
    return diagnostics


def _validate_region(m: RegionModel) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []
    lo, hi = m.state_interval
    if not hi > lo:
        diagnostics.append(
            Diagnostic("partition", f"empty state interval [{lo}, {hi}]")
        )
        return diagnostics
    for index, region in enumerate(m.regions):
        if region.a < lo - TOLERANCE or region.b > hi + TOLERANCE:
            diagnostics.append(
                Diagnostic(
                    "partition",
                    f"region {region} leaves the state interval",
                    (index,),
                )
            )
    grid = partition_grid(m.state_interval, m.regions)
    point_owner, point_count, gap_owner, gap_count = locate_cells(
        grid, m.regions
    )
    for x, count in zip(grid, point_count):
        if count != 1:
            diagnostics.append(
                Diagnostic(
                    "partition",
                    f"state {x:.17g} lies in {count} regions",
                )
            )
    for a, b, count in zip(grid[:-1], grid[1:], gap_count):
        if count != 1:
            diagnostics.append(
                Diagnostic(
                    "partition",
                    f"states in ({a:.17g}, {b:.17g}) lie in {count} regions",
                )
            )

    if not np.all(np.isfinite(m.actions)):
        diagnostics.append(Diagnostic("actions", "non-finite action values"))
    if m.action_range is not None:
        a_lo, a_hi = m.action_range
        if a_lo > a_hi or np.any(
            (m.actions < a_lo - TOLERANCE) | (m.actions > a_hi + TOLERANCE)
        ):
            diagnostics.append(
                Diagnostic(
                    "actions",
                    f"actions {m.actions.tolist()} leave the action range "
                    f"{m.action_range}",
                )
            )

    expected = {
        (r, a) for r in range(len(m.regions)) for a in range(m.n_actions)
    }
    table = m.kernel_table
    for key in sorted(expected - set(table)):
        diagnostics.append(
            Diagnostic("kernel-missing", "no kernel entry", key)
        )
    for key in sorted(set(table) - expected):
        diagnostics.append(
            Diagnostic("kernel-index", "entry for unknown region/action", key)
        )
    for key in sorted(expected & set(table)):
        _check_measure(
            table[key], m.state_interval, "stochasticity", key, diagnostics
        )

    _check_costs(m.cost, m.n_actions, m.state_interval, diagnostics)
    _check_discount(m.discount, diagnostics)
    _check_measure(m.initial, m.state_interval, "initial", (), diagnostics)
    if m.channel_tag not in CHANNEL_TAGS:
        diagnostics.append(
            Diagnostic(
                "channel",
                f"channel tag {m.channel_tag!r} not in {CHANNEL_TAGS}",
            )
        )
    return diagnostics


def _validate_additive(m: AdditiveNoiseModel) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []
    _check_measure(m.noise, None, "noise", (), diagnostics)
    lo, hi = m.state_interval
    for action, drift in enumerate(m.drift):
        if not drift.covers(lo, hi):
            diagnostics.append(
                Diagnostic(
                    "drift-range",
                    f"drift domain {drift.domain} does not cover the state "
                    f"interval",
                    (action,),
                )
            )
            continue
        low, high = drift.bounds()
        if low < lo - TOLERANCE or high > hi + TOLERANCE:
            diagnostics.append(
                Diagnostic(
                    "drift-range",
                    f"drift range [{low:.17g}, {high:.17g}] leaves the "
                    f"state interval [{lo}, {hi}]",
                    (action,),
                )
            )
    _check_costs(m.cost, m.n_actions, m.state_interval, diagnostics)
    _check_discount(m.discount, diagnostics)
    _check_measure(m.initial, m.state_interval, "initial", (), diagnostics)
    if np.any((m.state_grid < lo) | (m.state_grid > hi)):
        diagnostics.append(
            Diagnostic("state-grid", "state grid leaves the state interval")
        )
    return diagnostics


def _validate_kernel_table(m: KernelTable) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []
    for i in range(m.states.size):
        for j in range(m.actions.size):
            try:
                cell = m.cell(i, j)
            except KeyError:
                diagnostics.append(
                    Diagnostic("kernel-missing", "no kernel entry", (i, j))
                )
                continue
            _check_measure(
                cell, m.state_interval, "stochasticity", (i, j), diagnostics
            )
    return diagnostics


_VALIDATORS: Dict[type, Callable[[Any], List[Diagnostic]]] = {
    TabularMDP: _validate_tabular,
    TabularPOMDP: _validate_pomdp,
    RegionModel: _validate_region,
    AdditiveNoiseModel: _validate_additive,
    KernelTable: _validate_kernel_table,
}


def validate(model: Model) -> List[Diagnostic]:
    """Checks the invariants of a model.

    :return: list of violations; an empty list means the model is valid.
    """
    try:
        validator = _VALIDATORS[type(model)]
    except KeyError:
        raise TypeError(f"cannot validate {type(model).__name__}")
    return validator(model)


def ensure_valid(model: Model):
    """Returns the model unchanged, or raises InvalidModelException listing
    every violation."""
    diagnostics = validate(model)
    if diagnostics:
        raise InvalidModelException(
            f"model {getattr(model, 'name', '')!r} is invalid", diagnostics
        )
    return model


def _tabular_w1_rows(first: np.ndarray, second: np.ndarray, labels):
    order = np.argsort(labels, kind="stable")
    gaps = np.diff(labels[order])
    cdf_gap = np.cumsum(first[..., order] - second[..., order], axis=-1)
    return (np.abs(cdf_gap[..., :-1]) * gaps).sum(axis=-1)


def _tabular_sup(first, second, metric: str) -> float:
    if first.kernel.shape != second.kernel.shape:
        raise IncompatibleModelsException(
            f"kernel shapes differ: {first.kernel.shape} vs "
            f"{second.kernel.shape}"
        )
    if metric == "tv":
        return float(np.abs(first.kernel - second.kernel).sum(axis=2).max())
    labels = first.state_labels
    other = second.state_labels
    if labels.shape[1] != 1:
        raise ValueError("W1 needs one-dimensional state labels")
    if not np.array_equal(labels, other):
        raise IncompatibleModelsException("state labels differ")
    rows = _tabular_w1_rows(first.kernel, second.kernel, labels[:, 0])
    return float(rows.max())


def _check_actions(first: np.ndarray, second: np.ndarray):
    if first.shape != second.shape or not np.allclose(
        first, second, rtol=0.0, atol=TOLERANCE
    ):
        raise IncompatibleModelsException(
            f"action sets differ: {first.tolist()} vs {second.tolist()}"
        )


def region_pairs(first: RegionModel, second: RegionModel) -> List[KernelKey]:
    """Returns the (first region, second region) pairs that meet on the
    common refinement of both partitions."""
    if any(
        abs(s - t) > TOLERANCE
        for s, t in zip(first.state_interval, second.state_interval)
    ):
        raise IncompatibleModelsException(
            f"state intervals differ: {first.state_interval} vs "
            f"{second.state_interval}"
        )
    grid = partition_grid(first.state_interval, first.regions, second.regions)
    first_points, _, first_gaps, _ = locate_cells(grid, first.regions)
    second_points, _, second_gaps, _ = locate_cells(grid, second.regions)
    owners = np.concatenate(
        (
            np.stack((first_points, second_points), axis=1),
            np.stack((first_gaps, second_gaps), axis=1),
        )
    )
    if np.any(owners < 0):
        raise IncompatibleModelsException(
            "partitions do not cover the state interval"
        )
    return sorted({(int(r), int(s)) for r, s in owners})


def _distance(metric: str, interval=None):
    if metric == "tv":
        return tv_distance
    return lambda mu, nu: w1_distance(mu, nu, interval)


def _kernel_sup(first: Model, second: Model, metric: str) -> float:
    tabular = (TabularMDP, TabularPOMDP)
    if isinstance(first, tabular) and isinstance(second, tabular):
        return _tabular_sup(first, second, metric)
    if isinstance(first, RegionModel) and isinstance(second, RegionModel):
        _check_actions(first.actions, second.actions)
        distance = _distance(metric, first.state_interval)
        best = 0.0
        for r, s in region_pairs(first, second):
            for a in range(first.n_actions):
                best = max(
                    best, distance(first.kernel(r, a), second.kernel(s, a))
                )
        return best
    if isinstance(first, KernelTable) and isinstance(second, KernelTable):
        _check_actions(first.actions, second.actions)
        if first.states.shape != second.states.shape or not np.allclose(
            first.states, second.states, rtol=0.0, atol=TOLERANCE
        ):
            raise IncompatibleModelsException("state grids differ")
        if first.keys() != second.keys():
            raise IncompatibleModelsException("kernel tables differ in cells")
        distance = _distance(metric)
        return max(
            distance(first.cell(*key), second.cell(*key))
            for key in first.keys()
        )
    raise IncompatibleModelsException(
        f"cannot compare {type(first).__name__} with "
        f"{type(second).__name__}"
    )


def kernel_tv_sup(first: Model, second: Model) -> float:
    """Returns the exact maximum, over all cells of the shared state/action
    structure, of the total variation distance between kernel rows."""
    return _kernel_sup(first, second, "tv")


def kernel_w1_sup(first: Model, second: Model) -> float:
    """Returns the exact maximum, over all cells of the shared state/action
    structure, of the Wasserstein-1 distance between kernel rows."""
    return _kernel_sup(first, second, "w1")


def as_pomdp(m: TabularMDP) -> TabularPOMDP:
    """Returns m observed through the identity channel."""
    return TabularPOMDP(m, np.eye(m.n_states), name=m.name)


def discretize(m: AdditiveNoiseModel, n_bins: int) -> TabularMDP:
    """Returns the tabular model on n_bins equal-width bins of the state
    interval. Bin midpoints are the states; a kernel row is the mass the
    shifted noise puts on each bin, renormalized. The largest mass lost to
    renormalization is stored in metadata["renormalization_defect"].
    """
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    lo, hi = m.state_interval
    edges = np.linspace(lo, hi, n_bins + 1)
    midpoints = 0.5 * (edges[:-1] + edges[1:])
    bins = [
        Interval(edges[j], edges[j + 1], True, j == n_bins - 1)
        for j in range(n_bins)
    ]
    kernel = np.zeros((n_bins, m.n_actions, n_bins))
    cost = np.zeros((n_bins, m.n_actions))
    for u in range(m.n_actions):
        shifts = np.atleast_1d(m.drift_at(midpoints, u))
        cost[:, u] = m.cost[u](midpoints)
        for i, shift in enumerate(shifts):
            moved = pushforward_affine(m.noise, 1.0, float(shift))
            kernel[i, u] = [moved.mass_of(b) for b in bins]
    captured = kernel.sum(axis=2)
    if np.any(captured <= DEFECT_THRESHOLD):
        x, u = np.argwhere(captured <= DEFECT_THRESHOLD)[0]
        raise InvalidModelException(
            "discretization leaves a kernel row without mass",
            [
                Diagnostic(
                    "stochasticity",
                    f"row captures mass {captured[x, u]:.17g}",
                    (int(x), int(u)),
                )
            ],
        )
    defect = float((1.0 - captured).max())
    kernel /= captured[:, :, None]
    initial = np.array([m.initial.mass_of(b) for b in bins])
    initial /= initial.sum()
    util.log_debug(
        "Discretized additive-noise model",
        model=m.name,
        bins=n_bins,
        defect=defect,
    )
    return TabularMDP(
        kernel,
        cost,
        m.discount,
        initial,
        state_labels=midpoints,
        action_labels=m.actions,
        name=f"{m.name}/bins={n_bins}",
        metadata={"renormalization_defect": defect},
    )


def random_stochastic(
    rng: np.random.Generator, shape: Tuple[int, ...], concentration=1.0
) -> np.ndarray:
    """Returns an array of the given shape whose last-axis rows are drawn
    from a symmetric Dirichlet distribution."""
    rows = rng.dirichlet(np.full(shape[-1], concentration), size=shape[:-1])
    return rows / rows.sum(axis=-1, keepdims=True)


def random_tabular_mdp(
    rng: np.random.Generator,
    n_states: int,
    n_actions: int,
    discount: float = 0.9,
    cost_scale: float = 1.0,
    concentration: float = 1.0,
    name: str = "random",
) -> TabularMDP:
    """Returns a TabularMDP with Dirichlet kernel rows, uniform [0,
    cost_scale) costs and a Dirichlet initial distribution."""
    kernel = random_stochastic(
        rng, (n_states, n_actions, n_states), concentration
    )
    cost = rng.random((n_states, n_actions)) * cost_scale
    initial = random_stochastic(rng, (n_states,))
    return TabularMDP(kernel, cost, discount, initial, name=name)


def random_tabular_pomdp(
    rng: np.random.Generator,
    n_states: int,
    n_actions: int,
    n_observations: int,
    discount: float = 0.9,
    cost_scale: float = 1.0,
    name: str = "random",
) -> TabularPOMDP:
    mdp = random_tabular_mdp(
        rng, n_states, n_actions, discount, cost_scale, name=name
    )
    channel = random_stochastic(rng, (n_states, n_observations))
    return TabularPOMDP(mdp, channel, name=name)


def mix_kernels(m, other_kernel, eps: float, name: Optional[str] = None):
    """Returns m with kernel (1 - eps) * m.kernel + eps * other_kernel, so
    that kernel_tv_sup to m is at most 2 * eps."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    other = np.asarray(getattr(other_kernel, "kernel", other_kernel))
    if other.shape != m.kernel.shape:
        raise IncompatibleModelsException(
            f"kernel shapes differ: {m.kernel.shape} vs {other.shape}"
        )
    return m.with_kernel(
        (1.0 - eps) * m.kernel + eps * other,
        name=name or f"{m.name}~{eps:g}",
    )


def _region_to_json(m: RegionModel) -> dict:
    return {
        "regions": [r.to_json() for r in m.regions],
        "actions": m.actions.tolist(),
        "action_range": (
            None if m.action_range is None else list(m.action_range)
        ),
        "kernel_table": [
            {"region": r, "action": a, "measure": measure.to_text()}
            for (r, a), measure in sorted(m.kernel_table.items())
        ],
        "cost": [c.to_json() for c in m.cost],
        "discount": m.discount,
        "initial": m.initial.to_text(),
        "state_interval": list(m.state_interval),
        "channel_tag": m.channel_tag,
        "assumption_profile": m.assumption_profile,
    }


def _region_from_json(json) -> RegionModel:
    return RegionModel(
        regions=[Interval.from_json(r) for r in json["regions"]],
        actions=json["actions"],
        kernel_table={
            (e["region"], e["action"]): Measure1D.from_text(e["measure"])
            for e in json["kernel_table"]
        },
        cost=[PiecewisePolynomial.from_json(c) for c in json["cost"]],
        discount=json["discount"],
        initial=Measure1D.from_text(json["initial"]),
        state_interval=tuple(json["state_interval"]),
        channel_tag=json.get("channel_tag", "full"),
        assumption_profile=json.get("assumption_profile"),
        action_range=json.get("action_range"),
        name=json.get("name", "region"),
    )


def _mdp_to_json(m: TabularMDP) -> dict:
    return {
        "kernel": m.kernel.tolist(),
        "cost": m.cost.tolist(),
        "discount": m.discount,
        "initial": m.initial.tolist(),
        "state_labels": m.state_labels.tolist(),
        "action_labels": m.action_labels.tolist(),
    }


def _mdp_from_json(json) -> TabularMDP:
    return TabularMDP(
        json["kernel"],
        json["cost"],
        json["discount"],
        json["initial"],
        json["state_labels"],
        json["action_labels"],
        name=json.get("name", "mdp"),
    )


def _additive_to_json(m: AdditiveNoiseModel) -> dict:
    return {
        "drift": [d.to_json() for d in m.drift],
        "noise": m.noise.to_text(),
        "actions": m.actions.tolist(),
        "state_interval": list(m.state_interval),
        "cost": [c.to_json() for c in m.cost],
        "discount": m.discount,
        "initial": m.initial.to_text(),
        "state_grid": m.state_grid.tolist(),
    }


def _additive_from_json(json) -> AdditiveNoiseModel:
    return AdditiveNoiseModel(
        [PiecewisePolynomial.from_json(d) for d in json["drift"]],
        Measure1D.from_text(json["noise"]),
        json["actions"],
        tuple(json["state_interval"]),
        [PiecewisePolynomial.from_json(c) for c in json["cost"]],
        json["discount"],
        Measure1D.from_text(json["initial"]),
        json["state_grid"],
        name=json.get("name", "additive"),
    )


def model_to_json(model: Model) -> dict:
    """Returns a JSON-compatible dictionary describing the model. Measures
    are embedded in their text form."""
    if isinstance(model, TabularPOMDP):
        body = _mdp_to_json(model.mdp)
        body["kind"] = "tabular_pomdp"
        body["uninformative"] = model.uninformative
        if not model.uninformative:
            body["channel"] = model.channel.tolist()
    elif isinstance(model, TabularMDP):
        body = _mdp_to_json(model)
        body["kind"] = "tabular_mdp"
    elif isinstance(model, RegionModel):
        body = _region_to_json(model)
        body["kind"] = "region"
    elif isinstance(model, AdditiveNoiseModel):
        body = _additive_to_json(model)
        body["kind"] = "additive_noise"
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    body["name"] = model.name
    body["schema_version"] = SCHEMA_VERSION
    return body


def model_from_json(json) -> Model:
    """Parses a dictionary written by model_to_json()."""
    version = json.get("schema_version")
    if version is None:
        raise ValueError("model file has no schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported model schema_version {version}, expected "
            f"{SCHEMA_VERSION}"
        )
    kind = json.get("kind")
    if kind == "tabular_mdp":
        return _mdp_from_json(json)
    if kind == "tabular_pomdp":
        mdp = _mdp_from_json(json)
        if json.get("uninformative"):
            return TabularPOMDP(mdp, uninformative=True, name=mdp.name)
        return TabularPOMDP(mdp, json["channel"], name=mdp.name)
    if kind == "region":
        return _region_from_json(json)
    if kind == "additive_noise":
        return _additive_from_json(json)
    raise ValueError(f"unknown model kind {kind!r}")
