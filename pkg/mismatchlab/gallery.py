# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Region models in which optimal costs fail to be continuous or robust
under weak or setwise convergence of kernels, each with its known optimal
policies and closed-form costs, plus additive-noise model builders.

Closed forms come in two flavours: ``closed_form_published`` holds the values
as originally published, ``closed_form_exact`` the exact values for the
stated initial distribution. They differ where the published arithmetic
adds a stage-0 cost, drops a discount factor or misses a term; the exact
ones are what evaluate_region_policy reproduces.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .measures import (
    Interval,
    Measure1D,
    PiecewisePolynomial,
    square_wave_halves,
    square_wave_pair,
)
from .models import (
    AdditiveNoiseModel,
    RegionModel,
    ensure_valid,
    model_to_json,
)
from .robustness import MismatchRecord, mismatch_loss
from .solvers import OpenLoopPolicy, RegionPolicy, evaluate_region_policy

ClosedForm = Optional[Callable[[float, int], float]]
Policy = Union[RegionPolicy, OpenLoopPolicy]

VALUE_KEYS = ("design_optimal", "true_optimal", "cross")
CONVERGENCE_MODES = ("weak", "setwise", "tv")
SATISFIED = "satisfied"
VIOLATED = "violated"
NOT_APPLICABLE = "not-applicable"


class GalleryEntry:
    """A pair of region models (design kernel T_n, true kernel T) with
    known optimal policies and closed-form costs.

    Values are keyed by "design_optimal" (cost of the design policy under
    T_n), "true_optimal" (cost of the true policy under T) and "cross"
    (cost of the design policy under T). A missing published claim is None.
    """

    def __init__(
        self,
        name: str,
        n: int,
        design: RegionModel,
        true: RegionModel,
        design_policy: Policy,
        true_policy: Policy,
        closed_form_published: Dict[str, ClosedForm],
        closed_form_exact: Dict[str, ClosedForm],
        limit_gap: Callable[[float], float],
        convergence_mode: str,
        assumption_profile: Dict[str, str],
    ):
        if convergence_mode not in CONVERGENCE_MODES:
            raise ValueError(f"unknown convergence mode {convergence_mode}")
        self.name = name
        self.n = n
        self.design = ensure_valid(design)
        self.true = ensure_valid(true)
        self.design_policy = design_policy
        self.true_policy = true_policy
        self.closed_form_published = closed_form_published
        self.closed_form_exact = closed_form_exact
        self.limit_gap = limit_gap
        self.convergence_mode = convergence_mode
        self.assumption_profile = assumption_profile

    @property
    def discount(self) -> float:
        return self.true.discount

    def published_values(self) -> Dict[str, Optional[float]]:
        return _evaluate_forms(
            self.closed_form_published, self.discount, self.n
        )

    def exact_values(self) -> Dict[str, Optional[float]]:
        return _evaluate_forms(self.closed_form_exact, self.discount, self.n)

    def evaluate(self, tol: float) -> Dict[str, float]:
        """Computes the three values by exact distribution propagation."""
        return {
            "design_optimal": evaluate_region_policy(
                self.design, self.design_policy, tol
            ),
            "true_optimal": evaluate_region_policy(
                self.true, self.true_policy, tol
            ),
            "cross": evaluate_region_policy(
                self.true, self.design_policy, tol
            ),
        }

    def mismatch(self, tol: float) -> MismatchRecord:
        return mismatch_loss(
            self.true,
            self.design,
            tol,
            design_policy=self.design_policy,
            true_policy=self.true_policy,
            extra={"entry": self.name, "n": self.n},
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "discount": self.discount,
            "convergence_mode": self.convergence_mode,
            "assumption_profile": self.assumption_profile,
            "design": model_to_json(self.design),
            "true": model_to_json(self.true),
            "design_policy": self.design_policy.to_json(),
            "true_policy": self.true_policy.to_json(),
            "closed_form_published": self.published_values(),
            "closed_form_exact": self.exact_values(),
        }

    def __str__(self):
        return f"GalleryEntry({self.name}, n={self.n}, beta={self.discount})"


def _evaluate_forms(forms: Dict[str, ClosedForm], beta: float, n: int):
    return {
        key: (None if forms.get(key) is None else forms[key](beta, n))
        for key in VALUE_KEYS
    }


def _check_n(n: int, even: bool = False):
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if even and n % 2:
        raise ValueError(f"n must be even, got {n}")


def _quadratic_costs(
    actions: Sequence[float], lo: float, hi: float
) -> List[PiecewisePolynomial]:
    """(x - u)**2 for each action u."""
    return [
        PiecewisePolynomial.polynomial([u * u, -2.0 * u, 1.0], lo, hi)
        for u in actions
    ]


def _bouncing_regions() -> List[Interval]:
    return [Interval.point(-1.0), Interval.open(-1.0, 1.0), Interval.point(1)]


def _bouncing_model(
    n: Optional[int],
    actions: Sequence[float],
    discount: float,
    channel_tag: str,
    name: str,
    action_range: Optional[Tuple[float, float]] = None,
) -> RegionModel:
    """States in (-1, 1) jump to 0. From +1 or -1, the true kernel (n is
    None) jumps to +1 or -1 with equal odds, the design kernel to
    +(1 - 1/n) or -(1 - 1/n)."""
    edge = 1.0 if n is None else 1.0 - 1.0 / n
    bounce = Measure1D(atoms=[(-edge, 0.5), (edge, 0.5)])
    origin = Measure1D.dirac(0.0)
    table = {}
    for a in range(len(actions)):
        table[(0, a)] = bounce
        table[(1, a)] = origin
        table[(2, a)] = bounce
    return RegionModel(
        _bouncing_regions(),
        actions,
        table,
        _quadratic_costs(actions, -1.0, 1.0),
        discount,
        Measure1D.dirac(1.0),
        state_interval=(-1.0, 1.0),
        channel_tag=channel_tag,
        assumption_profile=(
            {
                "a": VIOLATED,
                "b": SATISFIED,
                "c": SATISFIED,
                "d": SATISFIED,
            }
            if channel_tag == "uninformative"
            else {
                "a": VIOLATED,
                "b": NOT_APPLICABLE,
                "c": SATISFIED,
                "d": SATISFIED,
            }
        ),
        action_range=action_range,
        name=name,
    )


def make_weak_pomdp(n: int, discount: float = 0.5) -> GalleryEntry:
    """Partially observed model on [-1, 1] with an uninformative channel,
    cost (x - u)**2 and initial state 1. The true kernel bounces between
    +1 and -1; the design kernel lands on +-(1 - 1/n) and is then absorbed
    at 0. The optimal control is open loop: u = 1 at t = 0, then u = 0.
    """
    _check_n(n)
    actions = [0.0, 1.0]
    design = _bouncing_model(
        n, actions, discount, "uninformative", f"weak_pomdp/T_{n}", (-1, 1)
    )
    true = _bouncing_model(
        None, actions, discount, "uninformative", "weak_pomdp/T", (-1, 1)
    )
    policy = OpenLoopPolicy([1], tail=0, name="u0=1,then 0")
    forms: Dict[str, ClosedForm] = {
        "design_optimal": lambda b, n: b * (1.0 - 1.0 / n) ** 2,
        "true_optimal": lambda b, n: b / (1.0 - b),
        "cross": lambda b, n: b / (1.0 - b),
    }
    return GalleryEntry(
        "weak_pomdp",
        n,
        design,
        true,
        policy,
        policy,
        closed_form_published=dict(forms),
        closed_form_exact=dict(forms),
        limit_gap=lambda b: b * b / (1.0 - b),
        convergence_mode="weak",
        assumption_profile=true.assumption_profile,
    )


def make_weak_fully(n: int, discount: float = 0.5) -> GalleryEntry:
    """Fully observed version of make_weak_pomdp with actions {-1, 1}. The
    optimal policy tracks the sign of the state."""
    _check_n(n)
    actions = [-1.0, 1.0]
    design = _bouncing_model(n, actions, discount, "full", f"weak_fully/T_{n}")
    true = _bouncing_model(None, actions, discount, "full", "weak_fully/T")
    policy = RegionPolicy(
        [Interval.half_open(-1.0, 0.0), Interval.closed(0.0, 1.0)],
        [0, 1],
        name="sign",
    )
    return GalleryEntry(
        "weak_fully",
        n,
        design,
        true,
        policy,
        policy,
        closed_form_published={
            "design_optimal": lambda b, n: 1.0 / n ** 2 + b * b / (1.0 - b),
            "true_optimal": lambda b, n: 0.0,
            "cross": None,
        },
        closed_form_exact={
            "design_optimal": lambda b, n: b / n ** 2 + b * b / (1.0 - b),
            "true_optimal": lambda b, n: 0.0,
            "cross": lambda b, n: 0.0,
        },
        limit_gap=lambda b: b * b / (1.0 - b),
        convergence_mode="weak",
        assumption_profile=true.assumption_profile,
    )


def make_robust_weak(n: int, discount: float = 0.5) -> GalleryEntry:
    """Model on [0, 2] with actions {0, 1, 2}. The design kernel moves
    states at or below 1 - 1/n to 1 - 1/n (u = 1) or 1 + 1/n (u = 0), and
    states at or above 1 + 1/n the other way round; the band between, and
    action 2 everywhere, lead to 1. The true kernel always leads to 1.
    Cost is x * 1{x >= 1} for u in {0, 1} and 3 for u = 2.
    """
    _check_n(n)
    low_edge, high_edge = 1.0 - 1.0 / n, 1.0 + 1.0 / n
    actions = [0.0, 1.0, 2.0]
    low = Measure1D.dirac(low_edge)
    high = Measure1D.dirac(high_edge)
    one = Measure1D.dirac(1.0)
    regions = [
        Interval.closed(0.0, low_edge),
        Interval.open(low_edge, high_edge),
        Interval.closed(high_edge, 2.0),
    ]
    table = {
        (0, 0): high,
        (0, 1): low,
        (0, 2): one,
        (1, 0): one,
        (1, 1): one,
        (1, 2): one,
        (2, 0): low,
        (2, 1): high,
        (2, 2): one,
    }
    above_one = PiecewisePolynomial([0.0, 1.0, 2.0], [[0.0], [0.0, 1.0]])
    cost = [above_one, above_one, PiecewisePolynomial.constant(3.0, 0, 2)]
    profile = {
        "a": VIOLATED,
        "b": NOT_APPLICABLE,
        "c": VIOLATED,
        "d": SATISFIED,
    }
    design = RegionModel(
        regions,
        actions,
        table,
        cost,
        discount,
        Measure1D.dirac(0.0),
        state_interval=(0.0, 2.0),
        assumption_profile=profile,
        name=f"robust_weak/T_{n}",
    )
    true = RegionModel(
        [Interval.closed(0.0, 2.0)],
        actions,
        {(0, a): one for a in range(3)},
        cost,
        discount,
        Measure1D.dirac(0.0),
        state_interval=(0.0, 2.0),
        assumption_profile=profile,
        name="robust_weak/T",
    )
    design_policy = RegionPolicy(regions, [1, 2, 0], name="gamma_n")
    true_policy = RegionPolicy.constant(1, (0.0, 2.0), name="u=1")
    return GalleryEntry(
        "robust_weak",
        n,
        design,
        true,
        design_policy,
        true_policy,
        closed_form_published={
            "design_optimal": lambda b, n: 0.0,
            "true_optimal": lambda b, n: 0.0,
            "cross": lambda b, n: 3.0 / (1.0 - b),
        },
        closed_form_exact={
            "design_optimal": lambda b, n: 0.0,
            "true_optimal": lambda b, n: b / (1.0 - b),
            "cross": lambda b, n: 3.0 * b / (1.0 - b),
        },
        limit_gap=lambda b: 2.0 * b / (1.0 - b),
        convergence_mode="weak",
        assumption_profile=profile,
    )


def square_wave_regions(n: int) -> Tuple[List[Interval], List[Interval]]:
    """Returns the cells L_{n,k} and R_{n,k} of [0, 1]; the point 1 is
    added to the last R cell."""
    left, right = square_wave_halves(n)
    left_cells = [Interval.half_open(a, b) for a, b in left]
    right_cells = [Interval.half_open(a, b) for a, b in right[:-1]]
    right_cells.append(Interval.closed(*right[-1]))
    return left_cells, right_cells


def _square_wave_model(
    n: int,
    left_kernels: Sequence[Measure1D],
    right_kernels: Sequence[Measure1D],
    cost: Sequence[PiecewisePolynomial],
    discount: float,
    profile: Dict[str, str],
    name: str,
) -> RegionModel:
    """Model on [0, 1] whose kernel for action a is left_kernels[a] on L and
    right_kernels[a] on R."""
    left, right = square_wave_regions(n)
    table = {}
    for r in range(len(left)):
        for a, kernel in enumerate(left_kernels):
            table[(r, a)] = kernel
    for r in range(len(right)):
        for a, kernel in enumerate(right_kernels):
            table[(len(left) + r, a)] = kernel
    return RegionModel(
        left + right,
        [0.0, 1.0],
        table,
        cost,
        discount,
        Measure1D.dirac(0.0),
        state_interval=(0.0, 1.0),
        assumption_profile=profile,
        name=name,
    )


def make_setwise_cont(n: int, discount: float = 0.5) -> GalleryEntry:
    """Model on [0, 1] with actions {0, 1} and cost (x - u)**2, started at
    0. From L the design kernel draws from the square-wave density f_n and
    the true kernel from U([0, 1]); from R both jump to 1. Kernels do not
    depend on the action, so the myopic policy (u = 0 iff x < 1/2) is
    optimal for both.
    """
    _check_n(n, even=True)
    f_n, _ = square_wave_pair(n)
    uniform = Measure1D.uniform(0.0, 1.0)
    one = Measure1D.dirac(1.0)
    cost = _quadratic_costs([0.0, 1.0], 0.0, 1.0)
    profile = {
        "a": VIOLATED,
        "b": NOT_APPLICABLE,
        "c": SATISFIED,
        "d": SATISFIED,
    }
    design = _square_wave_model(
        n,
        [f_n, f_n],
        [one, one],
        cost,
        discount,
        profile,
        f"setwise_cont/T_{n}",
    )
    true = _square_wave_model(
        n,
        [uniform, uniform],
        [one, one],
        cost,
        discount,
        profile,
        "setwise_cont/T",
    )
    policy = RegionPolicy(
        [Interval.half_open(0.0, 0.5), Interval.closed(0.5, 1.0)],
        [0, 1],
        name="myopic",
    )
    true_optimal = lambda b, n: b / (12.0 - 6.0 * b)  # noqa: E731
    return GalleryEntry(
        "setwise_cont",
        n,
        design,
        true,
        policy,
        policy,
        closed_form_published={
            "design_optimal": lambda b, n: b
            / (1.0 - b)
            * (1.0 / 12.0 + 1.0 / (8.0 * n)),
            "true_optimal": true_optimal,
            "cross": None,
        },
        closed_form_exact={
            "design_optimal": lambda b, n: b / (12.0 * (1.0 - b)),
            "true_optimal": true_optimal,
            "cross": true_optimal,
        },
        limit_gap=lambda b: b / (12.0 * (1.0 - b)) - b / (12.0 - 6.0 * b),
        convergence_mode="setwise",
        assumption_profile=profile,
    )


def make_setwise_robust(n: int, discount: float = 0.5) -> GalleryEntry:
    """Model on [0, 1] with cost c(x, 0) = 2 and c(x, 1) = x, started at 0.
    The design kernel draws from f_n on (L, 1) and (R, 0) and from g_n on
    (L, 0) and (R, 1); the true kernel is U([0, 1]) everywhere. The design
    policy plays 1 on L and 0 on R; the true optimal policy plays 1.
    """
    _check_n(n, even=True)
    f_n, g_n = square_wave_pair(n)
    uniform = Measure1D.uniform(0.0, 1.0)
    cost = [
        PiecewisePolynomial.constant(2.0, 0.0, 1.0),
        PiecewisePolynomial.polynomial([0.0, 1.0], 0.0, 1.0),
    ]
    profile = {
        "a": VIOLATED,
        "b": NOT_APPLICABLE,
        "c": SATISFIED,
        "d": SATISFIED,
    }
    design = _square_wave_model(
        n,
        [g_n, f_n],
        [f_n, g_n],
        cost,
        discount,
        profile,
        f"setwise_robust/T_{n}",
    )
    true = _square_wave_model(
        n,
        [uniform, uniform],
        [uniform, uniform],
        cost,
        discount,
        profile,
        "setwise_robust/T",
    )
    left, right = square_wave_regions(n)
    design_policy = RegionPolicy(
        left + right, [1] * len(left) + [0] * len(right), name="gamma_n"
    )
    true_policy = RegionPolicy.constant(1, (0.0, 1.0), name="u=1")
    return GalleryEntry(
        "setwise_robust",
        n,
        design,
        true,
        design_policy,
        true_policy,
        closed_form_published={
            "design_optimal": None,
            "true_optimal": lambda b, n: 1.0 / (2.0 * (1.0 - b)),
            "cross": lambda b, n: (1.25 - 1.0 / (8.0 * n)) / (1.0 - b),
        },
        closed_form_exact={
            "design_optimal": lambda b, n: b
            / (1.0 - b)
            * (0.5 - 1.0 / (4.0 * n)),
            "true_optimal": lambda b, n: b / (2.0 * (1.0 - b)),
            "cross": lambda b, n: b / (1.0 - b) * (1.25 - 1.0 / (8.0 * n)),
        },
        limit_gap=lambda b: 0.75 * b / (1.0 - b),
        convergence_mode="setwise",
        assumption_profile=profile,
    )


GALLERY: Dict[str, Callable[..., GalleryEntry]] = {
    "weak_pomdp": make_weak_pomdp,
    "weak_fully": make_weak_fully,
    "robust_weak": make_robust_weak,
    "setwise_cont": make_setwise_cont,
    "setwise_robust": make_setwise_robust,
}


def make_entry(name: str, n: int, discount: float = 0.5) -> GalleryEntry:
    """Builds the named gallery entry."""
    try:
        constructor = GALLERY[name]
    except KeyError:
        raise ValueError(
            f"unknown gallery entry {name!r}; choose from "
            f"{', '.join(sorted(GALLERY))}"
        )
    return constructor(n, discount)


def clip_drift(shift: float, lo: float, hi: float) -> PiecewisePolynomial:
    """Returns x -> min(max(x + shift, lo), hi) on [lo, hi]."""
    inner = {min(max(edge - shift, lo), hi) for edge in (lo, hi)}
    breaks = sorted({lo, hi} | inner)
    coefficients = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        middle = 0.5 * (a + b)
        if middle + shift <= lo:
            coefficients.append([lo])
        elif middle + shift >= hi:
            coefficients.append([hi])
        else:
            coefficients.append([shift, 1.0])
    return PiecewisePolynomial(breaks, coefficients)


def make_additive_noise(
    drift: Sequence[PiecewisePolynomial],
    noise: Measure1D,
    actions: Sequence[float],
    state_interval: Tuple[float, float],
    cost: Optional[Sequence[PiecewisePolynomial]] = None,
    discount: float = 0.9,
    state_grid: Optional[Sequence[float]] = None,
    name: str = "additive",
) -> AdditiveNoiseModel:
    """Builds x' = f(x, u) + w and checks it.

    :raises InvalidModelException: if a drift leaves the state interval or
        another invariant fails.
    """
    return ensure_valid(
        AdditiveNoiseModel(
            drift,
            noise,
            actions,
            state_interval,
            cost=cost,
            discount=discount,
            state_grid=state_grid,
            name=name,
        )
    )


def make_scaling_noise_model(
    noise: Optional[Measure1D] = None,
    discount: float = 0.9,
    name: str = "scaling",
) -> AdditiveNoiseModel:
    """The model x' = u * x / 2 + w on [0, 2] with actions {0, 1}, noise
    U([0, 1]) by default and cost (x - 1)**2."""
    lo, hi = 0.0, 2.0
    return make_additive_noise(
        [
            PiecewisePolynomial.constant(0.0, lo, hi),
            PiecewisePolynomial.polynomial([0.0, 0.5], lo, hi),
        ],
        noise if noise is not None else Measure1D.uniform(0.0, 1.0),
        [0.0, 1.0],
        (lo, hi),
        cost=_quadratic_costs([1.0, 1.0], lo, hi),
        discount=discount,
        name=name,
    )
