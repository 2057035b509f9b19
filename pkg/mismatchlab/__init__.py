# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

from .version import VERSION as __version__  # noqa

__author__ = "The mismatchlab authors"

from .exceptions import (  # noqa
    BudgetExceededException,
    ConfigException,
    EstimatorException,
    IncompatibleModelsException,
    InvalidModelException,
    MeasureValidationException,
    MismatchLabException,
    PolicyMeasurabilityException,
    SolverException,
    UnboundedSupportException,
)

from .measures import (  # noqa
    Interval,
    Measure1D,
    PiecewisePolynomial,
    dyadic_family,
    integrate,
    pushforward_affine,
    sample,
    setwise_gap,
    square_wave_pair,
    tv_distance,
    w1_distance,
)

from .models import (  # noqa
    AdditiveNoiseModel,
    Diagnostic,
    KernelTable,
    RegionModel,
    TabularMDP,
    TabularPOMDP,
    as_pomdp,
    discretize,
    ensure_valid,
    kernel_tv_sup,
    kernel_w1_sup,
    mix_kernels,
    model_from_json,
    model_to_json,
    random_tabular_mdp,
    random_tabular_pomdp,
    validate,
)

from .solvers import (  # noqa
    HistoryPolicy,
    OpenLoopPolicy,
    RegionPolicy,
    SolverResult,
    StationaryPolicy,
    evaluate_history_policy,
    evaluate_policy_exact,
    evaluate_region_policy,
    policy_iterate,
    solve,
    solve_pomdp_belief_tree,
    value_iterate,
)

from .robustness import (  # noqa
    MismatchRecord,
    continuity_bound,
    enumerate_history_policies,
    mismatch_loss,
    policy_sup_gap,
    robustness_bound,
    strategic_tv,
    tightness_ratio,
)

from .gallery import (  # noqa
    GALLERY,
    GalleryEntry,
    make_additive_noise,
    make_entry,
    make_robust_weak,
    make_setwise_cont,
    make_setwise_robust,
    make_weak_fully,
    make_weak_pomdp,
)

from .learning import (  # noqa
    LearningCurve,
    Trajectory,
    empirical_kernel,
    histogram_density,
    learning_curve,
    pushforward_kernel,
    recover_noise,
    simulate,
    simulate_additive,
)

from .config import ExperimentConfig, load_config, parse_config  # noqa

from .experiments import RunSummary, plotdata, run_experiment  # noqa

from .util import task_rng, task_seed  # noqa

__all__ = [
    "__version__",
    "__author__",
    "BudgetExceededException",
    "ConfigException",
    "EstimatorException",
    "IncompatibleModelsException",
    "InvalidModelException",
    "MeasureValidationException",
    "MismatchLabException",
    "PolicyMeasurabilityException",
    "SolverException",
    "UnboundedSupportException",
    "Interval",
    "Measure1D",
    "PiecewisePolynomial",
    "dyadic_family",
    "integrate",
    "pushforward_affine",
    "sample",
    "setwise_gap",
    "square_wave_pair",
    "tv_distance",
    "w1_distance",
    "AdditiveNoiseModel",
    "Diagnostic",
    "KernelTable",
    "RegionModel",
    "TabularMDP",
    "TabularPOMDP",
    "as_pomdp",
    "discretize",
    "ensure_valid",
    "kernel_tv_sup",
    "kernel_w1_sup",
    "mix_kernels",
    "model_from_json",
    "model_to_json",
    "random_tabular_mdp",
    "random_tabular_pomdp",
    "validate",
    "HistoryPolicy",
    "OpenLoopPolicy",
    "RegionPolicy",
    "SolverResult",
    "StationaryPolicy",
    "evaluate_history_policy",
    "evaluate_policy_exact",
    "evaluate_region_policy",
    "policy_iterate",
    "solve",
    "solve_pomdp_belief_tree",
    "value_iterate",
    "MismatchRecord",
    "continuity_bound",
    "enumerate_history_policies",
    "mismatch_loss",
    "policy_sup_gap",
    "robustness_bound",
    "strategic_tv",
    "tightness_ratio",
    "GALLERY",
    "GalleryEntry",
    "make_additive_noise",
    "make_entry",
    "make_robust_weak",
    "make_setwise_cont",
    "make_setwise_robust",
    "make_weak_fully",
    "make_weak_pomdp",
    "LearningCurve",
    "Trajectory",
    "empirical_kernel",
    "histogram_density",
    "learning_curve",
    "pushforward_kernel",
    "recover_noise",
    "simulate",
    "simulate_additive",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "RunSummary",
    "plotdata",
    "run_experiment",
    "task_rng",
    "task_seed",
]
