# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Experiment runners: plan a configuration into independent tasks, run
them (optionally in a process pool), merge the rows in task order and write
the result files and manifest atomically."""

import concurrent.futures
import hashlib
import json
import math
import pathlib
import platform
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import util
from .config import ExperimentConfig, parse_config
from .exceptions import MismatchLabException
from .gallery import GALLERY, VALUE_KEYS, make_entry, make_scaling_noise_model
from .learning import LEARNING_COLUMNS, curve_records
from .models import (
    mix_kernels,
    random_stochastic,
    random_tabular_mdp,
    random_tabular_pomdp,
)
from .robustness import (
    BOUND_SLACK,
    MISMATCH_COLUMNS,
    mismatch_loss,
    policy_sup_gap,
    random_mismatch_pair,
    strategic_tv,
    sup_gap_tail,
)
from .solvers import HistoryPolicy, iterate_histories, solve_pomdp_belief_tree
from .version import VERSION

RESULT_SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
SERIES_DIR = "series"
MONOTONE_SLACK = 1e-12
DEFAULT_OUT = "results"

COLUMNS: Dict[str, Tuple[str, ...]] = {
    "gallery": (
        "entry",
        "n",
        "discount",
        "design_optimal",
        "true_optimal",
        "cross",
        "exact_design_optimal",
        "exact_true_optimal",
        "exact_cross",
        "published_design_optimal",
        "published_true_optimal",
        "published_cross",
        "max_abs_error",
        "matches_exact",
        "loss",
        "limit_gap",
        "sup_tv",
        "sup_w1",
        "convergence_mode",
    ),
    "bounds-corpus": ("pair", "n_states", "n_actions", "eps")
    + MISMATCH_COLUMNS,
    "strategic": (
        "pair",
        "eps",
        "k",
        "exact_tv",
        "bound",
        "holds",
        "nondecreasing",
    ),
    "sup-gap": (
        "pair",
        "eps",
        "horizon",
        "sup_gap",
        "j_opt_first",
        "j_opt_second",
        "optimal_gap",
        "tail",
        "holds",
        "monotone",
    ),
    "learn": LEARNING_COLUMNS,
}

Row = Dict[str, Any]
TaskResult = Tuple[List[Row], int]


class Task:
    """One independent unit of an experiment.

    :param task_id: Stable identifier; also keys the task's random stream.
    :param payload: Kind-specific parameters, JSON-compatible.
    """

    def __init__(self, task_id: str, payload: Dict[str, Any]):
        self.task_id = task_id
        self.payload = payload

    def __str__(self):
        return f"Task({self.task_id})"


class RunSummary:
    """Outcome of run_experiment."""

    def __init__(
        self,
        kind: str,
        files: Dict[str, pathlib.Path],
        rows: List[Row],
        violations: int,
    ):
        self.kind = kind
        self.files = files
        self.rows = rows
        self.violations = violations

    def __str__(self):
        return (
            f"RunSummary(kind={self.kind}, rows={len(self.rows)}, "
            f"violations={self.violations})"
        )


def plan_tasks(cfg: ExperimentConfig) -> List[Task]:
    """Splits a configuration into tasks, in output order."""
    params = cfg.params
    if cfg.kind == "gallery":
        return [
            Task(
                f"gallery/{entry}/n={n}/beta={beta!r}",
                {"entry": entry, "n": n, "discount": beta},
            )
            for entry in params.entries
            for n in params.n
            for beta in params.discounts
        ]
    if cfg.kind == "learn":
        return [
            Task(f"learn/{index}", {"index": index})
            for index in range(params.seeds)
        ]
    return [
        Task(f"{cfg.kind}/{index}", {"index": index})
        for index in range(params.pairs)
    ]


def _gallery_task(cfg: ExperimentConfig, task: Task) -> TaskResult:
    payload = task.payload
    entry = make_entry(payload["entry"], payload["n"], payload["discount"])
    record = entry.mismatch(cfg.tol)
    computed = {
        "design_optimal": record.j_opt_design,
        "true_optimal": record.j_opt_true,
        "cross": record.j_cross,
    }
    exact = entry.exact_values()
    published = entry.published_values()
    error = max(
        abs(computed[key] - exact[key])
        for key in VALUE_KEYS
        if exact[key] is not None
    )
    matches = error <= BOUND_SLACK * cfg.tol
    row: Row = {
        "entry": entry.name,
        "n": entry.n,
        "discount": entry.discount,
        "max_abs_error": error,
        "matches_exact": int(matches),
        "loss": record.loss,
        "limit_gap": entry.limit_gap(entry.discount),
        "sup_tv": record.sup_tv,
        "sup_w1": record.sup_w1,
        "convergence_mode": entry.convergence_mode,
    }
    for key in VALUE_KEYS:
        row[key] = computed[key]
        row[f"exact_{key}"] = exact[key]
        row[f"published_{key}"] = published[key]
    return [row], int(not matches)


def _corpus_task(cfg: ExperimentConfig, task: Task) -> TaskResult:
    params = cfg.params
    index = task.payload["index"]
    rng = util.task_rng(cfg.seed, task.task_id)
    n_states = int(rng.integers(params.min_states, params.max_states + 1))
    n_actions = int(rng.integers(params.min_actions, params.max_actions + 1))
    eps = params.eps[index % len(params.eps)]
    beta = params.discounts[(index // len(params.eps)) % len(params.discounts)]
    true_model, design = random_mismatch_pair(
        rng, n_states, n_actions, eps, beta, name=f"pair{index}"
    )
    record = mismatch_loss(
        true_model,
        design,
        cfg.tol,
        extra={
            "pair": index,
            "n_states": n_states,
            "n_actions": n_actions,
            "eps": eps,
        },
    )
    ok = record.bound_holds and record.continuity_holds
    return [record.to_json()], int(not ok)


def _random_history_policy(
    rng: np.random.Generator, n_actions: int, n_observations: int, depth: int
) -> HistoryPolicy:
    histories = list(iterate_histories(n_observations, depth))
    choices = rng.integers(n_actions, size=len(histories))
    return HistoryPolicy(
        {h: int(a) for h, a in zip(histories, choices)},
        depth,
        n_observations,
    )


def _strategic_task(cfg: ExperimentConfig, task: Task) -> TaskResult:
    params = cfg.params
    index = task.payload["index"]
    rng = util.task_rng(cfg.seed, task.task_id)
    eps = params.eps[index % len(params.eps)]
    first = random_tabular_pomdp(
        rng,
        params.n_states,
        params.n_actions,
        params.n_observations,
        params.discount,
        name=f"pair{index}",
    )
    other = random_stochastic(rng, first.kernel.shape)
    second = mix_kernels(first, other, eps)
    policy = _random_history_policy(
        rng,
        params.n_actions,
        params.n_observations,
        max(1, params.horizons[-1]),
    )
    rows: List[Row] = []
    violations = 0
    previous = -math.inf
    for k in params.horizons:
        exact, bound, holds = strategic_tv(first, second, policy, k)
        nondecreasing = exact >= previous - MONOTONE_SLACK
        previous = exact
        violations += int(not (holds and nondecreasing))
        rows.append(
            {
                "pair": index,
                "eps": eps,
                "k": k,
                "exact_tv": exact,
                "bound": bound,
                "holds": int(holds),
                "nondecreasing": int(nondecreasing),
            }
        )
    return rows, violations


def _sup_gap_task(cfg: ExperimentConfig, task: Task) -> TaskResult:
    params = cfg.params
    index = task.payload["index"]
    rng = util.task_rng(cfg.seed, task.task_id)
    first = random_tabular_pomdp(
        rng,
        params.n_states,
        params.n_actions,
        params.n_observations,
        params.discount,
        name=f"pair{index}",
    )
    other = random_stochastic(rng, first.kernel.shape)
    j_first, _ = solve_pomdp_belief_tree(first, params.solver_tol)
    tail = sup_gap_tail(first, params.horizon)
    rows: List[Row] = []
    violations = 0
    previous = math.inf
    for eps in params.eps:
        second = mix_kernels(first, other, eps)
        gap = policy_sup_gap(
            first, second, params.horizon, params.policy_budget
        )
        j_second, _ = solve_pomdp_belief_tree(second, params.solver_tol)
        optimal_gap = abs(j_first - j_second)
        holds = gap >= optimal_gap - 2.0 * tail - 2.0 * params.solver_tol
        monotone = gap <= previous + MONOTONE_SLACK
        previous = gap
        violations += int(not (holds and monotone))
        rows.append(
            {
                "pair": index,
                "eps": eps,
                "horizon": params.horizon,
                "sup_gap": gap,
                "j_opt_first": j_first,
                "j_opt_second": j_second,
                "optimal_gap": optimal_gap,
                "tail": tail,
                "holds": int(holds),
                "monotone": int(monotone),
            }
        )
    return rows, violations


def learning_model(cfg: ExperimentConfig):
    """Returns the true model of a learn experiment: a random tabular model
    for counting, the scaling additive-noise model otherwise."""
    params = cfg.params
    if params.estimator == "counting":
        return random_tabular_mdp(
            util.task_rng(cfg.seed, "learn/model"),
            params.n_states,
            params.n_actions,
            params.discount,
            name="learn",
        )
    return make_scaling_noise_model(discount=params.discount, name="learn")


def _learn_task(cfg: ExperimentConfig, task: Task) -> TaskResult:
    params = cfg.params
    seed = util.task_seed(cfg.seed, task.task_id)
    records = curve_records(
        learning_model(cfg),
        params.estimator,
        params.sample_sizes,
        seed,
        cfg.tol,
        n_bins=params.n_bins,
    )
    rows = [record.to_json() for record in records]
    return rows, sum(int(not record.bound_holds) for record in records)


_RUNNERS: Dict[str, Callable[[ExperimentConfig, Task], TaskResult]] = {
    "gallery": _gallery_task,
    "bounds-corpus": _corpus_task,
    "strategic": _strategic_task,
    "sup-gap": _sup_gap_task,
    "learn": _learn_task,
}


def run_task(config_json: str, task_id: str, payload: Dict) -> TaskResult:
    """Runs a single task; the configuration travels as JSON so that the
    call can be sent to a worker process."""
    cfg = parse_config(json.loads(config_json))
    task = Task(task_id, payload)
    rows, violations = _RUNNERS[cfg.kind](cfg, task)
    util.log_debug(
        "Task finished", task=task_id, rows=len(rows), violations=violations
    )
    return rows, violations


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def run_tasks(
    cfg: ExperimentConfig, tasks: Sequence[Task], jobs: int = 1
) -> TaskResult:
    """Runs tasks, in a process pool when jobs > 1, and concatenates their
    rows in task order."""
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    config_json = cfg.to_json()
    ids = [task.task_id for task in tasks]
    payloads = [task.payload for task in tasks]
    if jobs == 1 or len(tasks) <= 1:
        results = [run_task(config_json, i, p) for i, p in zip(ids, payloads)]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(
                    run_task, [config_json] * len(tasks), ids, payloads
                )
            )
    rows: List[Row] = []
    violations = 0
    for task_rows, task_violations in results:
        rows.extend(
            {key: _json_value(value) for key, value in row.items()}
            for row in task_rows
        )
        violations += task_violations
    return rows, violations


def run_experiment(
    cfg: ExperimentConfig,
    out: Optional[str] = None,
    jobs: int = 1,
) -> RunSummary:
    """Runs an experiment and writes <kind>.csv, <kind>.jsonl and
    manifest.json to the output directory.

    Output bytes depend only on the configuration (seed included), not on
    jobs or scheduling.
    """
    out_dir = pathlib.Path(out or cfg.out or DEFAULT_OUT)
    tasks = plan_tasks(cfg)
    util.log_info(
        "Running experiment", kind=cfg.kind, tasks=len(tasks), jobs=jobs
    )
    rows, violations = run_tasks(cfg, tasks, jobs)
    columns = COLUMNS[cfg.kind]
    csv_text = util.convert_rows_to_csv(
        columns, [[row.get(column) for column in columns] for row in rows]
    )
    jsonl_text = "".join(
        json.dumps(row, sort_keys=True) + "\n" for row in rows
    )
    stem = cfg.kind.replace("-", "_")
    files = {
        "csv": out_dir / f"{stem}.csv",
        "jsonl": out_dir / f"{stem}.jsonl",
    }
    util.atomic_write_text(files["csv"], csv_text)
    util.atomic_write_text(files["jsonl"], jsonl_text)
    manifest = {
        "schema_version": RESULT_SCHEMA_VERSION,
        "kind": cfg.kind,
        "config": json.loads(cfg.to_json()),
        "config_hash": cfg.digest(),
        "master_seed": cfg.seed,
        "tasks": [
            {
                "id": task.task_id,
                "seed": util.task_seed(cfg.seed, task.task_id),
            }
            for task in tasks
        ],
        "files": {
            path.name: _sha256(text)
            for path, text in (
                (files["csv"], csv_text),
                (files["jsonl"], jsonl_text),
            )
        },
        "rows": len(rows),
        "violations": violations,
        "versions": {
            "mismatchlab": VERSION,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    files["manifest"] = out_dir / MANIFEST_NAME
    util.atomic_write_text(
        files["manifest"], json.dumps(manifest, indent=2, sort_keys=True)
    )
    util.log_info(
        "Experiment finished",
        kind=cfg.kind,
        rows=len(rows),
        violations=violations,
        out=str(out_dir),
    )
    return RunSummary(cfg.kind, files, rows, violations)


def read_results(result_dir) -> Tuple[str, List[Row]]:
    """Reads the kind from the manifest and the rows from the CSV file."""
    result_dir = pathlib.Path(result_dir)
    manifest_path = result_dir / MANIFEST_NAME
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as error:
        raise MismatchLabException(
            f"cannot read manifest {manifest_path}: {error}"
        )
    kind = manifest.get("kind")
    if kind not in COLUMNS:
        raise MismatchLabException(f"manifest names unknown kind {kind!r}")
    csv_path = result_dir / f"{kind.replace('-', '_')}.csv"
    try:
        rows = util.convert_csv_to_rows(csv_path.read_text(encoding="utf-8"))
    except OSError as error:
        raise MismatchLabException(f"cannot read results {csv_path}: {error}")
    return kind, rows


def _require(rows: List[Row], columns: Sequence[str]):
    if not rows:
        return
    missing = [c for c in columns if c not in rows[0]]
    if missing:
        raise MismatchLabException(
            f"result rows lack columns {', '.join(missing)}"
        )


def _number(value: str) -> float:
    return float(value) if value not in ("", None) else math.nan


def _series_text(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = ["# " + " ".join(columns)]
    lines.extend(
        " ".join(
            value if isinstance(value, str) else util.format_float(value)
            for value in row
        )
        for row in rows
    )
    return "\n".join(lines) + "\n"


def _gallery_series(rows: List[Row]) -> Dict[str, str]:
    _require(rows, ("entry", "n", "discount", "design_optimal", "loss"))
    series = {}
    groups: Dict[Tuple[str, str], List[Row]] = {}
    for row in rows:
        groups.setdefault((row["entry"], row["discount"]), []).append(row)
    for (name, discount), group in sorted(groups.items()):
        beta = float(discount)
        design_form = GALLERY[name](
            4, beta
        ).closed_form_exact["design_optimal"]
        asymptote = design_form(beta, math.inf) if design_form else math.nan
        group.sort(key=lambda r: int(r["n"]))
        label = f"gallery_{name}_beta={discount}"
        series[f"{label}_design_optimal.dat"] = _series_text(
            ("n", "design_optimal", "exact_design_optimal", "asymptote"),
            [
                (
                    int(r["n"]),
                    _number(r["design_optimal"]),
                    _number(r.get("exact_design_optimal", "")),
                    asymptote,
                )
                for r in group
            ],
        )
        series[f"{label}_loss.dat"] = _series_text(
            ("n", "loss", "limit_gap"),
            [
                (
                    int(r["n"]),
                    _number(r["loss"]),
                    _number(r.get("limit_gap", "")),
                )
                for r in group
            ],
        )
    return series


def _corpus_series(rows: List[Row]) -> Dict[str, str]:
    _require(rows, ("sup_tv", "loss", "robustness_bound", "discount"))
    ordered = sorted(
        rows, key=lambda r: (_number(r["sup_tv"]), int(r.get("pair", 0)))
    )
    return {
        "bounds_corpus_loss.dat": _series_text(
            ("sup_tv", "discount", "loss", "robustness_bound"),
            [
                (
                    _number(r["sup_tv"]),
                    _number(r["discount"]),
                    _number(r["loss"]),
                    _number(r["robustness_bound"]),
                )
                for r in ordered
            ],
        )
    }


def _strategic_series(rows: List[Row]) -> Dict[str, str]:
    _require(rows, ("k", "exact_tv", "bound"))
    by_k: Dict[int, List[Row]] = {}
    for row in rows:
        by_k.setdefault(int(row["k"]), []).append(row)
    return {
        "strategic_tv.dat": _series_text(
            ("k", "max_exact_tv", "max_ratio"),
            [
                (
                    k,
                    max(_number(r["exact_tv"]) for r in group),
                    max(
                        _number(r["exact_tv"]) / _number(r["bound"])
                        if _number(r["bound"]) > 0
                        else 0.0
                        for r in group
                    ),
                )
                for k, group in sorted(by_k.items())
            ],
        )
    }


def _sup_gap_series(rows: List[Row]) -> Dict[str, str]:
    _require(rows, ("eps", "sup_gap", "optimal_gap"))
    by_eps: Dict[float, List[Row]] = {}
    for row in rows:
        by_eps.setdefault(_number(row["eps"]), []).append(row)
    return {
        "sup_gap.dat": _series_text(
            ("eps", "mean_sup_gap", "mean_optimal_gap"),
            [
                (
                    eps,
                    float(np.mean([_number(r["sup_gap"]) for r in group])),
                    float(np.mean([_number(r["optimal_gap"]) for r in group])),
                )
                for eps, group in sorted(by_eps.items(), reverse=True)
            ],
        )
    }


def _learn_series(rows: List[Row]) -> Dict[str, str]:
    _require(rows, ("N", "loss", "estimator"))
    by_n: Dict[int, List[float]] = {}
    for row in rows:
        by_n.setdefault(int(row["N"]), []).append(_number(row["loss"]))
    points = []
    previous = math.inf
    for n, losses in sorted(by_n.items()):
        q1, median, q3 = np.percentile(losses, [25, 50, 75])
        monotone = median <= previous + MONOTONE_SLACK
        previous = median
        points.append((n, float(median), float(q1), float(q3), int(monotone)))
    estimator = rows[0]["estimator"] if rows else "none"
    return {
        f"learn_{estimator}_median_loss.dat": _series_text(
            ("N", "median_loss", "q1", "q3", "median_nonincreasing"), points
        )
    }


_SERIES = {
    "gallery": _gallery_series,
    "bounds-corpus": _corpus_series,
    "strategic": _strategic_series,
    "sup-gap": _sup_gap_series,
    "learn": _learn_series,
}


def plotdata(result_dir, out: Optional[str] = None) -> List[pathlib.Path]:
    """Writes gnuplot-compatible series files (whitespace separated, header
    commented with #) derived from a result directory.

    :return: paths of the written files; empty, with a warning, when the
        results hold no rows.
    :raises MismatchLabException: if results are missing or lack columns.
    """
    kind, rows = read_results(result_dir)
    if not rows:
        util.logger.warning(
            f"No result rows in {result_dir}; no series written"
        )
        return []
    out_dir = pathlib.Path(out) if out else pathlib.Path(result_dir)
    out_dir = out_dir / SERIES_DIR
    written = []
    for name, text in sorted(_SERIES[kind](rows).items()):
        path = out_dir / name
        util.atomic_write_text(path, text)
        written.append(path)
    util.log_info("Wrote series", kind=kind, files=len(written))
    return written

