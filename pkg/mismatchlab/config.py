# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
"""Experiment configuration files.

A configuration is a JSON object with a mandatory ``version`` and ``kind``
and a master ``seed``; the parameters of the chosen kind live in the
section named after it. Missing sections are filled with defaults, unknown
fields are rejected.
"""

import hashlib
import json
import pathlib
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ValidationError, root_validator, validator

from .exceptions import ConfigException

CONFIG_VERSION = 1
KINDS = ("gallery", "bounds-corpus", "strategic", "sup-gap", "learn")
MAX_SEED = (1 << 64) - 1


def _nonempty(values: List) -> List:
    if len(values) == 0:
        raise ValueError("must not be empty")
    return values


def _discounts(values: List[float]) -> List[float]:
    _nonempty(values)
    for beta in values:
        if not 0.0 < beta < 1.0:
            raise ValueError(f"discount {beta} outside (0, 1)")
    return values


def _discount(value: float) -> float:
    _discounts([value])
    return value


class _Section(BaseModel):
    class Config:
        extra = "forbid"


class GalleryParams(_Section):
    entries: List[str] = [
        "weak_pomdp",
        "weak_fully",
        "robust_weak",
        "setwise_cont",
        "setwise_robust",
    ]
    n: List[int] = [4, 10, 100]
    discounts: List[float] = [0.5]

    @validator("entries")
    def _known_entries(cls, values):
        from .gallery import GALLERY

        _nonempty(values)
        unknown = [name for name in values if name not in GALLERY]
        if unknown:
            raise ValueError(f"unknown gallery entries {unknown}")
        return values

    @validator("n")
    def _n_range(cls, values):
        _nonempty(values)
        if min(values) < 2:
            raise ValueError("n must be at least 2")
        return values

    _check_discounts = validator("discounts", allow_reuse=True)(_discounts)


class CorpusParams(_Section):
    pairs: int = 200
    min_states: int = 2
    max_states: int = 6
    min_actions: int = 2
    max_actions: int = 4
    eps: List[float] = [0.01, 0.05, 0.2]
    discounts: List[float] = [0.3, 0.5, 0.9]

    @validator("pairs", "min_states", "min_actions")
    def _positive(cls, value):
        if value < 1:
            raise ValueError("must be positive")
        return value

    @validator("max_states")
    def _states_order(cls, value, values):
        if value < values.get("min_states", 1):
            raise ValueError("must not be below min_states")
        return value

    @validator("max_actions")
    def _actions_order(cls, value, values):
        if value < values.get("min_actions", 1):
            raise ValueError("must not be below min_actions")
        return value

    @validator("eps", each_item=True)
    def _eps_range(cls, value):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"eps {value} outside [0, 1]")
        return value

    _check_eps = validator("eps", allow_reuse=True)(_nonempty)
    _check_discounts = validator("discounts", allow_reuse=True)(_discounts)


class StrategicParams(_Section):
    pairs: int = 100
    n_states: int = 3
    n_actions: int = 2
    n_observations: int = 2
    horizons: List[int] = [1, 2, 3, 4]
    eps: List[float] = [0.05, 0.2]
    discount: float = 0.9

    _check_discount = validator("discount", allow_reuse=True)(_discount)

    @validator("horizons")
    def _increasing(cls, values):
        _nonempty(values)
        if values[0] < 0 or any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("horizons must be nonnegative and increasing")
        return values


class SupGapParams(_Section):
    pairs: int = 5
    n_states: int = 2
    n_actions: int = 2
    n_observations: int = 2
    horizon: int = 2
    eps: List[float] = [0.1, 0.05, 0.02, 0.01, 0.0]
    discount: float = 0.5
    policy_budget: int = 100_000
    solver_tol: float = 1e-2

    _check_discount = validator("discount", allow_reuse=True)(_discount)

    @validator("eps")
    def _decreasing(cls, values):
        _nonempty(values)
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("eps must be nonincreasing")
        return values

    @validator("horizon")
    def _horizon_range(cls, value):
        if value < 0:
            raise ValueError("must be nonnegative")
        return value

    @validator("solver_tol")
    def _positive_solver_tol(cls, value):
        if not value > 0:
            raise ValueError("must be positive")
        return value


class LearnParams(_Section):
    estimator: str = "counting"
    n_states: int = 5
    n_actions: int = 3
    discount: float = 0.9
    sample_sizes: List[int] = [100, 1000, 10000, 100000]
    seeds: int = 20
    n_bins: int = 20

    _check_discount = validator("discount", allow_reuse=True)(_discount)

    @validator("estimator")
    def _known_estimator(cls, value):
        from .learning import ESTIMATORS

        if value not in ESTIMATORS:
            raise ValueError(f"unknown estimator {value!r}")
        return value

    @validator("sample_sizes")
    def _increasing(cls, values):
        _nonempty(values)
        if values[0] < 1 or any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sample sizes must be positive and increasing")
        return values

    @validator("seeds")
    def _seeds_positive(cls, value):
        if value < 1:
            raise ValueError("must be positive")
        return value


SECTIONS = {
    "gallery": GalleryParams,
    "bounds-corpus": CorpusParams,
    "strategic": StrategicParams,
    "sup-gap": SupGapParams,
    "learn": LearnParams,
}
_FIELD_NAMES = {kind: kind.replace("-", "_") for kind in KINDS}


class ExperimentConfig(BaseModel):
    version: int
    kind: str
    seed: int
    tol: float = 1e-9
    out: Optional[str] = None
    gallery: Optional[GalleryParams] = None
    bounds_corpus: Optional[CorpusParams] = None
    strategic: Optional[StrategicParams] = None
    sup_gap: Optional[SupGapParams] = None
    learn: Optional[LearnParams] = None

    class Config:
        extra = "forbid"

    @validator("version")
    def _supported_version(cls, value):
        if value != CONFIG_VERSION:
            raise ValueError(
                f"unsupported version {value}, expected {CONFIG_VERSION}"
            )
        return value

    @validator("kind")
    def _known_kind(cls, value):
        if value not in KINDS:
            raise ValueError(
                f"unknown kind {value!r}; choose from {', '.join(KINDS)}"
            )
        return value

    @validator("seed")
    def _seed_range(cls, value):
        if not 0 <= value <= MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return value

    @validator("tol")
    def _positive_tol(cls, value):
        if not value > 0:
            raise ValueError("tol must be positive")
        return value

    @root_validator(skip_on_failure=True)
    def _fill_section(cls, values):
        field = _FIELD_NAMES[values["kind"]]
        if values.get(field) is None:
            values[field] = SECTIONS[values["kind"]]()
        return values

    @property
    def params(self) -> Any:
        """The parameter section of the configured kind."""
        return getattr(self, _FIELD_NAMES[self.kind])

    def with_overrides(
        self, seed: Optional[int] = None, out: Optional[str] = None
    ) -> "ExperimentConfig":
        body = self.dict()
        if seed is not None:
            body["seed"] = seed
        if out is not None:
            body["out"] = out
        return parse_config(body)

    def to_json(self) -> str:
        return self.json(exclude_none=True, indent=2, sort_keys=True)

    def digest(self) -> str:
        """SHA-256 of the canonical serialization."""
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def _error_field(error: ValidationError) -> Optional[str]:
    errors = error.errors()
    if not errors:
        return None
    return ".".join(str(part) for part in errors[0]["loc"])


def parse_config(body: Dict[str, Any]) -> ExperimentConfig:
    """Validates a configuration object.

    :raises ConfigException: naming the first offending field.
    """
    if not isinstance(body, dict):
        raise ConfigException("configuration must be a JSON object")
    try:
        return ExperimentConfig.parse_obj(body)
    except ValidationError as error:
        field = _error_field(error)
        message = error.errors()[0]["msg"] if error.errors() else str(error)
        raise ConfigException(
            f"invalid configuration field {field}: {message}", field=field
        )


def load_config(path: Union[str, pathlib.Path]) -> ExperimentConfig:
    """Reads and validates a JSON configuration file."""
    try:
        text = pathlib.Path(path).read_text(encoding="utf-8")
    except OSError as error:
        raise ConfigException(f"cannot read configuration {path}: {error}")
    try:
        body = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigException(f"configuration {path} is not JSON: {error}")
    return parse_config(body)
