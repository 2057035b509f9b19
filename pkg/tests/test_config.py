# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

import json
import pathlib

import pytest

from mismatchlab import ConfigException, load_config, parse_config
from mismatchlab.config import CONFIG_VERSION, KINDS, MAX_SEED


def body(kind, **fields):
    return {"version": CONFIG_VERSION, "kind": kind, "seed": 7, **fields}


@pytest.mark.parametrize("kind", KINDS)
def test_defaults_fill_in(kind):
    cfg = parse_config(body(kind))
    assert cfg.kind == kind
    assert cfg.seed == 7
    assert cfg.tol == 1e-9
    assert cfg.params is not None
    assert cfg.out is None


def test_defaults_values():
    assert parse_config(body("gallery")).params.n == [4, 10, 100]
    assert parse_config(body("bounds-corpus")).params.pairs == 200
    assert parse_config(body("strategic")).params.horizons == [1, 2, 3, 4]
    sup_gap = parse_config(body("sup-gap")).params
    assert sup_gap.eps[-1] == 0.0
    assert sup_gap.solver_tol == 1e-2
    learn = parse_config(body("learn")).params
    assert learn.estimator == "counting"
    assert learn.sample_sizes == [100, 1000, 10000, 100000]


def test_round_trip():
    cfg = parse_config(
        body(
            "learn",
            tol=1e-8,
            learn={"estimator": "noise-histogram", "seeds": 3},
        )
    )
    again = parse_config(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.to_json() == cfg.to_json()
    assert again.digest() == cfg.digest()
    assert again.params.seeds == 3


def test_digest():
    first = parse_config(body("gallery"))
    second = parse_config(body("gallery", gallery={}))
    assert first.digest() == second.digest()
    assert len(first.digest()) == 64
    assert first.digest() != parse_config(body("gallery", seed=8)).digest()


@pytest.mark.parametrize(
    "fields,field",
    [
        ({"version": 2}, "version"),
        ({"kind": "bogus"}, "kind"),
        ({"seed": -1}, "seed"),
        ({"seed": MAX_SEED + 1}, "seed"),
        ({"tol": 0.0}, "tol"),
        ({"colour": "blue"}, "colour"),
        ({"learn": {"estimator": "magic"}}, "learn.estimator"),
        ({"learn": {"sample_sizes": [10, 10]}}, "learn.sample_sizes"),
        ({"learn": {"discount": 1.0}}, "learn.discount"),
        ({"learn": {"bins": 3}}, "learn.bins"),
    ],
)
def test_invalid_fields(fields, field):
    config = body("learn")
    config.update(fields)
    with pytest.raises(ConfigException) as info:
        parse_config(config)
    assert info.value.field == field
    assert field in str(info.value)


@pytest.mark.parametrize(
    "kind,section,field",
    [
        ("gallery", {"entries": ["nope"]}, "gallery.entries"),
        ("gallery", {"n": [1]}, "gallery.n"),
        ("bounds-corpus", {"eps": [1.5]}, "bounds_corpus.eps.0"),
        ("bounds-corpus", {"max_states": 1}, "bounds_corpus.max_states"),
        ("strategic", {"horizons": [2, 1]}, "strategic.horizons"),
        ("sup-gap", {"eps": [0.0, 0.1]}, "sup_gap.eps"),
        ("sup-gap", {"solver_tol": 0}, "sup_gap.solver_tol"),
    ],
)
def test_invalid_sections(kind, section, field):
    with pytest.raises(ConfigException) as info:
        parse_config(body(kind, **{kind.replace("-", "_"): section}))
    assert info.value.field == field


def test_not_an_object():
    with pytest.raises(ConfigException, match="JSON object"):
        parse_config([1, 2])


def test_load_config(write_config, tmp_path):
    path = write_config(body("strategic", strategic={"pairs": 3}))
    assert load_config(path).params.pairs == 3
    assert load_config(str(path)).kind == "strategic"

    with pytest.raises(ConfigException, match="cannot read"):
        load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigException, match="not JSON"):
        load_config(broken)


def test_with_overrides():
    cfg = parse_config(body("gallery", out="first"))
    assert cfg.with_overrides().to_json() == cfg.to_json()
    changed = cfg.with_overrides(seed=99, out="second")
    assert changed.seed == 99
    assert changed.out == "second"
    assert cfg.seed == 7
    with pytest.raises(ConfigException) as info:
        cfg.with_overrides(seed=-5)
    assert info.value.field == "seed"


@pytest.mark.parametrize(
    "path",
    sorted((pathlib.Path(__file__).parent.parent / "configs").glob("*.json")),
    ids=lambda path: path.name,
)
def test_shipped_configs(path):
    cfg = load_config(path)
    assert cfg.out.startswith("results/")
