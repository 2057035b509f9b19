# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

import numpy as np
import pytest

from mismatchlab import util


def test_hash_functions():
    assert util.fnv1a64("") == 0xCBF29CE484222325
    assert util.fnv1a64("a") == 0xAF63DC4C8601EC8C
    assert util.splitmix64(0) == 0xE220A8397B1DCDAF


def test_task_seed():
    seed = util.task_seed(7, "bounds-corpus/3")
    assert seed == util.splitmix64(7 ^ util.fnv1a64("bounds-corpus/3"))
    assert 0 <= seed < 1 << 64
    assert util.task_seed(7, "bounds-corpus/4") != seed
    assert util.task_seed(8, "bounds-corpus/3") != seed


def test_task_rng_is_reproducible():
    first = util.task_rng(1, "learn/0").random(5)
    second = util.task_rng(1, "learn/0").random(5)
    other = util.task_rng(1, "learn/1").random(5)
    np.testing.assert_array_equal(first, second)
    assert not np.array_equal(first, other)


def test_format_float():
    assert util.format_float(None) == ""
    assert util.format_float(True) == "1"
    assert util.format_float(np.bool_(False)) == "0"
    assert util.format_float(3) == "3"
    assert util.format_float(0.1) == "0.10000000000000001"
    assert float(util.format_float(1 / 3)) == 1 / 3


def test_convert_rows_to_csv():
    text = util.convert_rows_to_csv(["a", "b"], [["x", 0.5], ["y", 2]])
    assert text == "a,b\nx,0.5\ny,2\n"
    assert util.convert_csv_to_rows(text) == [
        {"a": "x", "b": "0.5"},
        {"a": "y", "b": "2"},
    ]

    with pytest.raises(ValueError, match="expected 2"):
        util.convert_rows_to_csv(["a", "b"], [["x"]])


def test_atomic_write_text(tmp_path):
    path = tmp_path / "nested" / "out.txt"
    util.atomic_write_text(path, "first")
    util.atomic_write_text(path, "second")
    assert path.read_text() == "second"
    assert [p.name for p in path.parent.iterdir()] == ["out.txt"]
