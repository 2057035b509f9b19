# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.
import csv
import io
import logging
import os
import pathlib
import tempfile
from typing import Any, Iterable, List, Sequence, Union

import numpy as np

logger = logging.getLogger("mismatchlab")

_MASK64 = (1 << 64) - 1


def _get_log_text(message, **kwargs):
    return (
        message
        + " "
        + " ".join(f"{key}={value}" for key, value in sorted(kwargs.items()))
    )


def log_debug(message, **kwargs):
    text = _get_log_text(message, **kwargs)
    logger.debug(text)


def log_info(message, **kwargs):
    text = _get_log_text(message, **kwargs)
    logger.info(text)


def splitmix64(value: int) -> int:
    """Returns the splitmix64 finalizer of the given 64-bit value."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    """Returns the 64-bit FNV-1a hash of the UTF-8 encoding of text."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def task_seed(master_seed: int, task_id: str) -> int:
    """Derives the 64-bit key of a task's random substream.

    The key is splitmix64(master_seed XOR fnv1a64(task_id)), so any port that
    implements both functions reproduces the key bit-for-bit.
    """
    return splitmix64((int(master_seed) & _MASK64) ^ fnv1a64(task_id))


def make_rng(seed: int) -> np.random.Generator:
    """Returns a Philox-backed generator keyed by the given 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def task_rng(master_seed: int, task_id: str) -> np.random.Generator:
    """Returns the generator for the substream of the given task."""
    return make_rng(task_seed(master_seed, task_id))


def format_float(value: Any) -> str:
    """Formats a number with 17 significant digits, so that parsing the
    result recovers the same double."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def convert_rows_to_csv(
    columns: Sequence[str], rows: Iterable[Sequence[Any]]
) -> str:
    """Converts rows of values to CSV text with a header line. Floats are
    written with format_float, so output is byte-identical across runs.

    :param columns: column names, in output order.
    :param rows: sequences of values, one per row, in column order.
    :return: string containing the CSV text.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for index, row in enumerate(rows, 1):
        if len(row) != len(columns):
            raise ValueError(
                f"Row {index} has {len(row)} values, expected {len(columns)}"
            )
        writer.writerow(
            [v if isinstance(v, str) else format_float(v) for v in row]
        )
    return buffer.getvalue()


def convert_csv_to_rows(text: str) -> List[dict]:
    """Parses CSV text with a header line into a list of dictionaries."""
    return list(csv.DictReader(io.StringIO(text)))


def atomic_write_text(path: Union[str, pathlib.Path], text: str) -> None:
    """Writes text to path atomically: the content is written to a temporary
    file in the same directory, then moved over the destination."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{path.name}.", dir=str(path.parent)
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    log_debug("Wrote file", path=str(path), size=len(text))
