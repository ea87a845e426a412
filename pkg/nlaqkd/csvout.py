from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from enum import Enum
from typing import Any, TextIO


def format_value(value: Any) -> str:
    """CSV cell text: 9 significant digits, blank for undefined values.

    >>> format_value(1 / 3)
    '0.333333333'
    >>> format_value(None)
    ''
    """
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.9g}"
    return str(value)


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
