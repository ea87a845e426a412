from __future__ import annotations

import asyncio
import math
from collections.abc import Callable, Sequence
from typing import TypeVar

T = TypeVar("T")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` → [start, start + step, ..., stop] (stop included when on-grid).

    >>> parse_grid("0:1:0.5")
    [0.0, 0.5, 1.0]
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError as exc:
        raise ValueError(f"grid bounds must be numbers, got {text!r}") from exc
    if not all(math.isfinite(x) for x in (start, stop, step)):
        raise ValueError(f"grid bounds must be finite, got {text!r}")
    if step <= 0:
        raise ValueError(f"grid step must be > 0, got {step}")
    if stop < start:
        raise ValueError(f"inverted grid {text!r}: stop < start")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return [start + i * step for i in range(count)]


async def _evaluate(fn: Callable[[float], T], xs: Sequence[float], workers: int) -> list[T]:
    out: list[T] = []
    for i in range(0, len(xs), workers):
        batch = xs[i : i + workers]
        out.extend(await asyncio.gather(*(asyncio.to_thread(fn, x) for x in batch)))
    return out


def evaluate_grid(fn: Callable[[float], T], xs: Sequence[float], *, workers: int = 1) -> list[T]:
    """Apply ``fn`` to every grid point, ``workers`` at a time; results keep grid order."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return asyncio.run(_evaluate(fn, list(xs), workers))
