from __future__ import annotations

import asyncio
import copy
import json
import os
from pathlib import Path
from typing import Any


class RunRecord:
    """Async-safe record of a verification run: logs, artifacts, metrics and extra sections.

    When ``report_path`` is given every mutation rewrites the JSON snapshot atomically.
    """

    def __init__(self, *, report_path: str | Path | None = None):
        self._path = Path(report_path) if report_path is not None else None
        self._lock = asyncio.Lock()
        self._state: dict[str, Any] = {"logs": [], "artifacts": {}, "metrics": {}}

    # ── mutations, each one persisted ─────────────────────────────────────────
    async def set(self, key: str, value: Any) -> None:
        async with self._lock:
            self._state[key] = value
            self._persist()

    async def append_log(self, item: dict[str, Any]) -> None:
        async with self._lock:
            self._state.setdefault("logs", []).append(item)
            self._persist()

    async def record_artifact(self, name: str, value: Any) -> None:
        async with self._lock:
            self._state.setdefault("artifacts", {})[name] = value
            self._persist()

    async def bump_metric(self, name: str, inc: int = 1) -> None:
        async with self._lock:
            m = self._state.setdefault("metrics", {})
            m[name] = int(m.get(name, 0)) + inc
            self._persist()

    def snapshot(self) -> dict[str, Any]:
        return copy.deepcopy(self._state)

    def _persist(self) -> None:
        if self._path is None:
            return
        # written beside the target, then renamed over it
        tmp_path = self._path.with_suffix(self._path.suffix + ".tmp")
        try:
            with tmp_path.open("w", encoding="utf-8") as f:
                json.dump(self._state, f, ensure_ascii=False, indent=2, default=str)
            os.replace(tmp_path, self._path)
        finally:
            tmp_path.unlink(missing_ok=True)
