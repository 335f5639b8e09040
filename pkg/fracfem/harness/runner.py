from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Callable

from fracfem.core.analysis import ConvergenceTable


def _utc_ts() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


class TableRunner:
    """Runs one table build per (alpha, t) pair, optionally on a thread pool; output keeps input order."""

    def __init__(self, build: Callable[[float, float], ConvergenceTable], max_workers: int = 1):
        self.build = build
        self.max_workers = int(max_workers) if isinstance(max_workers, int) and max_workers > 0 else 1
        self.logger = logging.getLogger("fracfem.harness.runner")

    def _run_one(self, alpha: float, t: float) -> ConvergenceTable:
        self.logger.info(f"{_utc_ts()} TABLES item_start alpha={alpha:g} t={t:g}")
        try:
            table = self.build(alpha, t)
        except Exception as e:
            self.logger.info(
                f"{_utc_ts()} TABLES item alpha={alpha:g} t={t:g} result=ERROR "
                f"error_type={type(e).__name__} error_message='{str(e).replace(chr(10), ' ').strip()}'"
            )
            raise
        self.logger.info(f"{_utc_ts()} TABLES item_ok alpha={alpha:g} t={t:g} rows={len(table.rows)}")
        return table

    def run(self, pairs: list[tuple[float, float]]) -> list[ConvergenceTable]:
        self.logger.info(f"{_utc_ts()} TABLES start items={len(pairs)} workers={self.max_workers}")
        if self.max_workers == 1 or len(pairs) <= 1:
            tables = [self._run_one(a, t) for a, t in pairs]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                futures = [pool.submit(self._run_one, a, t) for a, t in pairs]
                tables = [f.result() for f in futures]
        self.logger.info(f"{_utc_ts()} TABLES end result=OK tables={len(tables)}")
        return tables
