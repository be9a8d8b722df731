"""
Timing benchmarks for f_gp_ball on random instances.

Two tables of cells:

- table 1: dense instances, sum x_i^(2d) plus every lower-degree term with a
  random coefficient, n in {3, 4, 5}, 2d in {4, 6} (8 and 10 on request);
- table 2: sparse instances, n in {10, 20, 30, 40}, 2d in {20, 40, 60},
  |Omega| in {10, 20, 30, 40, 50}.

Each instance gets a seeded random radius M, an integer in [1, 10^5].
"""

from __future__ import annotations

import contextvars
import math
import platform
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import orjson

from gpbound.bounds import BoundComputationError, f_gp_ball
from gpbound.cache import no_cache
from gpbound.instances import InstanceSpec, random_instance
from gpbound.logging import get_logger, reset_instance_id, set_instance_id
from gpbound.validation import at_least, ensure, integer, one_of

M_RANGE = (1, 100_000)


@dataclass(frozen=True)
class BenchCell:
    table: int
    n: int
    two_d: int
    omega_size: int | None = None  # None: dense lower-degree part

    @property
    def name(self) -> str:
        omega = "dense" if self.omega_size is None else f"omega={self.omega_size}"
        return f"n={self.n} 2d={self.two_d} {omega}"

    def spec(self, seed: int) -> InstanceSpec:
        if self.omega_size is None:
            dense = math.comb(self.n + self.two_d - 1, self.n) - 1
            return InstanceSpec(self.n, self.two_d, dense, seed=seed, max_degree=self.two_d - 1)
        return InstanceSpec(self.n, self.two_d, self.omega_size, seed=seed)


def table1_cells(include_large: bool = False) -> list[BenchCell]:
    degrees = (4, 6, 8, 10) if include_large else (4, 6)
    return [BenchCell(1, n, two_d) for n in (3, 4, 5) for two_d in degrees]


def table2_cells() -> list[BenchCell]:
    return [
        BenchCell(2, n, two_d, omega)
        for n in (10, 20, 30, 40)
        for two_d in (20, 40, 60)
        for omega in (10, 20, 30, 40, 50)
    ]


def select_cells(table: int, filters: list[str] | None = None, include_large: bool = False) -> list[BenchCell]:
    """
    Cells of a table, optionally restricted by "n=10,2d=20,omega=10" style filters.

    A cell is kept if it matches any filter; each filter matches on the keys it names.
    """
    ensure({"table": (table, [one_of([1, 2])])})
    cells = table1_cells(include_large or bool(filters)) if table == 1 else table2_cells()
    if not filters:
        return cells

    def matches(cell: BenchCell, text: str) -> bool:
        wanted = {}
        for part in text.split(","):
            key, _, value = part.partition("=")
            if key.strip() not in ("n", "2d", "omega") or not value.strip():
                raise ValueError(f"Bad cell filter {text!r}; use e.g. n=10,2d=20,omega=10")
            wanted[key.strip()] = int(value)
        actual = {"n": cell.n, "2d": cell.two_d, "omega": cell.omega_size}
        return all(actual[key] == value for key, value in wanted.items())

    return [cell for cell in cells if any(matches(cell, f) for f in filters)]


@dataclass
class InstanceResult:
    index: int
    seed: int
    M: int
    seconds: float
    bound: float | None
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "seed": self.seed,
            "M": self.M,
            "seconds": self.seconds,
            "bound": self.bound,
            "error": self.error,
        }


@dataclass
class CellResult:
    """Timings of one cell."""

    cell: BenchCell
    instances: list[InstanceResult] = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [r.seconds for r in self.instances]

    @property
    def mean_s(self) -> float:
        return statistics.mean(self.times) if self.times else 0.0

    @property
    def median_s(self) -> float:
        return statistics.median(self.times) if self.times else 0.0

    @property
    def std_s(self) -> float:
        return statistics.stdev(self.times) if len(self.times) > 1 else 0.0

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.instances)

    def to_dict(self) -> dict[str, Any]:
        return {
            "table": self.cell.table,
            "n": self.cell.n,
            "two_d": self.cell.two_d,
            "omega_size": self.cell.omega_size,
            "mean_s": self.mean_s,
            "median_s": self.median_s,
            "std_s": self.std_s,
            "failures": self.failures,
            "instances": [r.to_dict() for r in self.instances],
        }


def _instance_seeds(root: int, cell: BenchCell, count: int) -> list[tuple[int, int]]:
    """(instance seed, M) pairs, deterministic in the root seed and the cell."""
    sequence = np.random.SeedSequence([root, cell.table, cell.n, cell.two_d, cell.omega_size or 0])
    pairs = []
    for child in sequence.spawn(count):
        rng = np.random.default_rng(child)
        seed = int(rng.integers(0, 2**31 - 1))
        M = int(rng.integers(M_RANGE[0], M_RANGE[1] + 1))
        pairs.append((seed, M))
    return pairs


def _run_instance(cell: BenchCell, index: int, seed: int, M: int) -> InstanceResult:
    token = set_instance_id(f"{cell.name}#{index}")
    try:
        p = random_instance(cell.spec(seed))
        start = time.perf_counter()
        try:
            with no_cache():
                bound = f_gp_ball(p, M)
        except BoundComputationError as e:
            return InstanceResult(index, seed, M, time.perf_counter() - start, e.best_value, str(e))
        seconds = time.perf_counter() - start
        get_logger().debug(
            "instance solved",
            component="bench",
            action="run_instance",
            duration_ms=seconds * 1000,
            M=M,
            bound=bound.value,
        )
        return InstanceResult(index, seed, M, seconds, bound.value)
    finally:
        reset_instance_id(token)


def run_cell(cell: BenchCell, instances: int = 10, seed: int = 0, jobs: int = 1) -> CellResult:
    """Time f_gp_ball over `instances` seeded instances of one cell."""
    ensure(
        {
            "instances": (instances, [integer(), at_least(1)]),
            "jobs": (jobs, [integer(), at_least(1)]),
        }
    )
    pairs = _instance_seeds(seed, cell, instances)
    if jobs == 1:
        results = [_run_instance(cell, k, s, M) for k, (s, M) in enumerate(pairs)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(contextvars.copy_context().run, _run_instance, cell, k, s, M)
                for k, (s, M) in enumerate(pairs)
            ]
            results = [future.result() for future in futures]
    return CellResult(cell, sorted(results, key=lambda r: r.index))


@dataclass
class BenchReport:
    table: int
    seed: int
    cells: list[CellResult] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "timestamp": time.strftime("%Y-%m-%d %H:%M:%S"),
            "python_version": sys.version,
            "platform": platform.platform(),
            "table": self.table,
            "seed": self.seed,
            "cells": [c.to_dict() for c in self.cells],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(orjson.dumps(self.to_dict(), option=orjson.OPT_INDENT_2))


def run_bench(
    table: int,
    seed: int = 0,
    instances: int = 10,
    jobs: int = 1,
    cells: list[str] | None = None,
    include_large: bool = False,
) -> BenchReport:
    """Run every selected cell of a table."""
    report = BenchReport(table, seed)
    for cell in select_cells(table, cells, include_large):
        result = run_cell(cell, instances=instances, seed=seed, jobs=jobs)
        get_logger().info(
            f"{cell.name}: mean {result.mean_s:.3f}s",
            component="bench",
            action="run_cell",
            median_s=result.median_s,
            failures=result.failures,
        )
        report.cells.append(result)
    return report
