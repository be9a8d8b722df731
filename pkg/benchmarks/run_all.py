#!/usr/bin/env python3
"""
Run All gpbound Benchmarks

Times f_gp,M on both tables of seeded random instances and saves one JSON
report per table.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import click

sys.path.insert(0, str(Path(__file__).parent.parent))

from gpbound.bench import BenchReport, run_bench  # noqa: E402
from gpbound.logging import LogLevel, configure_logging  # noqa: E402

QUICK_CELLS = {
    1: ["n=3,2d=4", "n=3,2d=6"],
    2: ["n=10,2d=20,omega=10", "n=10,2d=20,omega=50"],
}


def print_header(title: str) -> None:
    """Print a formatted header."""
    print("\n")
    print("=" * 70)
    print(f"  {title}")
    print("=" * 70)


def print_report(report: BenchReport) -> None:
    print(f"\n{'cell':<28} {'mean (s)':>10} {'median (s)':>11} {'stdev':>9} {'failures':>9}")
    print("-" * 70)
    for cell in report.cells:
        print(
            f"{cell.cell.name:<28} {cell.mean_s:>10.3f} {cell.median_s:>11.3f} "
            f"{cell.std_s:>9.3f} {cell.failures:>9}"
        )


@click.command()
@click.option("--instances", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--quick", is_flag=True, help="Only a few small cells per table")
@click.option("--large", is_flag=True, help="Include the 2d = 8, 10 cells of table 1")
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("benchmark-results"),
    show_default=True,
)
def run_all_benchmarks(instances, seed, jobs, quick, large, output_dir):
    """Run both benchmark tables."""
    configure_logging(level=LogLevel.INFO)
    start_time = time.time()

    print("\n" + "=" * 70)
    print("  GPBOUND TIMING BENCHMARKS")
    print("=" * 70)

    output_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for table, title in ((1, "1. DENSE INSTANCES"), (2, "2. SPARSE INSTANCES")):
        print_header(title)
        report = run_bench(
            table,
            seed=seed,
            instances=instances,
            jobs=jobs,
            cells=QUICK_CELLS[table] if quick else None,
            include_large=large,
        )
        print_report(report)
        path = output_dir / f"table{table}.json"
        report.save(path)
        print(f"\nSaved {path}")
        reports.append(report)

    failures = sum(cell.failures for report in reports for cell in report.cells)
    print("\n" + "=" * 70)
    print(f"  Total benchmark time: {time.time() - start_time:.2f} seconds")
    print(f"  Failed instances: {failures}")
    print("=" * 70 + "\n")
    return reports


if __name__ == "__main__":
    run_all_benchmarks()
