"""
Command-line interface for gpbound.

Results are written to stdout as JSON; human-readable summaries and logs go
to stderr. Exit codes: 0 success, 2 when the result is -inf (or, for verify,
when the bound is violated), 1 on errors, usage errors included.
"""

from __future__ import annotations

import functools
import math
import sys
from pathlib import Path
from typing import Any

import click
import orjson
from rich.console import Console
from rich.table import Table

from gpbound import __version__
from gpbound.bench import run_bench
from gpbound.bounds import BoundComputationError, f_gp, f_gp_ball
from gpbound.config import using_config
from gpbound.gpmodel import PreInfeasible, build_ball_gp, build_unconstrained_gp
from gpbound.instances import InstanceSpec, random_instance
from gpbound.logging import LogLevel, configure_logging
from gpbound.oracle import lambda_profile, sample_ball_check
from gpbound.polyring import (
    Polynomial,
    descending_permutation,
    parse_polynomial,
    permute_variables,
    support_sets,
)

console = Console(stderr=True)

EXIT_ERROR = 1
EXIT_NEG_INF = 2


def _emit(data: dict[str, Any]) -> None:
    click.echo(orjson.dumps(data, option=orjson.OPT_SERIALIZE_NUMPY).decode())


def handle_errors(func):
    """Report expected failures as a one-line error with exit code 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except BoundComputationError as e:
            console.print(f"[red]Error:[/red] {e}")
            if e.best_value is not None:
                console.print(f"  [dim]best feasible bound:[/dim] {e.best_value}")
            sys.exit(EXIT_ERROR)
        except (ValueError, OSError) as e:
            console.print(f"[red]Error:[/red] {e}")
            sys.exit(EXIT_ERROR)

    return wrapper


def polynomial_options(func):
    """--poly / --expr / --n / --two-d."""
    func = click.option("--two-d", "two_d", type=int, default=None, help="Even working degree 2d")(func)
    func = click.option("--n", "n", type=int, default=None, help="Number of variables (--expr)")(func)
    func = click.option("--expr", type=str, default=None, help="Polynomial expression")(func)
    func = click.option(
        "--poly", "poly", type=click.Path(exists=True, dir_okay=False), default=None,
        help="Polynomial JSON file",
    )(func)
    return func


def load_polynomial(poly: str | None, expr: str | None, n: int | None, two_d: int | None) -> Polynomial:
    if (poly is None) == (expr is None):
        raise ValueError("Give exactly one of --poly FILE or --expr STR")
    if expr is not None:
        return parse_polynomial(expr, n_hint=n, two_d_hint=two_d)
    try:
        data = orjson.loads(Path(poly).read_bytes())
    except orjson.JSONDecodeError as e:
        raise ValueError(f"{poly}: invalid JSON ({e})") from e
    p = Polynomial.from_json(data)
    return p if two_d is None else p.with_two_d(two_d)


def _format_value(value: float | None) -> str:
    return "-inf" if value is None or value == -math.inf else f"{value:.10g}"


def _dump_gp(p: Polynomial, M: float | None) -> dict[str, Any]:
    if M is None:
        gp = build_unconstrained_gp(support_sets(p))
        if isinstance(gp, PreInfeasible):
            return {"pre_infeasible": gp.reason}
        return gp.to_dict()
    perm = descending_permutation(support_sets(p).diagonal)
    dump = build_ball_gp(support_sets(permute_variables(p, perm)), None, M).to_dict()
    dump["permutation"] = perm
    return dump


class GpboundGroup(click.Group):
    """Usage errors exit with EXIT_ERROR; click's own code 2 is taken by -inf results."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_ERROR)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_ERROR)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=GpboundGroup)
@click.version_option(version=__version__, prog_name="gpbound")
@click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug (solver trace)")
@click.option("--log-json", is_flag=True, help="Emit logs as JSON lines on stderr")
def main(verbose: int, log_json: bool):
    """gpbound - lower bounds for polynomials via geometric programming."""
    level = [LogLevel.WARNING, LogLevel.INFO, LogLevel.DEBUG][min(verbose, 2)]
    configure_logging(level=level, json_output=log_json)


@main.command()
@polynomial_options
@click.option("--ball", "M", type=float, default=None, help="Bound on {sum x_i^(2d) <= M}")
@click.option("--fast", is_flag=True, help="Use closed forms without solving when available")
@click.option("--cross-check", is_flag=True, help="Also solve closed-form cases and compare")
@click.option("--dump-gp", is_flag=True, help="Include the geometric program in the output")
@click.option("--tol", type=float, default=None, help="Solver tolerance")
@handle_errors
def compute(poly, expr, n, two_d, M, fast, cross_check, dump_gp, tol):
    """Compute f_gp, or f_gp,M with --ball M.

    Example: gpbound compute --expr "x^6 + 3x^4 - 9x^2" --ball 1
    """
    p = load_polynomial(poly, expr, n, two_d)
    overrides: dict[str, Any] = {"fast": fast, "cross_check": cross_check}
    if tol is not None:
        overrides["tolerance"] = tol
    with using_config(**overrides):
        bound = f_gp(p) if M is None else f_gp_ball(p, M)

    result = {"polynomial": str(p), "n": p.n, "two_d": p.two_d, **bound.to_dict()}
    if dump_gp:
        result["gp"] = _dump_gp(p, M)
    _emit(result)

    name = "f_gp" if M is None else f"f_gp,{M:g}"
    console.print(f"  {name} = [cyan]{_format_value(bound.value)}[/cyan]  [dim]({bound.provenance.value})[/dim]")
    if bound.is_neg_inf:
        sys.exit(EXIT_NEG_INF)


@main.command()
@polynomial_options
@click.option("--ball", "M", type=float, required=True, help="Ball radius M")
@click.option("--bound", "bound", type=float, required=True, help="Claimed lower bound")
@click.option("--samples", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@handle_errors
def verify(poly, expr, n, two_d, M, bound, samples, seed):
    """Check a claimed lower bound against sampled points of the ball.

    Exits with code 2 if any sampled value is below the bound.
    """
    p = load_polynomial(poly, expr, n, two_d)
    report = sample_ball_check(p, M, bound, samples=samples, seed=seed)
    _emit(report.to_dict())
    if report.ok:
        console.print(f"  [green]✓[/green] {report.samples} samples, min observed {report.min_observed:.10g}")
    else:
        console.print(f"  [red]✗[/red] {len(report.violations)} of {report.samples} samples violate {bound}")
        sys.exit(EXIT_NEG_INF)


@main.command()
@polynomial_options
@click.option("--ball", "M", type=float, required=True, help="Ball radius M")
@click.option("--grid", type=str, required=True, help="Comma-separated multipliers, e.g. 0,0.5,1,2")
@click.option("--jobs", type=int, default=1, show_default=True)
@handle_errors
def sweep(poly, expr, n, two_d, M, grid, jobs):
    """Evaluate the Lagrangian bound G(lambda) over a grid of multipliers."""
    p = load_polynomial(poly, expr, n, two_d)
    try:
        lambdas = [float(part) for part in grid.split(",") if part.strip()]
    except ValueError as e:
        raise ValueError(f"--grid: not a list of numbers: {grid!r}") from e
    profile = lambda_profile(p, M, lambdas, jobs=jobs)
    best = max(profile, key=lambda point: point.value)

    def encode(value: float) -> float | str:
        return "neg_inf" if value == -math.inf else value

    _emit(
        {
            "M": M,
            "profile": [{"lambda": pt.lam, "value": encode(pt.value)} for pt in profile],
            "best_lambda": best.lam,
            "best_value": encode(best.value),
        }
    )
    console.print(f"  best lambda = {best.lam:g}, G = [cyan]{_format_value(best.value)}[/cyan]")
    if best.value == -math.inf:
        sys.exit(EXIT_NEG_INF)


@main.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--two-d", "two_d", type=int, required=True)
@click.option("--omega-size", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--diagonal",
    type=click.Choice(["unit", "random-positive", "none"]),
    default="unit",
    show_default=True,
)
@click.option("--coeff-min", type=int, default=-10, show_default=True)
@click.option("--coeff-max", type=int, default=10, show_default=True)
@click.option("--max-degree", type=int, default=None, help="Largest degree of sampled terms")
@click.option("--constant/--no-constant", default=True, show_default=True)
@handle_errors
def gen(n, two_d, omega_size, seed, diagonal, coeff_min, coeff_max, max_degree, constant):
    """Generate a seeded random instance as polynomial JSON."""
    spec = InstanceSpec(
        n=n,
        two_d=two_d,
        omega_size=omega_size,
        coeff_range=(coeff_min, coeff_max),
        diagonal=diagonal,
        seed=seed,
        max_degree=max_degree,
        include_constant=constant,
    )
    p = random_instance(spec)
    _emit(p.to_json())
    console.print(f"  [dim]{p}  (n={p.n}, 2d={p.two_d})[/dim]")


@main.command()
@click.option("--table", type=click.Choice(["1", "2"]), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--instances", type=int, default=10, show_default=True)
@click.option("--cell", "cells", multiple=True, help="Cell filter such as n=10,2d=20,omega=10")
@click.option("--large", is_flag=True, help="Include the 2d = 8, 10 cells of table 1")
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Also save the report")
@handle_errors
def bench(table, seed, jobs, instances, cells, large, output):
    """Time f_gp,M on seeded random instances."""
    report = run_bench(
        int(table),
        seed=seed,
        instances=instances,
        jobs=jobs,
        cells=list(cells) or None,
        include_large=large,
    )
    _emit(report.to_dict())
    if output:
        report.save(output)

    summary = Table(title=f"Table {table}: mean time of f_gp,M (seconds)")
    for column in ("n", "2d", "|Omega|", "mean", "median", "stdev", "failures"):
        summary.add_column(column, justify="right")
    for cell in report.cells:
        summary.add_row(
            str(cell.cell.n),
            str(cell.cell.two_d),
            "dense" if cell.cell.omega_size is None else str(cell.cell.omega_size),
            f"{cell.mean_s:.3f}",
            f"{cell.median_s:.3f}",
            f"{cell.std_s:.3f}",
            str(cell.failures),
        )
    console.print(summary)


if __name__ == "__main__":
    main()
