"""
Runtime configuration for bound computation.

The active BoundConfig lives in a context variable, so worker threads and
nested computations can run with their own settings:

    from gpbound.config import using_config

    with using_config(fast=True):
        bound = f_gp_ball(p, M=10.0)
"""

from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field, replace
from typing import Any

from gpbound.gpsolve import SolverSettings
from gpbound.validation import ensure, positive


@dataclass(frozen=True)
class BoundConfig:
    """
    Settings read by gpbound.bounds.

    Attributes:
        fast: Return closed-form ball bounds without running the solver
        cross_check: Also solve closed-form cases and log any disagreement
        agreement_rtol: Relative tolerance for closed-form/solver agreement
        solver: Barrier method settings
    """

    fast: bool = False
    cross_check: bool = False
    agreement_rtol: float = 1e-6
    solver: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        ensure({"agreement_rtol": (self.agreement_rtol, [positive()])})
        if not isinstance(self.solver, SolverSettings):
            raise TypeError(f"Expected SolverSettings, got {type(self.solver)}")


_current_config: ContextVar[BoundConfig] = ContextVar("bound_config", default=BoundConfig())


def get_config() -> BoundConfig:
    """Get the active configuration."""
    return _current_config.get()


def set_config(config: BoundConfig) -> None:
    if not isinstance(config, BoundConfig):
        raise TypeError(f"Expected BoundConfig, got {type(config)}")
    _current_config.set(config)


def _apply(config: BoundConfig, overrides: dict[str, Any]) -> BoundConfig:
    solver_fields = {k: overrides.pop(k) for k in list(overrides) if k in SolverSettings.__dataclass_fields__}
    unknown = set(overrides) - set(BoundConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"Unknown config option(s): {', '.join(sorted(unknown))}")
    if solver_fields:
        overrides["solver"] = replace(overrides.get("solver", config.solver), **solver_fields)
    return replace(config, **overrides)


def configure(**overrides: Any) -> BoundConfig:
    """
    Replace fields of the active configuration.

    Solver fields (tolerance, max_iterations, ...) may be passed directly.

    Example:
        configure(cross_check=True, tolerance=1e-10)
    """
    config = _apply(get_config(), overrides)
    _current_config.set(config)
    return config


@contextmanager
def using_config(**overrides: Any) -> Iterator[BoundConfig]:
    """Temporarily override configuration fields within a block."""
    token = _current_config.set(_apply(get_config(), overrides))
    try:
        yield _current_config.get()
    finally:
        _current_config.reset(token)
