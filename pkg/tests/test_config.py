"""
Tests for runtime configuration.
"""

from __future__ import annotations

import pytest

from gpbound.config import BoundConfig, configure, get_config, set_config, using_config
from gpbound.gpsolve import SolverSettings


class TestBoundConfig:
    """Tests for the BoundConfig dataclass."""

    @pytest.mark.unit
    def test_defaults(self):
        config = BoundConfig()
        assert not config.fast
        assert not config.cross_check
        assert config.agreement_rtol == 1e-6
        assert config.solver == SolverSettings()

    @pytest.mark.unit
    def test_invalid_rtol(self):
        with pytest.raises(ValueError, match="agreement_rtol"):
            BoundConfig(agreement_rtol=0.0)

    @pytest.mark.unit
    def test_solver_type_checked(self):
        with pytest.raises(TypeError):
            BoundConfig(solver={"tolerance": 1e-9})

    @pytest.mark.unit
    def test_set_config_type_checked(self):
        with pytest.raises(TypeError):
            set_config({"fast": True})


class TestConfigure:
    """Tests for configure and using_config."""

    @pytest.mark.unit
    def test_configure_replaces_fields(self):
        config = configure(fast=True)
        assert config.fast
        assert get_config() is config

    @pytest.mark.unit
    def test_solver_fields_route_to_settings(self):
        config = configure(tolerance=1e-11, max_iterations=50)
        assert config.solver.tolerance == 1e-11
        assert config.solver.max_iterations == 50
        assert config.solver.log_bound == SolverSettings().log_bound

    @pytest.mark.unit
    def test_unknown_option(self):
        with pytest.raises(ValueError, match="Unknown config option"):
            configure(speed=3)

    @pytest.mark.unit
    def test_using_config_restores(self):
        before = get_config()
        with using_config(cross_check=True, tolerance=1e-12) as config:
            assert get_config() is config
            assert config.cross_check
            assert config.solver.tolerance == 1e-12
        assert get_config() is before

    @pytest.mark.unit
    def test_using_config_restores_after_error(self):
        before = get_config()
        with pytest.raises(RuntimeError):
            with using_config(fast=True):
                raise RuntimeError
        assert get_config() is before

    @pytest.mark.unit
    def test_nested(self):
        with using_config(fast=True):
            with using_config(tolerance=1e-10):
                config = get_config()
                assert config.fast
                assert config.solver.tolerance == 1e-10
            assert get_config().solver.tolerance == SolverSettings().tolerance
