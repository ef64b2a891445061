import logging

from extremal.core.config import Settings
from extremal.core.logs import configure_logging
from extremal.schemas.spectral import EstimatorConfig


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("EXTREMAL_JOBS", "3")
    monkeypatch.setenv("extremal_search_starts", "4")
    settings = Settings(_env_file=None)
    assert settings.JOBS == 3
    assert settings.SEARCH_STARTS == 4
    assert settings.DEFAULT_STARTS == 64


def test_debug_forces_debug_level(monkeypatch):
    monkeypatch.setenv("EXTREMAL_DEBUG", "true")
    monkeypatch.setenv("EXTREMAL_LOG_LEVEL", "info")
    assert Settings(_env_file=None).effective_log_level == "DEBUG"
    monkeypatch.setenv("EXTREMAL_DEBUG", "false")
    assert Settings(_env_file=None).effective_log_level == "INFO"


def test_estimator_defaults_from_settings():
    cfg = EstimatorConfig.from_settings(starts=5)
    assert cfg.starts == 5
    assert cfg.seed == 0


def test_configure_logging_installs_one_handler():
    configure_logging("info")
    configure_logging("debug")
    logger = logging.getLogger("extremal")
    assert logger.level == logging.DEBUG
    assert sum(getattr(h, "_extremal", False) for h in logger.handlers) == 1
