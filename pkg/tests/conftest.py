"""Shared fixtures."""

import pytest

from superlz.diagnostics import logger


@pytest.fixture(autouse=True)
def isolated_app_dirs(tmp_path, monkeypatch):
    """Keep logs and user defaults inside the test's tmp dir."""
    monkeypatch.setenv("SUPERLZ_CONFIG_DIR", str(tmp_path / "config"))
    monkeypatch.setenv("SUPERLZ_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(logger, "log_file", None)
    monkeypatch.setattr(logger, "_file_failed", False)
    monkeypatch.setattr(logger, "errors", [])
    monkeypatch.setattr(logger, "echo_level", "INFO")
    yield
