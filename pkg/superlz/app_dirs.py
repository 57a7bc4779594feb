"""Application directory utilities for cross-platform file storage."""

import os
import platform
from pathlib import Path

APP_NAME = "superlz"


def _ensure(path):
    path.mkdir(parents=True, exist_ok=True)
    return path


def get_app_config_dir():
    """Get application config directory following platform conventions.

    ``SUPERLZ_CONFIG_DIR`` overrides the platform default.

    Returns:
        Path: Platform-appropriate config directory
        - macOS: ~/Library/Application Support/superlz
        - Windows: %APPDATA%/superlz
        - Linux: ~/.config/superlz
    """
    override = os.environ.get('SUPERLZ_CONFIG_DIR')
    if override:
        return _ensure(Path(override))

    if platform.system() == 'Darwin':
        config_dir = Path.home() / "Library" / "Application Support" / APP_NAME
    elif platform.system() == 'Windows':
        config_dir = Path(os.environ.get('APPDATA', Path.home())) / APP_NAME
    else:
        config_dir = Path(os.environ.get('XDG_CONFIG_HOME', Path.home() / ".config")) / APP_NAME

    return _ensure(config_dir)


def get_app_log_dir():
    """Get application log directory following platform conventions.

    ``SUPERLZ_LOG_DIR`` overrides the platform default.

    Returns:
        Path: Platform-appropriate log directory
        - macOS: ~/Library/Logs/superlz
        - Windows: %LOCALAPPDATA%/superlz/logs
        - Linux: ~/.local/state/superlz
    """
    override = os.environ.get('SUPERLZ_LOG_DIR')
    if override:
        return _ensure(Path(override))

    if platform.system() == 'Darwin':
        log_dir = Path.home() / "Library" / "Logs" / APP_NAME
    elif platform.system() == 'Windows':
        log_dir = Path(os.environ.get('LOCALAPPDATA', Path.home())) / APP_NAME / "logs"
    else:
        log_dir = Path(os.environ.get('XDG_STATE_HOME', Path.home() / ".local" / "state")) / APP_NAME

    return _ensure(log_dir)


def get_user_defaults_path():
    """Path of the optional user defaults file (JSON, same schema as ``--config``)."""
    return get_app_config_dir() / "defaults.json"
