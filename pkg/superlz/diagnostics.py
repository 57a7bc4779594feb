"""Session logging and environment diagnostics."""

import sys
import traceback
from pathlib import Path
from datetime import datetime
import platform
import os

from superlz import __version__
from superlz.app_dirs import get_app_log_dir

LEVELS = {"DEBUG": 10, "INFO": 20, "WARN": 30, "ERROR": 40}


class RunLogger:
    """Log session activity to file and stderr.

    The log file is opened lazily on the first message, so importing the
    package never touches the filesystem. If the log directory cannot be
    created the logger keeps working on stderr alone.
    """

    def __init__(self, log_name="superlz.log", echo_level="INFO"):
        self.log_name = log_name
        self.log_file = None
        self.errors = []
        self.echo_level = echo_level
        self._file_failed = False

    def _open(self):
        """Resolve the log file and write the session header."""
        if self.log_file is not None or self._file_failed:
            return
        try:
            self.log_file = get_app_log_dir() / self.log_name
            self._write_header()
        except OSError:
            self.log_file = None
            self._file_failed = True

    def _write_header(self):
        """Write session header."""
        with open(self.log_file, 'a', encoding='utf-8') as f:
            f.write("=== superlz session ===\n")
            f.write(f"Session: {datetime.now()}\n")
            f.write(f"Version: {__version__}\n")
            f.write(f"Platform: {platform.system()} {platform.release()}\n")
            f.write(f"Python: {sys.version}\n")
            f.write(f"CWD: {os.getcwd()}\n")
            f.write("=" * 50 + "\n\n")

    def set_echo_level(self, level):
        """Only messages at or above ``level`` are echoed to stderr."""
        if level not in LEVELS:
            raise ValueError(f"unknown log level: {level}")
        self.echo_level = level

    def log(self, message, level="INFO"):
        """Log a message."""
        timestamp = datetime.now().strftime("%H:%M:%S.%f")[:-3]
        log_line = f"[{timestamp}] [{level}] {message}\n"

        self._open()
        if self.log_file is not None:
            try:
                with open(self.log_file, 'a', encoding='utf-8') as f:
                    f.write(log_line)
            except OSError:
                self._file_failed = True
                self.log_file = None

        if LEVELS.get(level, 20) >= LEVELS[self.echo_level]:
            print(log_line.rstrip(), file=sys.stderr)

        if level == "ERROR":
            self.errors.append(message)

    def debug(self, message):
        self.log(message, "DEBUG")

    def warn(self, message):
        self.log(message, "WARN")

    def error(self, message):
        self.log(message, "ERROR")

    def log_exception(self, exc, context=""):
        """Log an exception with full traceback."""
        exc_text = "".join(traceback.format_exception(type(exc), exc, exc.__traceback__))
        self.log(f"EXCEPTION in {context}:\n{exc_text}", "ERROR")

    def get_errors(self):
        """Return all logged errors."""
        return self.errors

    def get_log_path_display(self):
        """Get user-friendly log path for display."""
        self._open()
        if self.log_file is None:
            return "<stderr only>"
        try:
            rel_path = self.log_file.relative_to(Path.home())
            return f"~/{rel_path}"
        except ValueError:
            return str(self.log_file)


# Global logger instance
logger = RunLogger()


def run_startup_diagnostics():
    """Check the interpreter and the numerical stack.

    Returns:
        list[str]: human-readable issues, empty when everything imports.
    """
    logger.log("Starting diagnostics")

    issues = []

    logger.log(f"Checking Python version: {sys.version_info}")
    if sys.version_info < (3, 10):
        issues.append(f"Python version too old: {sys.version_info}. Need >= 3.10")

    for module_name in ("numpy", "scipy", "tqdm"):
        try:
            module = __import__(module_name)
            logger.log(f"✓ {module_name} import OK (version: {getattr(module, '__version__', 'unknown')})")
        except ImportError as e:
            issues.append(f"{module_name} import failed: {e}")
            logger.log_exception(e, f"{module_name} import")

    try:
        from scipy.integrate import solve_ivp  # noqa: F401
        from scipy.interpolate import PchipInterpolator  # noqa: F401
        from scipy.signal import find_peaks  # noqa: F401
        logger.log("✓ scipy submodules OK")
    except ImportError as e:
        issues.append(f"scipy submodule import failed: {e}")
        logger.log_exception(e, "scipy submodules")

    logger.log("Diagnostics complete")
    logger.log(f"Issues found: {len(issues)}")

    return issues
