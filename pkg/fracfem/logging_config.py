from __future__ import annotations

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

from fracfem.infra.settings import SettingsLoader

PACKAGE_LOGGER = "fracfem"
# per-solve chatter; SOLVER_LOG_LEVEL keeps it out of the table log unless asked for
SOLVER_LOGGERS = (
    "fracfem.special_functions",
    "fracfem.spectral",
    "fracfem.exact_solutions",
    "fracfem.timestep_l1",
)
LOG_FILE = "fracfem.log"

_handlers: list[logging.Handler] = []


def _level(name: str) -> int:
    level = logging.getLevelName(str(name).upper())
    return level if isinstance(level, int) else logging.INFO


def configure_logging(settings: SettingsLoader | None = None) -> Path:
    """Attach a rotating file handler and a stderr handler to the fracfem loggers.

    Records still propagate to the root logger. Warnings from the warnings module
    (quadrature and overflow notices from scipy and numpy) go to the same file.
    Calling it again is a no-op; returns the log file path.
    """
    settings = settings or SettingsLoader()
    log_dir = Path(settings.get("LOG_DIR", "logs"))
    path = log_dir / LOG_FILE
    if _handlers:
        return path
    log_dir.mkdir(parents=True, exist_ok=True)

    level = _level(settings.get("LOG_LEVEL", "INFO"))
    formatter = logging.Formatter(fmt=str(settings.get("LOG_FORMAT", "%(levelname)s %(message)s")))

    file_handler = RotatingFileHandler(filename=str(path), maxBytes=2_000_000, backupCount=5, encoding="utf-8")
    # stdout carries tables and ML values, so the console handler goes to stderr
    console_handler = logging.StreamHandler()
    for handler in (file_handler, console_handler):
        handler.setFormatter(formatter)
        _handlers.append(handler)

    package = logging.getLogger(PACKAGE_LOGGER)
    package.setLevel(level)
    package.addHandler(file_handler)
    package.addHandler(console_handler)

    solver_level = _level(settings.get("SOLVER_LOG_LEVEL", "WARNING"))
    for name in SOLVER_LOGGERS:
        logging.getLogger(name).setLevel(solver_level)

    logging.captureWarnings(True)
    logging.getLogger("py.warnings").addHandler(file_handler)

    package.info(f"logging configured path={path} level={logging.getLevelName(level)} solver_level={logging.getLevelName(solver_level)}")
    return path


def reset_logging() -> None:
    """Detach and close what configure_logging attached."""
    package = logging.getLogger(PACKAGE_LOGGER)
    warnings_logger = logging.getLogger("py.warnings")
    for handler in _handlers:
        package.removeHandler(handler)
        warnings_logger.removeHandler(handler)
        handler.close()
    _handlers.clear()
    package.setLevel(logging.NOTSET)
    for name in SOLVER_LOGGERS:
        logging.getLogger(name).setLevel(logging.NOTSET)
    logging.captureWarnings(False)
