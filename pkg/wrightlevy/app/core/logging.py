"""
Logging for wrightlevy

Library modules only call get_logger; handlers are installed by setup_logging.
Records carry the operation and seed set with run_context.
"""
import contextvars
import logging
import logging.handlers
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

from wrightlevy.app.core.config import settings

CONSOLE_FORMAT = "%(levelname)s [%(operation)s] %(message)s"
FILE_FORMAT = "%(asctime)s %(levelname)s %(name)s [%(operation)s seed=%(seed)s] %(message)s"

_operation: contextvars.ContextVar[str] = contextvars.ContextVar("operation", default="-")
_seed: contextvars.ContextVar[Optional[int]] = contextvars.ContextVar("seed", default=None)


@contextmanager
def run_context(operation: str, seed: Optional[int] = None) -> Iterator[None]:
    """Tag every record logged inside the block with operation (and seed, if given)"""
    op_token = _operation.set(operation)
    seed_token = _seed.set(seed if seed is not None else _seed.get())
    try:
        yield
    finally:
        _seed.reset(seed_token)
        _operation.reset(op_token)


class ContextFilter(logging.Filter):
    """Stamp records with the active run_context"""

    def filter(self, record: logging.LogRecord) -> bool:
        record.operation = _operation.get()
        seed = _seed.get()
        record.seed = "-" if seed is None else seed
        return True


def _level(name: Optional[str]) -> int:
    level = logging.getLevelName((name or settings.LOG_LEVEL).upper())
    return level if isinstance(level, int) else logging.INFO


def setup_logging(
    log_level: Optional[str] = None,
    log_to_file: bool = False,
    log_dir: Optional[str] = None,
) -> logging.Logger:
    """
    Configure the wrightlevy logger tree for a CLI run

    Console output goes to stderr; stdout is reserved for tables and JSON.
    With log_to_file, a rotating <PROJECT_NAME>.log is also written under log_dir.

    Returns:
        The package logger
    """
    level = _level(log_level)
    package = logging.getLogger("wrightlevy")
    package.setLevel(level)
    package.propagate = False
    for handler in package.handlers[:]:
        package.removeHandler(handler)
        handler.close()

    context = ContextFilter()
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    console.addFilter(context)
    package.addHandler(console)

    if log_to_file:
        path = Path(log_dir or "logs")
        path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            path / f"{settings.PROJECT_NAME}.log", maxBytes=5_000_000, backupCount=3, encoding="utf-8"
        )
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        file_handler.addFilter(context)
        package.addHandler(file_handler)

    package.debug(f"logging at {logging.getLevelName(level)}")
    return package


def get_logger(name: str) -> logging.Logger:
    logger = logging.getLogger(name)
    if not logger.handlers:
        logger.addHandler(logging.NullHandler())
    return logger
