"""Utility functions for the toolkit."""

import logging
import sys
from pathlib import Path
from typing import Optional


def setup_logging(log_file: Optional[str] = None, level: str = "WARNING", console_output: bool = True,
                  file_output: bool = False,
                  fmt: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'):
    """
    Setup logging configuration.

    The console handler writes to stderr; stdout carries the JSON reports.

    Args:
        log_file: Path to log file
        level: Logging level
        console_output: Whether to output to console
        file_output: Whether to output to file
        fmt: Record format
    """
    logger = logging.getLogger()
    logger.setLevel(getattr(logging, level))
    for handler in list(logger.handlers):
        if getattr(handler, "_momentkit", False):
            logger.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(fmt)

    # Console handler
    if console_output:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        console_handler._momentkit = True
        logger.addHandler(console_handler)

    # File handler
    if file_output and log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path)
        file_handler.setFormatter(formatter)
        file_handler._momentkit = True
        logger.addHandler(file_handler)


def format_time(seconds: float) -> str:
    """
    Format time in seconds to human-readable format.

    Args:
        seconds: Time in seconds

    Returns:
        Formatted time string
    """
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    elif seconds < 60:
        return f"{seconds:.1f}s"
    else:
        minutes = seconds / 60
        return f"{minutes:.1f}m"


def relative_scale(*values: float) -> float:
    """max(1, |v|...), the reference magnitude for relative tolerance bands."""
    return max([1.0] + [abs(float(v)) for v in values])
