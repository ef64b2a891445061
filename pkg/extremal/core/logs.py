import logging
import sys

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str = "WARNING") -> None:
    """Install a single stderr handler on the package logger, or point the existing one at the current stderr."""
    logger = logging.getLogger("extremal")
    logger.setLevel(level.upper())
    for handler in logger.handlers:
        if getattr(handler, "_extremal", False):
            handler.setStream(sys.stderr)
            return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._extremal = True
    logger.addHandler(handler)
