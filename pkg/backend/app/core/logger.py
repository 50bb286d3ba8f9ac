import os
import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """
    Route log records to stderr through rich.

    Stdout is reserved for machine-readable command output.
    """
    global _configured
    if _configured:
        return

    level = (level or os.getenv("SERNN_LOG_LEVEL", "WARNING")).upper()
    handler = RichHandler(
        console=Console(stderr=True),
        show_time=False,
        show_path=False,
        rich_tracebacks=False,
    )
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler])
    _configured = True
