import logging
from rich.console import Console
from rich.logging import RichHandler

from core.config import settings


def configure_logging(level: str = None) -> None:
    """Install a rich handler on the root logger, writing to stderr.

    Args:
        level (str): Logging level name; defaults to ``settings.LOG_LEVEL``.
    """
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )
