"""Console entry point for qbailey."""

import logging
import sys
from typing import Optional, Sequence

from qbailey import __version__
from qbailey.config import settings

# Configure logging; stdout is reserved for tables and report lines
logging.basicConfig(
    level=logging.DEBUG if settings.DEBUG else logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler(sys.stderr)],
)
logger = logging.getLogger(__name__)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one CLI verb and return its exit status."""
    from qbailey.cli import run_cli

    logger.debug(f"qbailey v{__version__} (workers={settings.WORKERS})")
    return run_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
