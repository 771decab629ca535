"""
Logging setup shared by the CLI, the HTTP service and the scripts.
"""

import logging
import os
import sys
from datetime import datetime
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None) -> logging.Logger:
    """
    Configure root logging for a run.

    Args:
        level: Level name; falls back to MEISSNER_LOG_LEVEL, then INFO
        log_dir: When given, also write a timestamped run log there

    Returns:
        The package logger
    """
    load_dotenv()
    level_name = (level or os.getenv("MEISSNER_LOG_LEVEL", "INFO")).upper()

    # stdout carries result artifacts when no output path is set
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(
            log_dir, f"meissner_run_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
        )
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    return logging.getLogger("meissner")
