#!/usr/bin/env python3
"""
Startup script for the Meissner solver HTTP service.
This script starts the FastAPI server with proper configuration.
"""

import os
from pathlib import Path

import uvicorn

from meissner.logging_setup import setup_logging


def main():
    """Start the Meissner server."""
    logger = setup_logging()
    logger.info("🚀 Starting Meissner solver server...")

    env_file = Path(".env")
    if not env_file.exists():
        logger.info("ℹ️  No .env file found, using MEISSNER_* environment variables and defaults")

    host = os.getenv("MEISSNER_HOST", "0.0.0.0")
    port = int(os.getenv("MEISSNER_PORT", "8000"))
    logger.info(f"🌐 Starting server on http://{host}:{port}")

    uvicorn.run(
        "meissner.api:app",
        host=host,
        port=port,
        reload=False,
        log_level="info"
    )


if __name__ == "__main__":
    main()
