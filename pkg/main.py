#!/usr/bin/env python3
"""
diffusion-sr - symbolic regression with a diffusion language model

This is the main entry point for the command-line tool.
"""

import logging
import sys

from src.diffusion_sr.cli import main as cli_main
from src.diffusion_sr.config.simple_settings import settings


def setup_logging():
    """Configure logging based on environment settings."""
    # stdout carries the JSON response; logs go to stderr
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def main():
    """Main entry point for the CLI."""
    try:
        settings.validate()
    except ValueError as e:
        print(e, file=sys.stderr)
        return 1
    setup_logging()
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
