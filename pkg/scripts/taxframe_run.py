#!/usr/bin/env python3
"""Operator entry point; run from the repository root with PYTHONPATH=. ."""

from taxframe.cli import cli_main

if __name__ == "__main__":
    raise SystemExit(cli_main())
