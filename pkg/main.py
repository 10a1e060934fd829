#!/usr/bin/env python3
"""
main.py - Main entry point for the rotating Kepler toolkit

This script hands the command line to cli.run_cli and exits with its code.
"""

import sys

from cli import run_cli


def main():
    """Main function to run the application."""
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
