#!/usr/bin/env python3
"""Main entry point for branched when run as a module."""

from branched.cli import main

if __name__ == "__main__":
    main()
