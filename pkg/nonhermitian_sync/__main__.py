#!/usr/bin/env python3
"""Module execution entry point for nonhermitian_sync."""

from nonhermitian_sync.main import main

if __name__ == "__main__":
    main()
