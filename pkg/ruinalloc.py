#!/usr/bin/env python3
"""
ruinalloc
Entry script for the command-line interface.

Usage:
    python ruinalloc.py allocate --model models/brownian_example.json --method asymptotic
    python ruinalloc.py var --model models/cp_example.json --alpha 0.01 --horizon inf
    python ruinalloc.py figures --out figures
    python ruinalloc.py verify --paths 1000000 --workers 8
"""
import sys

from src.ui.cli import main

if __name__ == '__main__':
    sys.exit(main())
