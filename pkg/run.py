#!/usr/bin/env python3
"""Entry point for mvmc without installing the console script.

Usage:
    python run.py generate spec.json data/planted
    python run.py mvmc data/planted --out runs/planted
    python run.py mvmc data/planted --sweep lambda1=1e-3..1e3 --out runs/lambda1
"""

from mvmc.cli import main

if __name__ == "__main__":
    main()
