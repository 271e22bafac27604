"""Decide do-calculus rules and cluster d-separation on cluster graphs."""
__version__ = "0.1.0"
