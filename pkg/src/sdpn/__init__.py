"""Reachability analysis for synchronized dynamic pushdown networks."""

__version__ = "0.1.0"
