"""Heterogeneous multiscale wall laws for flow over rough boundaries."""

__version__ = "0.1.0"
