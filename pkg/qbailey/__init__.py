"""qbailey - exact q-series engine for higher-level conjugate Bailey pairs."""

__version__ = "0.1.0"
