"""Version information for sisrec."""

__version__ = "0.1.0"
