"""sisrec - estimation and detection of signals from shift-invariant subspaces."""

from sisrec.__version__ import __version__

__all__ = ["__version__"]
