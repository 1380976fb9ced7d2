"""Jets, flat partial connections, transverse ODEs and the prolonged PSL action on truncated series."""

from .series import SeriesMatrix, TruncatedSeries

__all__ = ["SeriesMatrix", "TruncatedSeries"]
__version__ = "0.1.0"
