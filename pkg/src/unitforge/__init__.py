"""Search-based generation and balance testing of new RTS units."""

__version__ = "0.1.0"
