"""Communication-efficient convex agreement: library and round simulator."""

__version__ = "0.1.0"
