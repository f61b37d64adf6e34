"""Joint temporal and causal relation inference under global constraints."""

__version__ = "0.1.0"
