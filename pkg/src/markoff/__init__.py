"""Markoff surface solutions over Z/nZ: tables, group actions and certificates."""

__version__ = "0.1.0"

DEFAULT_SEED = 20177
