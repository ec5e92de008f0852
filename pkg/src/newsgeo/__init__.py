"""Batch analytics for the geographic circulation of reputable and
non-reputable news across U.S. states, from raw comment archives."""

__version__ = "0.1.0"
