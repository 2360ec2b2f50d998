"""Intrinsic randomness extraction."""
