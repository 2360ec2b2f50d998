"""Numeric search helpers."""
