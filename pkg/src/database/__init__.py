"""Persistent cache of type-class tables."""
