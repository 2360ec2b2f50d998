"""Test modules."""
