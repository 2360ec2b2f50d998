"""Exact finite-distribution arithmetic in nats."""
