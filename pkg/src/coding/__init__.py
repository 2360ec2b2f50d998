"""Fixed-length source codes."""
