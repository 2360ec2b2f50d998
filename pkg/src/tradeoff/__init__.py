"""The source-coding folklore trade-off."""
