"""Universal constructions via the method of types."""
