"""Information-spectrum quantities and the standard normal."""
