"""Source models and their exact n-fold structure."""
