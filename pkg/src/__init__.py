"""socint - finite-blocklength source coding and intrinsic randomness toolkit."""

__version__ = "0.1.0"
