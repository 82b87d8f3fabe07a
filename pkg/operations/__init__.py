"""Business operations module."""
