"""Command line commands module."""
