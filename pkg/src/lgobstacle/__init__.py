"""Least-gradient obstacle problem solved level by level with exact min cuts."""
__version__ = "0.1.0"
