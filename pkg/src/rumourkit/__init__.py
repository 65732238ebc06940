"""Stance classification and rumour veracity analysis for Reddit conversation trees."""

__version__ = "0.1.0"
