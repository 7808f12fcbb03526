"""Sentinel-account monitoring of cross-community content spread on retweet networks."""

__version__ = "0.1.0"
