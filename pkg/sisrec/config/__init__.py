"""Configuration management for sisrec."""

from sisrec.config.settings import Settings, get_settings, reset_settings

__all__ = ["Settings", "get_settings", "reset_settings"]
