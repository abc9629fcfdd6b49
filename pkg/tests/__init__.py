"""Tests for fastapi-crud-cli package."""
