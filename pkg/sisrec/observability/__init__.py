"""Structured logging for sisrec."""

from sisrec.observability.logging import (
    CustomJsonFormatter,
    StructuredLogger,
    configure_logging,
    get_logger,
)

__all__ = ["CustomJsonFormatter", "StructuredLogger", "configure_logging", "get_logger"]
