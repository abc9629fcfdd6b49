"""
Structured logging for numerical runs.

This module provides the StructuredLogger class that emits JSON log lines
(via python-json-logger) with consistent fields for solver runs, filter
certificates and Monte Carlo trials.
"""

import logging
from typing import Any

from pythonjsonlogger import jsonlogger

from sisrec.config.settings import Settings

SERVICE_NAME = "sisrec"
PLAIN_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """
    JSON formatter adding timestamp, level, logger and exception fields.

    Example:
        >>> formatter = CustomJsonFormatter()
        >>> handler = logging.StreamHandler()
        >>> handler.setFormatter(formatter)
    """

    def add_fields(
        self, log_record: dict[str, Any], record: logging.LogRecord, message_dict: dict[str, Any]
    ) -> None:
        """
        Add custom fields to the log record.

        Args:
            log_record: Dictionary that will be serialized to JSON
            record: Original logging.LogRecord
            message_dict: Dictionary from the log message
        """
        super().add_fields(log_record, record, message_dict)

        log_record["timestamp"] = self.formatTime(record, self.datefmt)
        log_record["level"] = record.levelname
        log_record["logger"] = record.name

        if record.exc_info:
            log_record["exception"] = self.formatException(record.exc_info)


def _make_formatter(json_lines: bool) -> logging.Formatter:
    if json_lines:
        return CustomJsonFormatter("%(timestamp)s %(level)s %(name)s %(message)s")
    return logging.Formatter(PLAIN_FORMAT)


class StructuredLogger:
    """
    Wraps a standard logger with helpers for operations and certificates.

    Attributes:
        logger: Underlying Python logger instance
        service_name: Service name included in every record

    Example:
        >>> logger = StructuredLogger.create(__name__)
        >>> logger.log_operation_start("fit_filter", n=40, s=2)
        >>> logger.log_operation_complete("fit_filter", duration=0.31, iterations=412)
    """

    def __init__(self, logger: logging.Logger, service_name: str = SERVICE_NAME):
        self.logger = logger
        self.service_name = service_name

    @classmethod
    def create(
        cls, name: str, service_name: str = SERVICE_NAME, level: int | None = None
    ) -> "StructuredLogger":
        """
        Create a StructuredLogger.

        Handlers live on the ``sisrec`` package logger (see ``configure_logging``);
        a handler is attached here only when neither the logger nor the package
        logger has one, so records are never duplicated.

        Args:
            name: Logger name (typically __name__)
            service_name: Service name for log context
            level: Optional explicit logging level

        Returns:
            StructuredLogger instance
        """
        logger = logging.getLogger(name)
        if level is not None:
            logger.setLevel(level)

        package_logger = logging.getLogger(SERVICE_NAME)
        if not logger.handlers and not package_logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(_make_formatter(json_lines=True))
            package_logger.addHandler(handler)
            if package_logger.level == logging.NOTSET:
                package_logger.setLevel(logging.WARNING)

        return cls(logger, service_name)

    def _build_context(self, **kwargs: Any) -> dict[str, Any]:
        context: dict[str, Any] = {"service.name": self.service_name}
        context.update(kwargs)
        return context

    def log_operation_start(self, operation: str, **context: Any) -> None:
        """
        Log the start of a numerical operation.

        Args:
            operation: Operation name (fit_filter, hybrid_filter, run_monte_carlo, ...)
            **context: Problem sizes and other fields
        """
        log_context = self._build_context(operation=operation, **context)
        self.logger.info(f"Starting {operation}", extra=log_context)

    def log_operation_complete(self, operation: str, duration: float, **context: Any) -> None:
        """
        Log operation completion with its duration.

        Args:
            operation: Operation name
            duration: Duration in seconds
            **context: Outcome fields (iterations, objective, converged, ...)
        """
        duration_ms = duration * 1000
        log_context = self._build_context(
            operation=operation, duration_ms=round(duration_ms, 2), **context
        )
        self.logger.info(f"Completed {operation} in {duration_ms:.2f}ms", extra=log_context)

    def log_error(self, operation: str, error: Exception, **context: Any) -> None:
        """
        Log an operation failure with exception details.

        Args:
            operation: Operation that failed
            error: The exception raised
            **context: Additional context fields
        """
        log_context = self._build_context(
            operation=operation,
            error_type=type(error).__name__,
            error_message=str(error),
            **context,
        )
        self.logger.error(f"{operation} failed: {error}", extra=log_context, exc_info=True)

    def log_certificate(self, name: str, measured: float, bound: float, **context: Any) -> None:
        """
        Log a norm certificate; failures are logged at WARNING.

        Args:
            name: Certificate name
            measured: Measured value
            bound: Upper bound it must not exceed
            **context: Additional context fields
        """
        passed = measured <= bound
        log_context = self._build_context(
            certificate=name, measured=measured, bound=bound, passed=passed, **context
        )
        level = logging.INFO if passed else logging.WARNING
        verdict = "holds" if passed else "VIOLATED"
        self.logger.log(
            level, f"Certificate {name} {verdict}: {measured:.6g} <= {bound:.6g}", extra=log_context
        )

    def debug(self, message: str, **context: Any) -> None:
        """Log debug message with context."""
        self.logger.debug(message, extra=self._build_context(**context))

    def info(self, message: str, **context: Any) -> None:
        """Log info message with context."""
        self.logger.info(message, extra=self._build_context(**context))

    def warning(self, message: str, **context: Any) -> None:
        """Log warning message with context."""
        self.logger.warning(message, extra=self._build_context(**context))

    def error(self, message: str, exc_info: bool = False, **context: Any) -> None:
        """Log error message with context."""
        self.logger.error(message, extra=self._build_context(**context), exc_info=exc_info)


def configure_logging(settings: Settings) -> None:
    """
    Configure the ``sisrec`` package logger from settings.

    Replaces any handler previously installed on the package logger.

    Args:
        settings: Loaded settings (log_level, log_json)
    """
    package_logger = logging.getLogger(SERVICE_NAME)
    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(_make_formatter(settings.log_json))
    package_logger.addHandler(handler)
    package_logger.setLevel(settings.log_level)


def get_logger(name: str, service_name: str = SERVICE_NAME) -> StructuredLogger:
    """
    Get a structured logger instance.

    Args:
        name: Logger name (typically __name__)
        service_name: Service name for log context

    Returns:
        StructuredLogger instance
    """
    return StructuredLogger.create(name, service_name)


__all__ = [
    "CustomJsonFormatter",
    "StructuredLogger",
    "configure_logging",
    "get_logger",
]
