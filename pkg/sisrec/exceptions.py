"""Custom exception classes for sisrec"""

from typing import Any


class SisrecError(Exception):
    """Base class for every error raised by the package"""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        self.message = message
        self.details = details or {}
        super().__init__(message)


class ValidationError(SisrecError):
    """Exception raised when an argument or precondition check fails"""


class WindowError(SisrecError):
    """Exception raised when a sequence support does not fit the required window"""

    def __init__(
        self,
        message: str,
        required: tuple[int, int] | None = None,
        actual: tuple[int, int] | None = None,
    ):
        self.required = required
        self.actual = actual
        details: dict[str, Any] = {}
        if required is not None:
            details["required"] = list(required)
        if actual is not None:
            details["actual"] = list(actual)
        super().__init__(message, details)


class ConditioningError(SisrecError):
    """Exception raised when a slice basis is numerically rank deficient"""

    def __init__(self, roots: list[complex], rank: int, expected: int):
        self.roots = roots
        self.rank = rank
        self.expected = expected
        roots_str = ", ".join(f"{w:.6g}" for w in roots)
        super().__init__(
            f"Ill-conditioned subspace basis (rank {rank} < {expected}) for roots: {roots_str}",
            {"roots": [[w.real, w.imag] for w in roots], "rank": rank, "expected": expected},
        )


class OverflowGuardError(SisrecError):
    """Exception raised when a root power would exceed the floating point range"""

    def __init__(self, root: complex, index: int):
        self.root = root
        self.index = index
        super().__init__(
            f"|w|^|t| overflows for root {root:.6g} at t={index}",
            {"root": [root.real, root.imag], "index": index},
        )


class ExportError(SisrecError):
    """File import/export error with path context"""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}", {"path": path})


class CertificateError(SisrecError):
    """Exception raised when a constructed filter misses a norm certificate"""

    def __init__(self, name: str, measured: float, bound: float):
        self.name = name
        self.measured = measured
        self.bound = bound
        super().__init__(
            f"Certificate {name} failed: {measured:.6g} > {bound:.6g}",
            {"certificate": name, "measured": measured, "bound": bound},
        )
