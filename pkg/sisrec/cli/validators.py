"""
Validation helpers for CLI inputs.

Each check returns ``(is_valid, error_message)`` so commands can report a
readable message before any numerical work starts.
"""

from pathlib import Path

from sisrec.exceptions import SisrecError


class InputValidator:
    """Validator class for command-line inputs."""

    @staticmethod
    def validate_input_file(path: Path) -> tuple[bool, str]:
        """
        Check that an input path names a readable JSON file.

        Args:
            path: Path given on the command line

        Returns:
            Tuple of (is_valid, error_message). If valid, error_message is empty.

        Examples:
            >>> InputValidator.validate_input_file(Path("missing.json"))
            (False, "Input file 'missing.json' does not exist")
        """
        if not path.exists():
            return False, f"Input file '{path}' does not exist"
        if not path.is_file():
            return False, f"Input path '{path}' is not a file"
        if path.suffix.lower() != ".json":
            return False, f"Input file '{path}' must have a .json extension"
        return True, ""

    @staticmethod
    def validate_output_path(path: Path) -> tuple[bool, str]:
        """
        Check that an output file can be created at ``path``.

        The parent directory must exist and the path must not be a directory.
        """
        if path.exists() and path.is_dir():
            return False, f"Output path '{path}' is a directory"
        parent = path.parent if str(path.parent) else Path(".")
        if not parent.exists():
            return False, f"Output directory '{parent}' does not exist"
        return True, ""

    @staticmethod
    def validate_delta(delta: float) -> tuple[bool, str]:
        """
        Check a confidence parameter.

        Examples:
            >>> InputValidator.validate_delta(0.1)
            (True, "")
            >>> InputValidator.validate_delta(1.0)
            (False, "delta must lie strictly between 0 and 1, got 1.0")
        """
        if not 0.0 < delta < 1.0:
            return False, f"delta must lie strictly between 0 and 1, got {delta}"
        return True, ""

    @staticmethod
    def validate_order(mode: str, N: int, s: int) -> tuple[bool, str]:
        """
        Check that observations of half-width N are long enough for order s.

        Args:
            mode: Estimator mode ("core", "full" or "causal")
            N: Half-width of the observed window
            s: Subspace order

        Returns:
            Tuple of (is_valid, error_message)

        Examples:
            >>> InputValidator.validate_order("core", 40, 2)
            (True, "")
            >>> InputValidator.validate_order("full", 41, 1)
            (False, "The full-window estimator needs an even half-width, got N=41")
        """
        if s < 1:
            return False, f"Subspace order must be at least 1, got {s}"
        n = N // 2
        if mode == "core":
            if n < 1 or 2 * n + 1 < 9 * (s - 1):
                return False, f"Window N={N} is too short for order s={s} (needs 2n+1 >= 9(s-1))"
            return True, ""
        if mode == "full":
            if N % 2:
                return False, f"The full-window estimator needs an even half-width, got N={N}"
            from sisrec.services.multiscale import build_plan

            try:
                build_plan(n, s)
            except SisrecError as e:
                return False, e.message
            return True, ""
        if mode == "causal":
            if 2 * N < 4:
                return False, f"Window N={N} is too short for a causal fit"
            return True, ""
        return False, f"Unknown estimator mode '{mode}'"
