"""Error taxonomy shared by all modules."""

from __future__ import annotations


class HypergamesError(Exception):
    """Base class for all artifact errors."""


class ParseError(HypergamesError):
    """Syntax error carrying a 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ValidationError(HypergamesError):
    """Semantic violation; carries the offending construct."""

    def __init__(self, message: str, construct: object = None):
        super().__init__(message)
        self.construct = construct


class ResourceLimitError(HypergamesError):
    """A configured budget was exceeded; carries the budget that tripped."""

    def __init__(self, message: str, budget: object = None):
        super().__init__(message)
        self.budget = budget
