"""Exception hierarchy.

The CLI maps these onto exit codes: ``BudgetError`` exits with 3, every
other ``ShapleyError`` with 2.
"""


class ShapleyError(Exception):
    """Base class for all errors raised by shapmc."""


class DimensionError(ShapleyError, ValueError):
    """Vectors, masks or layers whose lengths do not line up."""


class ConfigurationError(ShapleyError, ValueError):
    """A game, model or experiment was set up inconsistently."""


class BudgetError(ShapleyError, ValueError):
    """A sampling budget is invalid or an exact computation is too large."""


class ParseError(ShapleyError, ValueError):
    """Malformed model or dataset file."""


class NumericError(ShapleyError, ArithmeticError):
    """A non-finite value appeared where only finite values are allowed."""
