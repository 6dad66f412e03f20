"""Exception types raised across the package."""


class ContextGamesError(Exception):
    """Base class for all package errors."""


class NonUnitBloch(ContextGamesError, ValueError):
    pass


class DimensionMismatch(ContextGamesError, ValueError):
    pass


class NotHermitian(ContextGamesError, ValueError):
    pass


class UnknownKind(ContextGamesError, ValueError):
    pass


class InvalidN(ContextGamesError, ValueError):
    pass


class TooLarge(ContextGamesError, ValueError):
    pass


class NoEquivalences(ContextGamesError, ValueError):
    pass


class EmptyPolytope(ContextGamesError, ValueError):
    pass


class OutOfRange(ContextGamesError, ValueError):
    pass


class ParseError(ContextGamesError, ValueError):
    """Malformed scenario text. ``where`` names the line or field."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(ContextGamesError, ValueError):
    pass
