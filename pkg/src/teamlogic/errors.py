"""Exception hierarchy shared by all modules."""


class TeamLogicError(Exception):
    """Base class for every error raised by this package."""


class FormulaSyntaxError(TeamLogicError):
    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
            if text is not None:
                message += f"\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class UnknownSymbolError(TeamLogicError):
    pass


class ArityError(TeamLogicError):
    pass


class FragmentError(TeamLogicError):
    """A formula lies outside the fragment an operation requires."""


class StructureFormatError(TeamLogicError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TeamError(TeamLogicError):
    pass


class TeamTooLarge(TeamError):
    pass


class EvaluationError(TeamLogicError):
    pass


class TilingError(TeamLogicError):
    pass
