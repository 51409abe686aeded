"""Exception types shared across the toolkit."""


class TodkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(TodkitError):
    """Malformed linear belief/action text.

    ``position`` is the 0-based token index at which parsing failed.
    """

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at token {position})"
        super().__init__(message)
        self.position = position


class CorpusError(TodkitError):
    """Invalid corpus, ontology, or DB file content.

    Carries the dialog id and turn index when the failure is localized.
    """

    def __init__(self, message: str, dialog_id: str | None = None, turn: int | None = None):
        where = ""
        if dialog_id is not None:
            where = f" [dialog {dialog_id}" + (f", turn {turn}]" if turn is not None else "]")
        super().__init__(message + where)
        self.dialog_id = dialog_id
        self.turn = turn


class MatrixFormatError(TodkitError):
    """Similarity-matrix file has a bad magic/version or a truncated payload."""
