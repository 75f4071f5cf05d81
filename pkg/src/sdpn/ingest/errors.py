from __future__ import annotations


class ParseError(ValueError):
    """A syntax or declaration error, located by line and column (1-based)."""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        if line:
            where += f"{line}:{column}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")
