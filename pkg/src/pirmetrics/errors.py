"""Exception hierarchy.

Computation errors (``IdealGainZero``, ``NoPreferences`` ...) signal inputs on
which a quantity is undefined. ``DataError`` subclasses signal malformed input
files and carry the offending line number when one is known.
"""


class PirMetricsError(Exception):
    pass


class IdealGainZero(PirMetricsError):
    """Every candidate grade is zero, so the normalizer vanishes."""


class EmptyQuerySet(PirMetricsError):
    pass


class NoPreferences(PirMetricsError):
    """No query carries a FIRST/SECOND verdict; PIR is undefined."""


class EmptySweep(PirMetricsError):
    pass


class DataError(PirMetricsError, ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(self._format())

    def _format(self) -> str:
        where = ""
        if self.source is not None:
            where = self.source
        if self.line is not None:
            where = f"{where}:{self.line}" if where else f"line {self.line}"
        return f"{where}: {self.message}" if where else self.message

    def located(self, line: int | None = None, source: str | None = None) -> "DataError":
        """Return a copy of this error annotated with a line and/or source."""
        err = type(self)(
            self.message,
            line=self.line if line is None else line,
            source=self.source if source is None else source,
        )
        return err


class ParseError(DataError):
    pass


class OutOfScale(ParseError):
    pass


class DuplicateJudgment(DataError):
    pass


class DuplicatePreference(DataError):
    pass


class RankGap(DataError):
    pass


class DuplicateRank(DataError):
    pass


class DuplicateDoc(DataError):
    pass
