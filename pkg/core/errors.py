"""
Error hierarchy for ptyx
Every failure raised by the core carries one of these types; budget exhaustion is
reported through result statuses instead.
"""

from typing import Optional


class PtyxError(Exception):
    """Base exception for ptyx"""

    exit_code = 1


class UnknownElementError(PtyxError):
    """A code was compared that the order never enumerates"""

    pass


class PatternInconsistencyError(PtyxError):
    """A denotation system answered a merge pattern inconsistently"""

    pass


class ArityMismatchError(PtyxError):
    """A map or denotation does not fit the arity or domain it was applied to"""

    pass


class MalformedFormulaError(PtyxError):
    """Formula is not closed, not well formed, or uses an undeclared symbol"""

    pass


class StructureMismatchError(PtyxError):
    """Two search trees are not related by constant relabeling"""

    pass


class BranchNotSaturatedError(PtyxError):
    """Countermodel extraction was asked for a branch that is not an open leaf"""

    pass


class StreamExhaustedError(PtyxError):
    """A theory stream has fewer entries than requested"""

    pass


class FixtureError(PtyxError):
    """A referenced file could not be read or failed validation"""

    pass


class ExpressionSyntaxError(PtyxError):
    """Expression text does not match the grammar"""

    exit_code = 2

    def __init__(
        self,
        message: str,
        token: Optional[str] = None,
        production: Optional[str] = None,
        position: Optional[int] = None,
    ):
        self.token = token
        self.production = production
        self.position = position
        details = []
        if token is not None:
            details.append(f"token {token!r}")
        if position is not None:
            details.append(f"at {position}")
        if production is not None:
            details.append(f"in <{production}>")
        super().__init__(f"{message} ({', '.join(details)})" if details else message)
