"""Exception types shared across the package."""


class LatticeIPSError(Exception):
    """Base class for all errors raised by latticeips."""


class NotAPartialOrder(LatticeIPSError, ValueError):
    pass


class CycleError(NotAPartialOrder):
    """The reflexive-transitive closure of the input relation is not antisymmetric."""


class DuplicateElement(LatticeIPSError, ValueError):
    pass


class UnknownElement(LatticeIPSError, ValueError):
    pass


class TooLarge(LatticeIPSError, ValueError):
    """A brute-force enumeration would exceed its configured guard."""


class NotALattice(LatticeIPSError, ValueError):
    pass


class NotDistributive(LatticeIPSError, ValueError):
    pass


class NotAdditive(LatticeIPSError, ValueError):
    """A local map fails m(0) = 0 or m(x v y) = m(x) v m(y).

    ``witness`` is either the string ``"zero"`` or a pair of window
    configurations ``(x, y)`` on which additivity fails.
    """

    def __init__(self, witness, family=None):
        self.witness = witness
        self.family = family
        where = f"map {family!r}: " if family is not None else ""
        if witness == "zero":
            detail = "m(0) != 0"
        else:
            x, y = witness
            detail = f"m(x v y) != m(x) v m(y) for x={x}, y={y}"
        super().__init__(where + "not additive, " + detail)


class WindowError(LatticeIPSError, ValueError):
    """Requested times fall outside a timeline's window or are out of order."""


class GridMismatch(LatticeIPSError, ValueError):
    pass


class ModelSyntaxError(LatticeIPSError):
    """Malformed model text. Carries a 1-based line and column."""

    def __init__(self, message, line, col, origin="<string>"):
        self.message = message
        self.line = line
        self.col = col
        self.origin = origin
        super().__init__(f"{origin}:{line}:{col}: {message}")


class UnknownState(ModelSyntaxError):
    pass


class BadOffset(ModelSyntaxError):
    pass
