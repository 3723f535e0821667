"""Exception types shared across the package."""


class DynirrError(ValueError):
    """Base class for all errors raised by dynirr."""


class DegreeCapExceeded(DynirrError):
    pass


class ZeroPolynomial(DynirrError):
    pass


class DivisionByZeroPolynomial(ZeroDivisionError, DynirrError):
    pass


class ZeroInput(DynirrError):
    pass


class ZeroResultant(DynirrError):
    """f^(n) and f' share a root, so f is not dynamically irreducible over Q."""

    def __init__(self, n, msg=None):
        self.n = n
        super().__init__(msg or f"Res(f^({n}), f') = 0")


class EvenModulus(DynirrError):
    pass


class BadReduction(DynirrError):
    def __init__(self, p, msg=None):
        self.p = p
        super().__init__(msg or f"p = {p} is a prime of bad reduction")


class ClassMismatch(DynirrError):
    pass


class BudgetExceeded(DynirrError):
    pass


class SquareModulus(DynirrError):
    pass


class ParseError(DynirrError):
    def __init__(self, text, offset, expected):
        self.text = text
        self.offset = offset
        self.expected = tuple(sorted(expected))
        rest = text.encode("utf-8")[offset:].decode("utf-8", errors="replace")
        got = repr(rest[0]) if rest else "end of input"
        super().__init__(
            f"parse error at offset {offset}: got {got}, expected one of {', '.join(self.expected)}"
        )
