"""Exception hierarchy.

Everything raised on purpose derives from :class:`QSPError`. Subclasses of
:class:`PreconditionError` signal that the input is well formed but the
requested construction does not apply to it; the CLI maps those to exit
code 2.
"""


class QSPError(Exception):
    """Base class for all errors raised by qspforge."""

    code = "QSPError"

    def __init__(self, message, **witness):
        super().__init__(message)
        self.witness = witness

    def to_dict(self):
        return {"error": self.code, "message": str(self), "witness": self.witness}


class DimensionMismatch(QSPError, ValueError):
    code = "DimensionMismatch"


class NotUnitary(QSPError, ValueError):
    code = "NotUnitary"


class SchemaError(QSPError, ValueError):
    code = "SchemaError"


class PreconditionError(QSPError):
    code = "PreconditionError"


class NotNormalized(PreconditionError):
    code = "NotNormalized"


class NotAPolynomialState(PreconditionError):
    code = "NotAPolynomialState"


class ConventionViolated(PreconditionError):
    code = "ConventionViolated"


class IndefiniteParity(PreconditionError):
    code = "IndefiniteParity"


class BadSupport(PreconditionError):
    code = "BadSupport"


class NotLowerable(PreconditionError):
    code = "NotLowerable"


class ZeroEndpoint(PreconditionError):
    code = "ZeroEndpoint"
