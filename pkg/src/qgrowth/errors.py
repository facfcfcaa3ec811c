"""Exception hierarchy shared by every qgrowth module."""


class QGrowthError(Exception):
    """Base class for all errors raised by qgrowth."""


class DomainError(QGrowthError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class DivergenceError(DomainError):
    """An integral or trajectory diverges where a finite value was requested."""


class NoRootError(QGrowthError, ValueError):
    """A root-finding target is outside the image of the bracket."""


class IntegrationError(QGrowthError, RuntimeError):
    """The ODE integrator gave up (step budget exhausted or step underflow).

    ``t`` and ``p`` hold the last accepted state when known.
    """

    def __init__(self, message, t=None, p=None):
        super().__init__(message)
        self.t = t
        self.p = p
