"""Exception types shared across the toolkit."""


class PlurilabError(Exception):
    """Base class for toolkit-specific failures."""


class UnknownNameError(PlurilabError, ValueError):
    """A builtin/subcommand/variant name is not recognised."""


class NotInteriorError(PlurilabError, ValueError):
    """A point expected to be interior is on or outside the boundary."""


class BracketError(PlurilabError, RuntimeError):
    """A ray bisection failed to bracket a boundary crossing."""


class EmptyIntersectionError(PlurilabError, ValueError):
    """An intersection domain has no interior point."""


class ConvergenceError(PlurilabError, RuntimeError):
    """An iteration hit its cap before reaching tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CertificateError(PlurilabError, ValueError):
    """A plurisubharmonicity certificate failed its sampled checks."""


class FrameError(PlurilabError, ValueError):
    """A support frame is not actually supporting at the requested point."""


class MajorantError(PlurilabError, ValueError):
    """A claimed derivative majorant fails on samples or is not integrable."""
