"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so solver internals raise
them instead of bare ValueError wherever the failure class matters.
"""


class GuidepotError(Exception):
    """Base class for all package-specific failures."""


class ProblemFormatError(GuidepotError):
    """Problem file could not be parsed or violates a construction constraint."""


class ConfigError(GuidepotError):
    """A well-formed input combines options in an unusable way."""


class DomainError(GuidepotError):
    """Evaluation requested outside the declared domain (e.g. t outside [0, T])."""


class GuidingViolationError(GuidepotError):
    """Filtered selection came up empty: the guiding inequality failed at a point.

    Carries the witness so callers can report where the hypothesis broke.
    """

    def __init__(self, t, x, lam=None, detail=""):
        self.t = t
        self.x = x
        self.lam = lam
        self.detail = detail
        where = f"t={t!r}, x={x!r}" + (f", lambda={lam!r}" if lam is not None else "")
        super().__init__(f"empty filtered selection at {where}. {detail}".rstrip())


class DivergenceError(GuidepotError):
    """Integration produced a non-finite state."""


class DegenerateBoundaryError(GuidepotError):
    """Field vanishes (within tolerance) on the domain boundary; degree undefined."""


class InconclusiveDegreeError(GuidepotError):
    """Refinement budget exhausted before the degree could be certified."""
