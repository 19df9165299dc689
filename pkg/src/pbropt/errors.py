"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the physical domain of the operation."""


class NonConvergence(RuntimeError):
    """An iterative numerical routine failed to reach its tolerance."""


class InvalidBracket(ValueError):
    """A root bracket whose endpoints do not straddle a sign change."""


class StepUnderflow(RuntimeError):
    """The adaptive ODE step collapsed below the resolvable step size."""


class BracketMiss(RuntimeError):
    """Automatic bracket expansion hit its cap before enclosing a maximum."""


class InfeasibleRespiration(ValueError):
    """Respiration at or above the maximal growth rate: no compensation point."""


class DegenerateRange(ValueError):
    """A fitting range with zero width."""


class ConfigError(ValueError):
    """A control configuration violating its feasibility constraints."""


class ParameterFileError(ValueError):
    """A parameter file that cannot be parsed or carries unknown keys."""


class RegimeWarning(UserWarning):
    """The closed loop entered a regime where net volumetric growth is negative."""
