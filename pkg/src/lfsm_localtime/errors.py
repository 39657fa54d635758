"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid model, process or experiment parameters.

    ``problems`` lists every violated invariant, not just the first one.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class SpecError(ConfigurationError):
    """A process specification violates its case constraints."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedFamilyError(NotImplementedError):
    """The innovation family has no closed-form characteristic function."""


class IntegrabilityError(ArithmeticError):
    """The Fourier inversion integrand is not absolutely integrable.

    ``min_k`` is the smallest horizon for which it is, or ``None`` when no
    horizon works.
    """

    def __init__(self, message, min_k=None):
        super().__init__(message)
        self.min_k = min_k


class QuadratureError(ArithmeticError):
    """Quadrature did not reach the requested tolerance."""


class ResourceError(RuntimeError):
    """The request exceeds a configured resource cap."""


class StatisticalPowerError(ValueError):
    """Too few samples or ladder points for the requested statistic."""


class RefinementNeededError(ValueError):
    """A bracket builder cannot reach the requested accuracy."""


class DivergenceError(ArithmeticError):
    """An integral that should be finite appears to diverge."""


class ZeroEnergyViolation(ValueError):
    """A function passed as zero-energy has a non-negligible integral."""


class OutOfScopeError(NotImplementedError):
    """The requested regime is not implemented."""


class EmptySupportError(ValueError):
    """No evaluation point lies inside the support set."""
