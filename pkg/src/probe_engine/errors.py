"""Exception hierarchy.

Numerical failures derive from :class:`NumericalFailure`, input problems from
:class:`ConfigError` / :class:`DomainError`. The CLI maps the former to exit
code 2 and the latter to exit code 1.
"""


class ProbeEngineError(Exception):
    """Base class for all package errors."""


class NumericalFailure(ProbeEngineError):
    """A computation could not produce a trustworthy number."""


class QuadratureError(NumericalFailure):
    """Energy quadrature failed; ``energy`` holds the offending point if known."""

    def __init__(self, message, energy=None):
        super().__init__(message)
        self.energy = energy


class SingularEliminationError(NumericalFailure):
    """A probe elimination divided by a vanishing diagonal entry."""


class DegenerateError(NumericalFailure):
    """A transport quantity has a vanishing denominator (e.g. L'_11 <= 0)."""


class RegimeError(NumericalFailure):
    """No engine regime, or the regime's conductance denominator vanishes."""


class SingularMeritError(NumericalFailure):
    """A closed-form efficiency expression hit its pole."""


class OnsagerCasimirError(NumericalFailure):
    """Field-reversed quantities disagree beyond tolerance."""


class DomainError(ProbeEngineError, ValueError):
    """An argument lies outside the domain of the formula."""


class ConfigError(ProbeEngineError, ValueError):
    """Invalid sweep configuration; ``problems`` lists ``(field, message)``."""

    def __init__(self, problems):
        self.problems = list(problems)
        text = "; ".join(f"{field}: {msg}" for field, msg in self.problems)
        super().__init__(f"invalid configuration: {text}")
