"""Exception types shared across the package."""


class QCausalError(Exception):
    """Base class for all package errors."""


class DimensionError(QCausalError, ValueError):
    """Operands have incompatible shapes or subsystem dimensions."""


class HermiticityError(QCausalError, ValueError):
    """A matrix required to be Hermitian is not, within tolerance."""


class StateError(QCausalError, ValueError):
    """A matrix does not describe a valid density operator."""


class EffectError(QCausalError, ValueError):
    """An effect is not positive semidefinite or exceeds the identity."""


class CompletenessError(QCausalError, ValueError):
    """Measurement operators do not satisfy sum_i M_i^dag M_i = I."""


class CompatibilityError(QCausalError, ValueError):
    """Two measurement models act on overlapping subsystems."""


class PreconditionError(QCausalError, ValueError):
    """An operation was called outside its stated domain."""


class ZeroProbabilityOutcome(QCausalError, ValueError):
    """Conditioning or updating on an outcome of (numerically) zero probability.

    Attributes
    ----------
    outcome : hashable or None
        The offending outcome id.
    probability : float or None
        The probability that fell below the threshold.
    event : str or None
        Label of the measurement event, when raised during state assignment.
    """

    def __init__(self, message, outcome=None, probability=None, event=None):
        super().__init__(message)
        self.outcome = outcome
        self.probability = probability
        self.event = event


class ConfigError(QCausalError, ValueError):
    """A scenario configuration document is malformed.

    ``path`` is the dotted location of the offending field.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
