"""Exception hierarchy.

Input errors (bad weights, bad words, bad budgets) derive from
:class:`InputError`; failures of a structural hypothesis on otherwise valid
input derive from :class:`HypothesisError`. The CLI maps the two families
to exit codes 2 and 1.
"""


class MfspecError(Exception):
    pass


class InputError(MfspecError):
    pass


class HypothesisError(MfspecError):
    pass


# weight validation
class BadLength(InputError):
    pass


class SumNotOne(InputError):
    pass


class NegativeWeight(InputError):
    pass


class EmptyColumn(InputError):
    pass


class ConstraintViolated(InputError):
    pass


# words
class DigitOutOfRange(InputError):
    pass


class BaseMismatch(InputError):
    pass


# cost control
class DepthTooLarge(InputError):
    pass


class BudgetExceeded(InputError):
    pass


class NonConvexInput(InputError):
    pass


class GridTooCoarse(MfspecError):
    pass


class SearchExhausted(MfspecError):
    pass


# hypotheses
class HypothesisViolated(HypothesisError):
    """Some p_i with i < base is zero; the max-formula for tau_mu is unproven."""


class HypothesisFailed(HypothesisError):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        msg = f"HypothesisFailed({reason})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NoClosedForm(HypothesisError):
    pass


class EmptyB(HypothesisError):
    pass


class WrongShape(HypothesisError):
    pass


class ZeroMass(HypothesisError):
    pass


class NonfiniteTau(HypothesisError):
    pass
