"""Exception types.

Names follow the diagnostic vocabulary printed by the CLI, so ``type(e).__name__``
is what users see.
"""


class GibError(Exception):
    """Base class for every error raised by this package."""


class NetworkError(GibError):
    """The network description is malformed or violates a structural rule."""


class FormatError(NetworkError):
    pass


class CyclicGraph(NetworkError):
    pass


class BadDistribution(NetworkError):
    pass


class NonLaminarConcepts(NetworkError):
    pass


class DuplicateName(NetworkError):
    pass


class UnknownParent(NetworkError):
    pass


class UnknownVariable(GibError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownValue(GibError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class SpanMismatch(GibError):
    pass


class EmptyMeet(GibError):
    pass


class UndefinedConditional(GibError, ZeroDivisionError):
    pass


class TooLarge(GibError):
    pass


class NotGib(GibError):
    pass


class NotDeltaGib(GibError):
    pass


class BadSpan(GibError):
    pass


class ImpermissibleSet(GibError):
    pass


class NotSelected(GibError):
    pass


class AgendaExhausted(GibError):
    pass
