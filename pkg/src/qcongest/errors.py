"""Exception hierarchy shared by every module."""


class QCongestError(Exception):
    """Base class for all package errors."""


class CapacityError(QCongestError):
    """A desk-scale cap (qubits, nodes, subset dimension) would be exceeded."""


class AddressError(QCongestError):
    """A gate or measurement names a register or qubit that does not exist."""


class StateError(QCongestError):
    """The state cannot be measured or normalized (e.g. zero norm)."""


class ParameterError(QCongestError):
    """An argument is outside the operation's precondition."""


class ParseError(QCongestError):
    """A graph or input file could not be parsed."""


class InvariantViolation(QCongestError):
    """A protocol broke one of its contracts (bandwidth, bound, postcondition)."""


class BandwidthExceeded(InvariantViolation):
    """A message larger than the per-edge bandwidth was sent."""


class NotASemigroup(ParameterError):
    """The combine operation failed the associativity/commutativity check."""


class DisconnectedGraph(ParameterError):
    """The network graph is not connected."""
