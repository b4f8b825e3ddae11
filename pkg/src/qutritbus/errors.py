"""Exception hierarchy shared by every engine."""


class QutritBusError(Exception):
    """Base class for errors raised by this package."""


class InvalidSizeError(QutritBusError, ValueError):
    pass


class InvalidOperatorError(QutritBusError, ValueError):
    pass


class QubitIndexError(QutritBusError, IndexError):
    pass


class ContradictionError(QutritBusError):
    """A forced measurement outcome disagrees with a deterministic result."""


class NonUnitaryError(QutritBusError, ValueError):
    pass


class CapacityError(QutritBusError):
    """The requested simulation exceeds the dense-representation caps."""


class ProtocolError(QutritBusError):
    """A protocol precondition (bus location, ancilla state, ...) is violated."""


class DegenerateBasisError(QutritBusError, ValueError):
    pass


class ConfigError(QutritBusError, ValueError):
    pass
