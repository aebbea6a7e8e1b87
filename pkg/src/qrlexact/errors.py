"""Exception types raised across the package."""


class QRLError(Exception):
    """Base class for all package errors."""


class InvalidPolicyError(QRLError, ValueError):
    """Policy coordinates do not fit the model (wrong count or outside [0, 1])."""


class InvalidModelError(QRLError, ValueError):
    """Model specification violates its invariants."""


class ConstraintViolationError(QRLError, ValueError):
    """Trajectory-class parameters violate the flow-conservation constraints."""


class MultiplicityOverflowError(QRLError, OverflowError):
    """An exact trajectory count exceeded the fixed-width integer range."""


class ResourceLimitError(QRLError, RuntimeError):
    """Brute-force enumeration would exceed the configured cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"enumeration needs {required} sequences, cap is {cap}")
        self.required = required
        self.cap = cap


class NoCrossoverError(QRLError, RuntimeError):
    """The argmax does not change cluster across the requested range."""
