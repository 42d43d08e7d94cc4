"""Exception types shared across the package."""


class KeyLengthError(ValueError):
    """Raw key length does not match the requested cipher variant."""


class BlockLengthError(ValueError):
    """Data is not a whole number of 16-byte blocks."""


class FabricBusyError(RuntimeError):
    """A partial reconfiguration is already in progress."""


class MissingBitstreamError(LookupError):
    """No partial module is stored for the requested key size."""


class ConstraintInfeasibleError(ValueError):
    """The requested reconfiguration violates a planning constraint."""

    def __init__(self, message, bound=None, value=None):
        super().__init__(message)
        self.bound = bound
        self.value = value


class InvalidRegisterError(ValueError):
    """A configuration register that is not valid was dispatched."""


class ConstantsFileError(ValueError):
    """The published constants file is missing or malformed."""
