"""Exception types shared across the package."""


class CapExceeded(ValueError):
    """An enumeration or table would exceed its configured size cap.

    The message carries the computed cardinality; reduce parameters or raise
    the cap explicitly.
    """

    def __init__(self, what, size, cap):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(
            f"{what}: size {size} exceeds cap {cap}; reduce parameters or raise the cap"
        )


class FieldMismatch(ValueError):
    """Operands belong to different fields and no embedding was supplied."""


class SpecError(ValueError):
    """Malformed or invalid algebra specification."""


class NumericalIntegrityError(ArithmeticError):
    """A floating-point value expected to be an integer is not close to one."""
