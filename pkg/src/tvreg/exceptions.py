"""Warning and error types shared across the package."""


class ConvergenceWarning(RuntimeWarning):
    """An iterative routine hit its iteration cap before reaching tolerance.

    The routine still returns its best estimate; callers decide whether the
    unconverged value is usable.
    """


class FormatError(ValueError):
    """A binary file failed to parse.

    Carries the name of the field being read and the byte offset at which
    the failure occurred.
    """

    def __init__(self, message, field=None, offset=None):
        if field is not None:
            message = f"{message} (field '{field}' at byte offset {offset})"
        super().__init__(message)
        self.field = field
        self.offset = offset
