"""Exception hierarchy shared by the library and the command line."""


class ExtremalError(Exception):
    """
    Base error carrying a human readable detail and the CLI exit code.

    Validation problems exit with 1, verification mismatches with 2.
    """

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ShapeMismatchError(ExtremalError):
    pass


class InvalidPermutationError(ExtremalError):
    pass


class InvalidPartitionError(ExtremalError):
    pass


class ZeroTensorError(ExtremalError):
    pass


class NotSymmetricError(ExtremalError):
    pass


class NegativeEntriesError(ExtremalError):
    pass


class NonBinaryError(ExtremalError):
    pass


class ConditionError(ExtremalError):
    """A dimension condition (divisibility, tallness, pairing) does not hold."""


class SearchSpaceError(ExtremalError):
    pass


class FormatError(ExtremalError):
    pass


class VerificationMismatch(ExtremalError):
    exit_code = 2


class NonFiniteError(ExtremalError):
    pass
