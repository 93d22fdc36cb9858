"""Exception types shared across the package.

The CLI maps these onto stable exit codes (see rbec.cli), so new error
classes should slot into one of the existing branches there.
"""


class RBECError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(RBECError, ValueError):
    """Invalid or mismatched matrix/vector dimensions, or out-of-range indices."""


class SingularMatrixError(RBECError):
    """Linear system has no unique solution (rank below column count)."""


class DecodeFailure(RBECError):
    """The surviving blocks do not determine the data (rank shortfall).

    This is a probabilistic event inherent to random codes, not a bug:
    callers must surface it and may retry with more blocks.
    """


class InsufficientBlocksError(RBECError):
    """Fewer than k blocks are available; decoding is impossible outright."""


class CodewordError(RBECError, ValueError):
    """Malformed block inputs: unequal lengths, empty data, missing blocks."""


class ArrayStoreError(RBECError):
    """Base class for on-disk array store failures."""


class ArrayExistsError(ArrayStoreError):
    """Target directory already contains files."""


class UnknownDiskError(ArrayStoreError):
    """Disk id does not exist in the array (or was removed)."""


class ObjectTooLargeError(ArrayStoreError):
    """Object does not fit the array's current data capacity."""


class UnrecoverableError(ArrayStoreError):
    """Stored object cannot be reconstructed from the online disks."""
