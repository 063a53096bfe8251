"""Exception taxonomy shared across the toolkit.

The CLI maps these onto process exit codes: input/parse problems exit 2,
capacity (out-of-memory analogue) exits 3, numeric failures exit 4.
"""


class SsmRankError(Exception):
    """Base class for all toolkit errors."""


class InputError(SsmRankError):
    """Invalid user-supplied input (bad values, malformed files, missing data)."""


class ContractError(InputError):
    """An operation was called with arguments violating its preconditions
    (shape mismatches, out-of-range lengths, missing end markers)."""


class ValidationError(InputError):
    """A domain object was constructed from values violating its invariants."""


class ParseError(InputError):
    """Malformed line in a structured text file."""

    def __init__(self, message: str, path: str = "", line_no: int = 0):
        self.path = path
        self.line_no = line_no
        loc = f"{path}:{line_no}: " if path or line_no else ""
        super().__init__(f"{loc}{message}")


class DataError(InputError):
    """A referenced record (doc id, query id) is missing from the data."""


class UnderSupplyError(DataError):
    """Fewer eligible candidates than requested samples for a query."""


class CapacityError(SsmRankError):
    """The requested computation would exceed the configured memory budget."""


class NumericError(SsmRankError):
    """Non-finite values appeared where finite numbers are required."""
