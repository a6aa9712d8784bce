"""Exception taxonomy.

All validation failures raise a subclass of :class:`MtkitError`; the CLI maps
any of them to exit code 1 (usage errors exit 2 via argparse).
"""


class MtkitError(Exception):
    """Base class for all toolkit errors."""


class FormatError(MtkitError):
    """A file or record violates its wire format (bad UTF-8, bad field, bad value)."""


class AlignmentError(MtkitError):
    """Parallel streams that must be segment-aligned have different lengths."""


class ConfigError(MtkitError):
    """Inconsistent or unsupported configuration."""


class DataError(MtkitError):
    """Structurally valid input that cannot be processed (e.g. empty n-best list)."""
