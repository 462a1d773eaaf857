"""Exception types shared across the package."""


class GenodistError(Exception):
    """Base class for all genodist errors."""


class FastaFormatError(GenodistError):
    """Input is not valid FASTA (e.g. sequence data before the first header)."""


class EncodingError(GenodistError):
    """A word cannot be encoded (bad symbol or wrong length)."""


class ConfigError(GenodistError):
    """Invalid or mutually inconsistent parameters."""


class StoreError(GenodistError):
    """Count-store problem: bad file format, version mismatch, or
    incompatible (k, dmax) between stores."""


class InsufficientDataError(GenodistError):
    """Not enough data to compute the requested quantity (empty distance
    support, all-constant correlation input, ...)."""
