"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical failures with 3, and file-format/IO problems with 4.
"""


class PatfpError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PatfpError):
    """Invalid configuration: bad key, unparsable value, out-of-range parameter."""


class NumericsError(PatfpError):
    """Numerical failure during a solve."""


class CFLError(NumericsError):
    """Requested time step exceeds the stability bound of the explicit scheme."""


class DivergenceError(NumericsError):
    """NaN or runaway growth detected; carries the step/iteration index in the message."""


class FormatError(PatfpError):
    """Malformed input file; message carries ``path:line``."""
