"""Exception hierarchy shared by all tmsk modules."""

import numpy as np


class TMSKError(Exception):
    """Base class for every error raised by tmsk."""


class InputError(TMSKError, ValueError):
    """Malformed or out-of-domain user input."""


class KernelValidityError(TMSKError, ValueError):
    """A (p, q) pair violates positivity or strict monotonicity of p/q."""


class NotPositiveDefiniteError(TMSKError, np.linalg.LinAlgError):
    """A nonpositive pivot was met during a Cholesky factorization."""


class NumericalError(TMSKError, ArithmeticError):
    """A computed quantity left its algebraically admissible range."""


class ResourceError(TMSKError, RuntimeError):
    """Requested work exceeds a configured size or memory cap."""


class SizeOverflowError(ResourceError, OverflowError):
    """Level or grid size beyond the supported exact-arithmetic limits."""
