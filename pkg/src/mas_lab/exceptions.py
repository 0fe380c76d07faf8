"""Warning and error types shared across the package."""

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain where a closed form or kernel is valid."""


class SingularSystemError(np.linalg.LinAlgError):
    pass


class IllConditionedWarning(RuntimeWarning):
    pass


class RankDeficiencyWarning(RuntimeWarning):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass


class ImaginaryResidueWarning(RuntimeWarning):
    pass
