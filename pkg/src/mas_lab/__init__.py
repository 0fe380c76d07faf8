"""Method of auxiliary sources for 2D Laplace-Neumann problems with circular and elliptic boundaries."""

from .exceptions import (
    ConvergenceWarning,
    DomainError,
    IllConditionedWarning,
    ImaginaryResidueWarning,
    RankDeficiencyWarning,
    SingularSystemError,
)
from .common import MasSolution, classify_regime, alternation_score
from .exterior import ExteriorCircularProblem
from .interior import InteriorCircularProblem

__version__ = "0.1.0"
