"""Grid operators, trajectory and master-equation propagation, limiting forms."""

from .em import EMFieldConfig
from .limits import (evolve_momentum_limit, evolve_position_limit, momentum_limit_exponent,
                     position_limit_rates, to_momentum)
from .master import MasterEquation, MasterResult, evolve_master
from .operators import DenseOperators, MatrixFree
from .trajectories import EnsembleResult, Propagator, evolve_stochastic

__all__ = [
    "DenseOperators", "EMFieldConfig", "EnsembleResult", "MasterEquation", "MasterResult",
    "MatrixFree", "Propagator", "evolve_master", "evolve_momentum_limit", "evolve_position_limit",
    "evolve_stochastic", "momentum_limit_exponent", "position_limit_rates", "to_momentum",
]
