"""Solver and certifier for rate-independent evolutionary problems.

Given a stored-energy functional ``I(t, z)`` and a dissipation distance
``D(z0, z1)``, compute trajectories by incremental global minimization and
certify them against global stability, the energy inequality, and the
a priori energy/dissipation and norm bounds.
"""

from .core import (EquilibriumModel, GridNodeError, InadmissibleStateError,
                   Model, SingularSystemError, StabilityVerdict, State,
                   TimeGrid, TimeReparametrizedModel, Trajectory,
                   refine_dyadic, total_dissipation)
from .kernels import BACKEND as KERNEL_BACKEND
from .models import (ConvexPointwiseModel, DelaminationModel,
                     GradientNonconvexModel, MODEL_REGISTRY,
                     PlasticityPointModel, TwoPhaseModel, build_model)
from .solvers import (IncrementalSolution, SolverStepFailureError,
                      SolverStrategy, StepLog, solve_incremental,
                      solve_with_elimination)
from .verify import (CertificateReport, RefinementStudy, StabilityCheck,
                     certify, check_energy_inequality, check_stability,
                     check_two_sided, energy_chain, refinement_study)

__version__ = "0.1.0"

__all__ = [
    "State", "TimeGrid", "Trajectory", "Model", "EquilibriumModel",
    "StabilityVerdict", "TimeReparametrizedModel",
    "InadmissibleStateError", "GridNodeError", "SingularSystemError",
    "total_dissipation", "refine_dyadic",
    "SolverStrategy", "StepLog", "IncrementalSolution",
    "SolverStepFailureError", "solve_incremental", "solve_with_elimination",
    "StabilityCheck", "CertificateReport", "RefinementStudy",
    "certify", "check_stability", "check_energy_inequality",
    "check_two_sided", "energy_chain", "refinement_study",
    "ConvexPointwiseModel", "GradientNonconvexModel", "TwoPhaseModel",
    "DelaminationModel", "PlasticityPointModel", "MODEL_REGISTRY",
    "build_model", "KERNEL_BACKEND",
]
