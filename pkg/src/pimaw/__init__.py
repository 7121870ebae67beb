"""Online nonnegativity-constrained quadratic optimization via internal-model
anti-windup gradient flows: controller synthesis, LMI certification, and
closed-loop simulation against projected-gradient baselines."""

from ._backend import active_backend
from .core import (
    ControllerDesign,
    ExosystemModel,
    ExtendedRealization,
    QuadraticProblem,
    companion_realization,
    gradient_oracle,
    kron_extend,
    phi,
    phi_jacobian,
    project_nonneg,
    symmetric_eigendecomposition,
    transform_signals,
)

__version__ = "0.1.0"
