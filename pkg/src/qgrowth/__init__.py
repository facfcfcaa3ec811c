"""Deformed-logarithm growth models: simulation, cross-validation and fitting."""
from . import _kernels
from .errors import (DivergenceError, DomainError, IntegrationError, NoRootError,
                     QGrowthError)
from .qcore import Deformation, qexp, qexp_clamp_boundary, qexp_pole, qln
from .specfun import BetaArgs, inc_beta, inc_beta_inverse
from .models import GrowthParams, ModelKind, model_table

__version__ = "0.1.0"

__all__ = [
    "__version__", "QGrowthError", "DomainError", "DivergenceError", "NoRootError",
    "IntegrationError", "Deformation", "qln", "qexp", "qexp_clamp_boundary", "qexp_pole",
    "BetaArgs", "inc_beta", "inc_beta_inverse", "GrowthParams", "ModelKind", "model_table",
]
