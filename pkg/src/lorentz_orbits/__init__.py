"""Periodic orbits of the relativistic Lorentz force equation by action minimization."""
from .action import ActionReport, action_value, el_residual, grad_action
from .catalog import make as make_pair
from .dynamics import PhaseState, integrate, periodicity_residual, velocity_bound
from .optimizer import MinimizeConfig, MinimizerResult, minimize, project_K
from .potentials import PotentialPair, SingularBall, eval_fields, gauge_transform, lipschitz_and_C
from .trajectory import PeriodicTrajectory
from .witness import WitnessCertificate, certify_lemma_negative

__version__ = "0.1.0"

__all__ = [
    "ActionReport",
    "MinimizeConfig",
    "MinimizerResult",
    "PeriodicTrajectory",
    "PhaseState",
    "PotentialPair",
    "SingularBall",
    "WitnessCertificate",
    "action_value",
    "certify_lemma_negative",
    "el_residual",
    "eval_fields",
    "gauge_transform",
    "grad_action",
    "integrate",
    "lipschitz_and_C",
    "make_pair",
    "minimize",
    "periodicity_residual",
    "project_K",
    "velocity_bound",
]
