"""Tail-index dependent stability bounds for heavy-tailed Langevin-type dynamics.

Special functions, symmetric α-stable samplers, loss models with certified
constants, coupled Euler-Maruyama simulation, empirical W1 estimators, closed-form
bound evaluation, and the ``levystab`` command-line runner.
"""

from .bounds import BoundConstants, DomainError
from .dynamics import ChainConfig, CoupledTrajectoryResult, ReplicaDivergence, run_coupled, run_single
from .losses import ConstantBundle, Dataset, DissipativeNonconvex, QuadraticLoss1D, make_model
from .stable import RngStream, StableNoiseSpec
from .wasserstein import EmpiricalMeasure

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "ChainConfig",
    "ConstantBundle",
    "CoupledTrajectoryResult",
    "Dataset",
    "DissipativeNonconvex",
    "DomainError",
    "EmpiricalMeasure",
    "QuadraticLoss1D",
    "ReplicaDivergence",
    "RngStream",
    "StableNoiseSpec",
    "make_model",
    "run_coupled",
    "run_single",
]
