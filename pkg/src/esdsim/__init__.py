"""Five-qubit simulation of entanglement sudden death and sudden birth.

Modules: ``simcore`` (dense states), ``gates`` (basis gates and transpiler),
``channels`` (damping circuit, noise, mitigation), ``entanglement`` (closed
forms), ``protocol`` (experiment pipeline) and ``cli``.
"""
from .channels import NoiseModel, damping_params
from .entanglement import STUDY_ALPHAS, InitialState, esb_time, esd_time
from .protocol import ExperimentConfig, QubitLayout, run_experiment

__version__ = "0.1.0"

__all__ = [
    "NoiseModel",
    "damping_params",
    "STUDY_ALPHAS",
    "InitialState",
    "esb_time",
    "esd_time",
    "ExperimentConfig",
    "QubitLayout",
    "run_experiment",
]
