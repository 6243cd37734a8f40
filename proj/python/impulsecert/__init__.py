"""Stability certificates for linear impulsive systems with coupled subsystems."""

import json

from ._core import (
    DimensionError,
    DomainError,
    Error,
    InputError,
    NumericError,
    PreconditionError,
    SmallGainData,
    System,
    ValidationError,
    monodromy_radius,
    prop62,
    random_dwell,
    simulate,
    decay_fit,
    small_gain_data,
    theta_star,
    transition_matrix,
)
from . import _core

__all__ = [
    "System", "SmallGainData", "load", "certify_periodic", "certify_aperiodic",
    "averaged_certify", "small_gain_data", "prop62", "theta_star", "monodromy_radius",
    "transition_matrix", "random_dwell", "simulate", "decay_fit", "Error", "InputError",
    "ValidationError", "DimensionError", "PreconditionError", "DomainError", "NumericError",
]


def load(path):
    return System.load(str(path))


# Reports come back as the same JSON the CLI writes; NaN entries are None.
def certify_periodic(system, N, P0=None, gamma_policy="uniform", eps=None):
    return json.loads(_core.certify_periodic_json(system, N, P0, gamma_policy, eps))


def certify_aperiodic(system, N, P0=None, gamma_policy="uniform", eps=None):
    return json.loads(_core.certify_aperiodic_json(system, N, P0, gamma_policy, eps))


def averaged_certify(system, P0=None):
    return json.loads(_core.averaged_certify_json(system, P0))
