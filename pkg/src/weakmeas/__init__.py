"""Simulation of pre- and post-selected weak measurements on spin-1/2 ensembles."""

from .errors import (
    EmptyStateError,
    NoPostSelectionsError,
    NullPostSelectionError,
    OrthogonalSelectionError,
    ValidationError,
    WeakMeasError,
)
from .spin import (
    BlochAxis,
    PrePostSelection,
    eigenstate,
    expectation,
    orthogonal_decomposition,
    overlap,
    pauli,
    post_selected_decomposition,
    rotation_about,
    spin_along,
    weak_value,
    weak_value_moment,
)
from .protocols import Scenario

__version__ = "0.1.0"

__all__ = [
    "BlochAxis",
    "EmptyStateError",
    "NoPostSelectionsError",
    "NullPostSelectionError",
    "OrthogonalSelectionError",
    "PrePostSelection",
    "Scenario",
    "ValidationError",
    "WeakMeasError",
    "eigenstate",
    "expectation",
    "orthogonal_decomposition",
    "overlap",
    "pauli",
    "post_selected_decomposition",
    "rotation_about",
    "spin_along",
    "weak_value",
    "weak_value_moment",
]
