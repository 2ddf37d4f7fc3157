"""Pseudo-spectral simulator for the Euler-Arnold equation on contactomorphism groups."""

from .contact import ContactModel, ModelKind
from .evolution import (
    BetaPlane,
    BlowupError,
    CamassaHolm,
    ContactEA,
    Quasigeostrophic,
    Reduced1D,
    SimState,
    StepperConfig,
    rhs,
    run,
    step_rk4,
)
from .spectral import Grid, ScalarField, VectorFieldComponents

__version__ = "0.1.0"

__all__ = [
    "BetaPlane",
    "BlowupError",
    "CamassaHolm",
    "ContactEA",
    "ContactModel",
    "Grid",
    "ModelKind",
    "Quasigeostrophic",
    "Reduced1D",
    "ScalarField",
    "SimState",
    "StepperConfig",
    "VectorFieldComponents",
    "rhs",
    "run",
    "step_rk4",
]
