"""Concrete model plugins: energy/dissipation pairs with closed-form pieces.

Every model exposes the common contract from :mod:`rateindep.core` plus,
where the structure allows it, an exact incremental minimizer and an exact
stability test used as oracles by the solver and verifier.
"""

from .convex_pointwise import ConvexPointwiseModel
from .delamination import DelaminationModel
from .gradient_nonconvex import GradientNonconvexModel
from .plasticity_point import PlasticityPointModel
from .two_phase import TwoPhaseModel

MODEL_REGISTRY = {
    ConvexPointwiseModel.name: ConvexPointwiseModel,
    GradientNonconvexModel.name: GradientNonconvexModel,
    TwoPhaseModel.name: TwoPhaseModel,
    DelaminationModel.name: DelaminationModel,
    PlasticityPointModel.name: PlasticityPointModel,
}


def build_model(name: str, params: dict, horizon: float):
    """Instantiate a registered model from a parameter mapping."""
    try:
        cls = MODEL_REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(MODEL_REGISTRY))
        raise ValueError(f"unknown model {name!r}; known models: {known}") from None
    return cls.from_config(params, horizon)


__all__ = [
    "ConvexPointwiseModel",
    "GradientNonconvexModel",
    "TwoPhaseModel",
    "DelaminationModel",
    "PlasticityPointModel",
    "MODEL_REGISTRY",
    "build_model",
]
