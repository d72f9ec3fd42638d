import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rateindep import (ConvexPointwiseModel, DelaminationModel,
                       GradientNonconvexModel, PlasticityPointModel,
                       SolverStrategy, TimeGrid, TwoPhaseModel)


@pytest.fixture
def play_demo_model():
    """Scalar convex model whose evolution is the classic play operator:
    unit cell, alpha=1, beta=2, c_d=1, loading 2t on [0, 2]."""
    return ConvexPointwiseModel(weights=[1.0], alpha=1.0, beta=2.0, c_d=1.0,
                                load_offset=0.0, load_slope=2.0, gamma=0.0,
                                horizon=2.0)


@pytest.fixture
def play_demo_model_normalized():
    return ConvexPointwiseModel(weights=[1.0], alpha=1.0, beta=2.0, c_d=1.0,
                                load_offset=0.0, load_slope=2.0, gamma="auto",
                                horizon=2.0)


@pytest.fixture
def grid3():
    return TimeGrid(np.array([0.0, 1.0, 2.0]))


def uniform_grid(T, n):
    return TimeGrid(np.linspace(0.0, T, n + 1))


@pytest.fixture
def exact():
    return SolverStrategy("exact")


def all_shipped_models(horizon=2.0):
    """One representative instance per registered model family."""
    return [
        ConvexPointwiseModel(weights=[1.0, 0.5], alpha=[1.0, 2.0], beta=2.0,
                             c_d=1.0, load_slope=[2.0, 1.0], horizon=horizon),
        GradientNonconvexModel(n_nodes=4, c_d=0.5, load_slope=1.0,
                               horizon=horizon),
        TwoPhaseModel(weights=[1.0, 0.5], modulus=2.0, transform_strain=0.5,
                      phase_offset=0.1, sigma_plus=1.0, sigma_minus=2.0,
                      load_slope=1.0, horizon=horizon),
        DelaminationModel(segments=[1.0, 2.0, 1.0], glue_kappa=[1.0, 0.5],
                          glue_area=[1.0, 2.0], c_d=0.3, load_slope=1.0,
                          horizon=horizon),
        PlasticityPointModel(shear_modulus=1.0, yield_stress=0.5,
                             shear_slope=1.0, horizon=horizon),
    ]
