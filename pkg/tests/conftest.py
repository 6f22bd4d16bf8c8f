import numpy as np
import pytest

from srb_response import (
    CircleLeaf,
    DiracObservable,
    PerturbationFamily,
    SlopedSegment,
    StableSegment,
    TorusPoint,
    TrigPolyScalar,
    TrigPolyVectorField,
    WindowFunction,
)

CENTER = TorusPoint(0.12, 0.57)


@pytest.fixture(scope="session")
def x_sin():
    """X = (sin 2 pi x, 0), the workhorse non-conservative perturbation."""
    return TrigPolyVectorField(TrigPolyScalar.sin_mode(1, 0), TrigPolyScalar.zero())


@pytest.fixture(scope="session")
def x_const():
    return TrigPolyVectorField.constant(0.4, -0.3)


@pytest.fixture(scope="session")
def x_divfree():
    """X = (sin 2 pi y, 0): nonconstant but divergence free."""
    return TrigPolyVectorField(TrigPolyScalar.sin_mode(0, 1), TrigPolyScalar.zero())


@pytest.fixture(scope="session")
def family_sin(x_sin):
    return PerturbationFamily.from_field(x_sin)


@pytest.fixture(scope="session")
def stable_obs():
    return DiracObservable(StableSegment(CENTER, 0.15), WindowFunction())


@pytest.fixture(scope="session")
def sloped_obs():
    return DiracObservable(SlopedSegment(CENTER, 0.4, 0.15), WindowFunction())


@pytest.fixture(scope="session")
def circle_obs():
    return DiracObservable(CircleLeaf(CENTER, 0.15, 0.05), WindowFunction())


@pytest.fixture(scope="session")
def all_observables(stable_obs, sloped_obs, circle_obs):
    return {"stable": stable_obs, "sloped": sloped_obs, "circle": circle_obs}


def wrap_displacement(d):
    """Nearest representative of a torus displacement in [-1/2, 1/2)."""
    return (np.asarray(d) + 0.5) % 1.0 - 0.5
