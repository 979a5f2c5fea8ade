"""Magnetic Hamiltonian systems with twisted-periodic potentials: fields,
integrators, discrete actions and periodic-orbit search."""

from .domain import (
    DiscreteLoop,
    FourierProfile,
    PhaseOneForm,
    PhaseState,
    ProblemSpec,
)
from .integrate import Picture, Trajectory
from .orbits import OrbitResult, find_orbit_shooting, find_orbit_variational
from .transforms import eliminate_hamiltonian, eliminate_scalar, make_merry_go_round

__version__ = "0.1.0"

__all__ = [
    "DiscreteLoop",
    "FourierProfile",
    "OrbitResult",
    "PhaseOneForm",
    "PhaseState",
    "Picture",
    "ProblemSpec",
    "Trajectory",
    "eliminate_hamiltonian",
    "eliminate_scalar",
    "find_orbit_shooting",
    "find_orbit_variational",
    "make_merry_go_round",
]
