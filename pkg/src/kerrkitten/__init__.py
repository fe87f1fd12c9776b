"""Photon-added squeezed cat states in a Kerr medium.

State construction lives in :mod:`fock_state`, phase-space distributions in
:mod:`phase_space`, tomograms in :mod:`tomography`, damped evolution in
:mod:`decoherence` and kitten fiducial states in :mod:`kitten`.
"""

__version__ = "0.1.0"

from .decoherence import DampingParams, amp_damped_rho, damped_rho, phase_damped_rho
from .errors import (
    ConfigError,
    DegenerateState,
    DivergentSeries,
    KerrKittenError,
    SigmaOutOfRange,
    UnderResolvedGrid,
    UnsupportedSelection,
    WrongKappa,
)
from .fock_state import DensityMatrix, FockState, ModelParams, build_state, density, evolve, normalization
from .kernels import BACKEND
from .kitten import KittenSpec, fiducial_state, hs_distance, kitten_selection
from .phase_space import default_grid, evaluate_field, husimi_point, negativity_w, r_point, wehrl_entropy, wigner_point
from .quad_engine import PhaseSpaceGrid
from .tomography import Tomogram, tomogram_series

__all__ = [
    "__version__",
    "BACKEND",
    "ModelParams",
    "FockState",
    "DensityMatrix",
    "build_state",
    "density",
    "evolve",
    "normalization",
    "PhaseSpaceGrid",
    "default_grid",
    "evaluate_field",
    "wigner_point",
    "husimi_point",
    "r_point",
    "wehrl_entropy",
    "negativity_w",
    "Tomogram",
    "tomogram_series",
    "DampingParams",
    "amp_damped_rho",
    "phase_damped_rho",
    "damped_rho",
    "KittenSpec",
    "kitten_selection",
    "fiducial_state",
    "hs_distance",
    "KerrKittenError",
    "DivergentSeries",
    "DegenerateState",
    "UnderResolvedGrid",
    "SigmaOutOfRange",
    "UnsupportedSelection",
    "WrongKappa",
    "ConfigError",
]
