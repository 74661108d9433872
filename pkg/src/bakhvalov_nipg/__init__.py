"""NIPG discontinuous Galerkin solver for 1D convection-diffusion on Bakhvalov meshes."""

from .mesh import MeshConfig, bakhvalov_mesh
from .nipg import ProblemSpec, two_level_penalty, layer_test_problem, solve_nipg

__all__ = [
    "MeshConfig",
    "ProblemSpec",
    "bakhvalov_mesh",
    "two_level_penalty",
    "layer_test_problem",
    "solve_nipg",
]
