"""Weighted-harmonic extension to the half-space and its Dirichlet-to-Neumann map."""
from .mesh import HalfSpaceMesh, graded_r, graded_t
from .poisson import (
    Energy,
    dtn_trace,
    extend_on_mesh,
    poisson_difference,
    poisson_extend,
    poisson_symbol,
    weighted_energy,
)
from .solver import (
    DtNOperator,
    HalfSpaceField,
    MixedProblem,
    MixedSolution,
    dirichlet_extend,
    dtn_operator,
    solve_mixed,
)

__all__ = [
    "DtNOperator",
    "Energy",
    "HalfSpaceField",
    "HalfSpaceMesh",
    "MixedProblem",
    "MixedSolution",
    "dirichlet_extend",
    "dtn_operator",
    "dtn_trace",
    "extend_on_mesh",
    "graded_r",
    "graded_t",
    "poisson_difference",
    "poisson_extend",
    "poisson_symbol",
    "solve_mixed",
    "weighted_energy",
]
