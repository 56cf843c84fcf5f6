"""Urn process on finite groups: draw two balls with replacement, add a ball
labeled with their product.

Submodules: ``groups`` (tables and subgroups), ``urn`` (the chain),
``exact`` (exact law), ``diagnostics`` (convergence measures and ensembles),
``lemmas`` (bound checks and couplings), ``algebra_walk`` (random walk on
F_p G) and ``cli``.
"""

__version__ = "0.1.0"

from .groups import (  # noqa: E402
    ElementSet,
    FiniteGroup,
    cyclic,
    dihedral,
    direct_product,
    from_cayley_table,
    is_generating,
    klein_four,
    subgroup_generated,
    symmetric,
)
from .urn import Schedule, Trajectory, UrnState, densities, in_sigma, simulate, step, transition_probabilities  # noqa: E402

__all__ = [
    "ElementSet", "FiniteGroup", "Schedule", "Trajectory", "UrnState", "cyclic", "densities", "dihedral",
    "direct_product", "from_cayley_table", "in_sigma", "is_generating", "klein_four", "simulate", "step",
    "subgroup_generated", "symmetric", "transition_probabilities",
]
