"""Generalized entanglement of formation for three and four parties, with
numerical checks of its upper and lower bounds."""

from .bounds import REGISTRY, InequalityRecord, evaluate_inequality, run_registry
from .campaign import Campaign, run_campaign
from .catalog import load_state, named_state, save_state
from .coefficients import derive_coefficients
from .gef import (gef_bipartite, gef_mixed_four, gef_mixed_tri, gef_pure_four, gef_pure_tri,
                  gef_pure_tri_modified)
from .measures import (binary_entropy, concurrence_two_qubit, eof_from_concurrence,
                       eof_pure_bipartite, eof_two_qubit_mixed, von_neumann_entropy)
from .qmat import (DensityMatrix, PureState, StateError, make_rng, partial_trace,
                   random_density, random_haar_pure)
from .roof import RoofConfig, minimize_convex_roof

__version__ = "0.1.0"
