"""Perturbed Gibbs states on finite truncations: perturbation norms, charts and transport."""
from .gibbs import GibbsState, gibbs_state, regularized_mean
from .linalg import HermitianOperator
from .manifold import Atlas, center, chart, extend, inverse_chart
from .models import ModelSpec, make_base, make_perturbation
from .perturbation import BasePoint, norm, norm_eps, norm_omega, norm_zero, relative_bound_form

__version__ = "0.1.0"
