"""Approximate fixed points of self-maps of compact convex sets, and ODE solutions built from them."""

from .afp import AfpTrace, SelfMap, extract_fixed_point, orbit_hull_chain, run_afp, weak_residuals
from .brouwer import FixedPointResult, grid_oracle, solve_fixed_point
from .errors import *  # noqa: F401,F403
from .ode import (GridFunction, OdeProblem, apply_F, apriori_bound, apriori_bound_inverse, osgood_check,
                  solve_limiting_weak, verify_lp_estimates)
from .schauder import SchauderProjection, project
from .seminorms import (AdmissibleSeminorm, LinearFunctional, audit_admissible, build_admissible,
                        coordinate_functionals, default_functionals, evaluate)
from .sets import ConvexBody, EpsNet, build_eps_net

__version__ = "0.1.0"
