"""Numerical checks for deficiency indices, Bessel-K identities and lifted flows
on covers of the punctured plane."""

from .cover import CoverSpec, SurfacePoint, lift_translation, winding_of_loop
from .errors import (DefectLabError, DomainError, NonConvergenceError, OpenLoopError, PoleError,
                     PunctureError, RankAmbiguityError, ToleranceError)
from .flows import Bump, StateFn, commutator_apply, inner_product, sheet_separation, translate_state
from .localexp import (Generator, LocalFlow, NestedDomains, defect_indices_1d, exponentiate_local,
                       nelson_sum_of_squares, resolvent_commutation, verify_group_law,
                       verify_isometry)
from .quad import (IdentityReport, QuadResult, integrate, verify_kv_identity, verify_mellin,
                   verify_nicholson)
from .specfun import EvalConfig, bessel_k, bessel_k_ode_residual, gamma, gamma_reflection
from .spectral import (Endpoint, GFunction, RadialGrid, defect_basis_finite, defect_dimension,
                       defect_norm_parseval, lp_lc_classify, radial_defect_residual,
                       synthesize_defect, weight_transform_residual)

__version__ = "0.1.0"
