from .domain import Boundary, SpinorField, ThinDomain
from .operator import (
    apply_dirac,
    dirac_matrix,
    first_eigenvalue,
    lambda_dbar,
    smallest_singular_value,
    solve_dirac,
)
from .norms import NormReport, holder_norm, holder_seminorm, norm_report
from .reflect import choose_k, extended_domain, reflect_extend
from .study import InverseNormStudy, NormKind, inverse_norm_study
