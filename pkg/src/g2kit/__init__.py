"""Octonion algebra, G2 forms and thin-slab instanton numerics."""
from .errors import (
    ConfigError,
    DegenerateInputError,
    G2KitError,
    GridMismatchError,
    PreconditionError,
    SingularOperatorError,
    SolverError,
)
from .forms import (
    AlternatingForm,
    TauTensor,
    hodge_star,
    is_associative,
    is_coassociative,
    omega0,
    star_omega0,
    tau,
)
from .frames import Frame, cayley_dickson, random_frame, verify_frame
from .octonion import ImOctonion, Octonion, cross

__version__ = "0.1.0"
