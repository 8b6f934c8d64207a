from .dictionary import graph_to_spinor, residual_to_spinor, spinor_to_graph, spinor_to_residual
from .graph import GraphSection, ResidualField, linearize, residual
from .newton import (
    GammaPath,
    almost_instanton,
    almost_instanton_error,
    correspondence_sweep,
    newton_solve,
    quadratic_constant,
)
