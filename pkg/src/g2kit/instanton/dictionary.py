"""Identification of graph increments and residuals with thin-slab spinors.

The intrinsic normal directions (V6, V7) form u and the extrinsic ones
(V4, V5), which vanish on the faces, form v:

    u  = V6 - i V7        v  = -V4 + i V5
    w1 = r6 - i r7        w2 = -r4 + i r5

Under this table the linearized residual at the flat graph is exactly the
untwisted thin-slab Dirac operator with h = 1.
"""
from __future__ import annotations

import numpy as np

from ..errors import PreconditionError
from ..thin.domain import Boundary, SpinorField
from .graph import GraphSection, ResidualField

__all__ = ["DICTIONARY", "graph_to_spinor", "spinor_to_graph", "residual_to_spinor", "spinor_to_residual"]

# (spinor slot, real/imag part) -> (sign, component)
DICTIONARY = {
    ("u", "re"): (+1, "v6"),
    ("u", "im"): (-1, "v7"),
    ("v", "re"): (-1, "v4"),
    ("v", "im"): (+1, "v5"),
    ("w1", "re"): (+1, "r6"),
    ("w1", "im"): (-1, "r7"),
    ("w2", "re"): (-1, "r4"),
    ("w2", "im"): (+1, "r5"),
}


def _pack(obj, slot):
    sr, cr = DICTIONARY[(slot, "re")]
    si, ci = DICTIONARY[(slot, "im")]
    return sr * getattr(obj, cr) + 1j * si * getattr(obj, ci)


def _unpack(z, slot):
    sr, cr = DICTIONARY[(slot, "re")]
    si, ci = DICTIONARY[(slot, "im")]
    return {cr: sr * z.real, ci: si * z.imag}


def graph_to_spinor(g: GraphSection) -> SpinorField:
    """MINUS-tagged spinor of an increment (V4 = V5 = 0 on the faces required)."""
    if np.any(g.boundary_values() != 0):
        raise PreconditionError("only increments with (V4, V5) = 0 on the faces map to spinors")
    return SpinorField(_pack(g, "u"), _pack(g, "v"), Boundary.MINUS)


def spinor_to_graph(d, f: SpinorField) -> GraphSection:
    if f.bc is not Boundary.MINUS:
        raise PreconditionError("graph increments correspond to MINUS-tagged spinors")
    parts = {**_unpack(np.asarray(f.u), "u"), **_unpack(np.asarray(f.v), "v")}
    return GraphSection(d, parts["v4"], parts["v5"], parts["v6"], parts["v7"])


def residual_to_spinor(r: ResidualField) -> SpinorField:
    return SpinorField(_pack(r, "w1"), _pack(r, "w2"), Boundary.PLUS)


def spinor_to_residual(d, f: SpinorField) -> ResidualField:
    if f.bc is not Boundary.PLUS:
        raise PreconditionError("residuals correspond to PLUS-tagged spinors")
    parts = {**_unpack(np.asarray(f.u), "w1"), **_unpack(np.asarray(f.v), "w2")}
    return ResidualField(d, parts["r4"], parts["r5"], parts["r6"], parts["r7"])
