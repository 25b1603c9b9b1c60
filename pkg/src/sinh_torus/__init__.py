"""Minimal tori in S^3 from a pair of commuting flows on R^18.

Subpackages: `core` (types and 4x4 algebra), `dynamics` (flow fields,
pairings, conserved quantities), `integrate` (RK4 flows and grids),
`surface` (geometry checks and OBJ export), `lawson_hsiang` (closed-form
oracle family), `nullity` (stability-kernel fields and s-vanishing
classification), `cli` (config-driven command line).
"""

from .core import (
    FrameState,
    SkewMatrix4,
    SystemParams,
    Tolerances,
    frame_defect,
    identity_frame,
    isometry_exp,
    orthonormality_defect,
    skew_from_params,
)
from .dynamics import (
    FirstIntegrals,
    Tangent18,
    XiState,
    field_W,
    field_Z,
    first_integrals,
    r_bound,
    xi_field_u,
    xi_field_v,
    xi_of,
)
from .integrate import (
    IntegratorOptions,
    SurfaceGrid,
    commutator_defect,
    evaluate,
    flow,
    invariant_drift_report,
    make_grid,
)

__version__ = "0.1.0"

__all__ = [
    "FrameState",
    "SkewMatrix4",
    "SystemParams",
    "Tolerances",
    "frame_defect",
    "identity_frame",
    "isometry_exp",
    "orthonormality_defect",
    "skew_from_params",
    "FirstIntegrals",
    "Tangent18",
    "XiState",
    "field_W",
    "field_Z",
    "first_integrals",
    "r_bound",
    "xi_field_u",
    "xi_field_v",
    "xi_of",
    "IntegratorOptions",
    "SurfaceGrid",
    "commutator_defect",
    "evaluate",
    "flow",
    "invariant_drift_report",
    "make_grid",
    "__version__",
]
