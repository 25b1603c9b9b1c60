"""Domain types and 4x4 linear algebra for frames on the unit 3-sphere.

State points live in R^18 = (p, V1, V2, nu, r, s): a point p on S^3, two
tangent vectors V1, V2, a normal nu, the log-conformal factor r and its
v-derivative s.  A frame is *admissible* when (p, V1, V2, nu) is an
orthonormal basis of R^4 with determinant +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

__all__ = [
    "Vector4",
    "as_vector4",
    "SkewMatrix4",
    "FrameState",
    "SystemParams",
    "Tolerances",
    "skew_from_params",
    "identity_frame",
    "frame_matrix",
    "frame_defect",
    "orthonormality_defect",
    "isometry_exp",
    "random_orthonormal_frame",
]

# 4-vectors are plain float64 numpy arrays of shape (4,).
Vector4 = np.ndarray

_EYE4 = np.eye(4)


def as_vector4(x) -> Vector4:
    """Coerce to a finite float64 array of shape (4,)."""
    v = np.asarray(x, dtype=float)
    if v.shape != (4,):
        raise ValueError(f"expected a 4-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("4-vector has non-finite components")
    return v


@dataclass(frozen=True)
class SkewMatrix4:
    """Element of so(4) stored by its six upper-triangle entries.

    Layout (row-major upper triangle): B12=b1, B13=b2, B14=b3, B23=b4,
    B24=b5, B34=b6.  The realized 4x4 matrix is antisymmetric exactly by
    construction.
    """

    b1: float
    b2: float
    b3: float
    b4: float
    b5: float
    b6: float

    def __post_init__(self):
        for name in ("b1", "b2", "b3", "b4", "b5", "b6"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"non-finite entry {name}={val!r}")
            object.__setattr__(self, name, val)

    @property
    def params(self) -> np.ndarray:
        """The six independent entries (b1..b6) as an array."""
        return np.array([self.b1, self.b2, self.b3, self.b4, self.b5, self.b6])

    @property
    def matrix(self) -> np.ndarray:
        """Realized 4x4 antisymmetric matrix."""
        b1, b2, b3, b4, b5, b6 = self.params
        return np.array(
            [
                [0.0, b1, b2, b3],
                [-b1, 0.0, b4, b5],
                [-b2, -b4, 0.0, b6],
                [-b3, -b5, -b6, 0.0],
            ]
        )

    @classmethod
    def from_matrix(cls, m, tol: float = 1e-12) -> "SkewMatrix4":
        """Read back the six entries; rejects matrices that are not skew."""
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m + m.T).max() > tol * scale:
            raise ValueError("matrix is not antisymmetric")
        return cls(m[0, 1], m[0, 2], m[0, 3], m[1, 2], m[1, 3], m[2, 3])

    def conjugated(self, q) -> "SkewMatrix4":
        """Return Q^T B Q expressed in this entry layout.

        For an orthogonal Q whose columns are a frame (f1..f4), the result
        B' satisfies <B' e_i, e_j> = <B f_i, f_j>: it is this matrix seen
        from the frame's basis.  The product is symmetrized before read-back
        so antisymmetry stays exact.
        """
        q = np.asarray(q, dtype=float)
        m = q.T @ self.matrix @ q
        m = 0.5 * (m - m.T)
        return SkewMatrix4.from_matrix(m)

    @property
    def zero(self) -> bool:
        return not np.any(self.params)


def skew_from_params(b1, b2, b3, b4, b5, b6) -> SkewMatrix4:
    """Build an so(4) element from its six independent entries."""
    return SkewMatrix4(b1, b2, b3, b4, b5, b6)


@dataclass(frozen=True)
class FrameState:
    """Point of the 18-dimensional phase space.

    p is the surface point, (V1, V2) the principal-direction frame, nu the
    normal, r the log of the principal curvature over 2 (a = e^{2r}) and
    s = dr/dv.  Flat layout: (p, V1, V2, nu, r, s) in components 0..17,
    so r is component 16 and s component 17.
    """

    p: Vector4
    v1: Vector4
    v2: Vector4
    nu: Vector4
    r: float
    s: float

    def __post_init__(self):
        for name in ("p", "v1", "v2", "nu"):
            object.__setattr__(self, name, as_vector4(getattr(self, name)))
        for name in ("r", "s"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"non-finite {name}={val!r}")
            object.__setattr__(self, name, val)

    def to_array(self) -> np.ndarray:
        """Flatten to the canonical 18-component layout."""
        out = np.empty(18)
        out[0:4] = self.p
        out[4:8] = self.v1
        out[8:12] = self.v2
        out[12:16] = self.nu
        out[16] = self.r
        out[17] = self.s
        return out

    @classmethod
    def from_array(cls, y) -> "FrameState":
        y = np.asarray(y, dtype=float)
        if y.shape != (18,):
            raise ValueError(f"expected 18 components, got shape {y.shape}")
        return cls(y[0:4], y[4:8], y[8:12], y[12:16], y[16], y[17])

    @property
    def a(self) -> float:
        """Principal curvature magnitude, a = e^{2r}."""
        return math.exp(2.0 * self.r)


def identity_frame(r: float = 0.0, s: float = 0.0) -> FrameState:
    """The standard seed (e1, e2, e3, e4, r, s)."""
    return FrameState(_EYE4[0], _EYE4[1], _EYE4[2], _EYE4[3], r, s)


@dataclass(frozen=True)
class SystemParams:
    """Data (B, theta) selecting one instance of the flow system."""

    B: SkewMatrix4
    theta: float

    def __post_init__(self):
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ValueError(f"non-finite theta={theta!r}")
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class Tolerances:
    """Default tolerances shared by the verification commands."""

    frame_tol: float = 1e-8
    integral_tol: float = 1e-8
    residual_tol: float = 1e-3

    def __post_init__(self):
        for name in ("frame_tol", "integral_tol", "residual_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def frame_matrix(state: FrameState) -> np.ndarray:
    """4x4 matrix with columns (p, V1, V2, nu)."""
    return np.stack([state.p, state.v1, state.v2, state.nu], axis=1)


def orthonormality_defect(state: FrameState) -> float:
    """Max deviation |<a,b> - delta_ab| over the 10 distinct vector pairs."""
    f = frame_matrix(state)
    return float(np.abs(f.T @ f - _EYE4).max())


def frame_defect(state: FrameState) -> float:
    """Orthonormality defect plus orientation: max(pair defects, |det - 1|).

    Zero exactly on orthonormal positively-oriented frames.  The defect is
    reported, never repaired; growth along a numerical trajectory is the
    accuracy diagnostic.
    """
    f = frame_matrix(state)
    pair = np.abs(f.T @ f - _EYE4).max()
    det = np.linalg.det(f)
    return float(max(pair, abs(det - 1.0)))


def isometry_exp(B: SkewMatrix4, t: float) -> np.ndarray:
    """Ambient isometry e^{tB} of R^4 (orthogonal, det +1 for skew B)."""
    if not math.isfinite(t):
        raise ValueError(f"non-finite t={t!r}")
    return expm(float(t) * B.matrix)


def random_orthonormal_frame(rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random 4x4 orthogonal matrix with determinant +1."""
    q, rdiag = np.linalg.qr(rng.standard_normal((4, 4)))
    q = q * np.sign(np.diag(rdiag))
    if np.linalg.det(q) < 0:
        q[:, 3] = -q[:, 3]
    return q
