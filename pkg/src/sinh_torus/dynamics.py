"""Right-hand sides of the two commuting flows, the reduced pairing system,
the conserved quantities M, E, A, and the a-priori bound on |r|.

The vector-field components are transcribed one line per component in the
source's printed order; the conservation and commutation tests are the
guard against sign slips.  All functions are pure and accept batched
states: arrays shaped (..., 18) with an so(4) matrix broadcastable to
(..., 4, 4) and theta broadcastable to the batch shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FrameState, SkewMatrix4, SystemParams, as_vector4

__all__ = [
    "Tangent18",
    "XiState",
    "FirstIntegrals",
    "field_Z",
    "field_W",
    "field_z_array",
    "field_w_array",
    "xi_of",
    "xi_of_array",
    "xi_field_u",
    "xi_field_v",
    "first_integrals",
    "first_integrals_array",
    "r_bound",
]


@dataclass(frozen=True)
class Tangent18:
    """Tangent vector to the 18-dimensional phase space."""

    dp: np.ndarray
    dv1: np.ndarray
    dv2: np.ndarray
    dnu: np.ndarray
    dr: float
    ds: float

    def __post_init__(self):
        for name in ("dp", "dv1", "dv2", "dnu"):
            object.__setattr__(self, name, as_vector4(getattr(self, name)))
        object.__setattr__(self, "dr", float(self.dr))
        object.__setattr__(self, "ds", float(self.ds))

    def to_array(self) -> np.ndarray:
        out = np.empty(18)
        out[0:4] = self.dp
        out[4:8] = self.dv1
        out[8:12] = self.dv2
        out[12:16] = self.dnu
        out[16] = self.dr
        out[17] = self.ds
        return out

    @classmethod
    def from_array(cls, y) -> "Tangent18":
        y = np.asarray(y, dtype=float)
        return cls(y[0:4], y[4:8], y[8:12], y[12:16], y[16], y[17])


def _split(y):
    return y[..., 0:4], y[..., 4:8], y[..., 8:12], y[..., 12:16], y[..., 16], y[..., 17]


def _trig(theta):
    ct = np.asarray(np.cos(theta))
    st = np.asarray(np.sin(theta))
    return ct, st, ct[..., None], st[..., None]


def _apply(bmat, vec):
    # (..., 4, 4) @ (..., 4) with broadcasting over leading batch axes
    return np.matmul(bmat, vec[..., :, None])[..., 0]


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def field_z_array(y, bmat, theta) -> np.ndarray:
    """u-direction field on flat states (..., 18)."""
    p, v1, v2, nu, r, s = _split(y)
    ct, st, ctv, stv = _trig(theta)
    er = np.exp(r)
    emr = np.exp(-r)
    erv = er[..., None]
    emrv = emr[..., None]
    bp = _apply(bmat, p)
    bv1 = _apply(bmat, v1)
    bv2 = _apply(bmat, v2)

    out = np.empty_like(y)
    out[..., 0:4] = emrv * (ctv * v1 + stv * v2)
    out[..., 4:8] = s[..., None] * v2 + ctv * (erv * nu - emrv * p)
    out[..., 8:12] = -s[..., None] * v1 - stv * (erv * nu + emrv * p)
    out[..., 12:16] = erv * (-ctv * v1 + stv * v2)
    out[..., 16] = _dot(bp, nu)
    out[..., 17] = ct * _dot(bv2, emrv * nu - erv * p) - st * _dot(
        bv1, emrv * nu + erv * p
    )
    return out


def field_w_array(y, bmat, theta) -> np.ndarray:
    """v-direction field on flat states (..., 18)."""
    p, v1, v2, nu, r, s = _split(y)
    ct, st, ctv, stv = _trig(theta)
    er = np.exp(r)
    emr = np.exp(-r)
    erv = er[..., None]
    emrv = emr[..., None]
    bp = _apply(bmat, p)
    bv1 = _apply(bmat, v1)
    bv2 = _apply(bmat, v2)
    xi1 = _dot(bp, nu)

    out = np.empty_like(y)
    out[..., 0:4] = emrv * (ctv * v2 - stv * v1)
    out[..., 4:8] = -xi1[..., None] * v2 + stv * (-erv * nu + emrv * p)
    out[..., 8:12] = xi1[..., None] * v1 - ctv * (erv * nu + emrv * p)
    out[..., 12:16] = erv * (stv * v1 + ctv * v2)
    out[..., 16] = s
    out[..., 17] = (
        np.exp(-2.0 * r)
        - np.exp(2.0 * r)
        - st * _dot(bv2, emrv * nu - erv * p)
        - ct * _dot(bv1, emrv * nu + erv * p)
    )
    return out


def field_Z(state: FrameState, params: SystemParams) -> Tangent18:
    """u-direction flow field at a single state."""
    y = field_z_array(state.to_array(), params.B.matrix, params.theta)
    return Tangent18.from_array(y)


def field_W(state: FrameState, params: SystemParams) -> Tangent18:
    """v-direction flow field at a single state."""
    y = field_w_array(state.to_array(), params.B.matrix, params.theta)
    return Tangent18.from_array(y)


def xi_of_array(y, bmat) -> np.ndarray:
    """The six frame pairings against B, stacked on a trailing axis.

    Order: <Bp,nu>, <BV1,p>, <BV2,p>, <BV1,V2>, <BV1,nu>, <BV2,nu>.
    """
    p, v1, v2, nu, _, _ = _split(y)
    bp = _apply(bmat, p)
    bv1 = _apply(bmat, v1)
    bv2 = _apply(bmat, v2)
    return np.stack(
        [
            _dot(bp, nu),
            _dot(bv1, p),
            _dot(bv2, p),
            _dot(bv1, v2),
            _dot(bv1, nu),
            _dot(bv2, nu),
        ],
        axis=-1,
    )


def xi_of(state: FrameState, B: SkewMatrix4) -> np.ndarray:
    """Pairings xi_1..xi_6 of a single state against B."""
    return xi_of_array(state.to_array(), B.matrix)


@dataclass(frozen=True)
class XiState:
    """Reduced state (xi_1..xi_6, r, s), optionally carrying a second
    pairing block xi~ for an extra skew matrix."""

    xi: np.ndarray
    r: float
    s: float
    xi_tilde: np.ndarray | None = None

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (6,):
            raise ValueError(f"xi must have shape (6,), got {xi.shape}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "s", float(self.s))
        if self.xi_tilde is not None:
            xt = np.asarray(self.xi_tilde, dtype=float)
            if xt.shape != (6,):
                raise ValueError(f"xi_tilde must have shape (6,), got {xt.shape}")
            object.__setattr__(self, "xi_tilde", xt)

    @classmethod
    def from_frame(
        cls,
        state: FrameState,
        B: SkewMatrix4,
        B_tilde: SkewMatrix4 | None = None,
    ) -> "XiState":
        xt = None if B_tilde is None else xi_of(state, B_tilde)
        return cls(xi_of(state, B), state.r, state.s, xt)

    def to_array(self) -> np.ndarray:
        if self.xi_tilde is None:
            return np.concatenate([self.xi, [self.r, self.s]])
        return np.concatenate([self.xi, [self.r, self.s], self.xi_tilde])

    @classmethod
    def from_array(cls, y) -> "XiState":
        y = np.asarray(y, dtype=float)
        if y.shape == (8,):
            return cls(y[0:6], y[6], y[7])
        if y.shape == (14,):
            return cls(y[0:6], y[6], y[7], y[8:14])
        raise ValueError(f"expected 8 or 14 components, got shape {y.shape}")


def _xi_block_u(x, er, emr, s, ct, st):
    x1, x2, x3, x4, x5, x6 = x
    return np.array(
        [
            er * (ct * x2 - st * x3) + emr * (ct * x5 + st * x6),
            s * x3 - er * ct * x1 + emr * st * x4,
            -s * x2 + er * st * x1 - emr * ct * x4,
            er * (-st * x5 - ct * x6) + emr * (ct * x3 - st * x2),
            s * x6 + er * st * x4 - emr * ct * x1,
            -s * x5 + er * ct * x4 - emr * st * x1,
        ]
    )


def _xi_block_v(x, er, emr, xi1, ct, st):
    # xi1 is the base block's first pairing; it drives the quadratic terms
    # of both the base block and any second block.
    x1, x2, x3, x4, x5, x6 = x
    return np.array(
        [
            -er * (ct * x3 + st * x2) + emr * (ct * x6 - st * x5),
            -xi1 * x3 + er * st * x1 + emr * ct * x4,
            xi1 * x2 + er * ct * x1 + emr * st * x4,
            er * (st * x6 - ct * x5) + emr * (-ct * x2 - st * x3),
            -xi1 * x6 + er * ct * x4 + emr * st * x1,
            xi1 * x5 - er * st * x4 - emr * ct * x1,
        ]
    )


def xi_field_u(x: XiState, theta: float) -> XiState:
    """u-direction tangent of the reduced system (dr/du = xi_1)."""
    ct, st = math.cos(theta), math.sin(theta)
    er, emr = math.exp(x.r), math.exp(-x.r)
    x1, x2, x3, x5, x6 = x.xi[0], x.xi[1], x.xi[2], x.xi[4], x.xi[5]
    dxi = _xi_block_u(x.xi, er, emr, x.s, ct, st)
    dr = x1
    ds = er * (-ct * x3 - st * x2) + emr * (ct * x6 - st * x5)
    dxt = None
    if x.xi_tilde is not None:
        dxt = _xi_block_u(x.xi_tilde, er, emr, x.s, ct, st)
    return XiState(dxi, dr, ds, dxt)


def xi_field_v(x: XiState, theta: float) -> XiState:
    """v-direction tangent of the reduced system (dr/dv = s)."""
    ct, st = math.cos(theta), math.sin(theta)
    er, emr = math.exp(x.r), math.exp(-x.r)
    x1, x2, x3, x5, x6 = x.xi[0], x.xi[1], x.xi[2], x.xi[4], x.xi[5]
    dxi = _xi_block_v(x.xi, er, emr, x1, ct, st)
    dr = x.s
    ds = (
        -2.0 * math.sinh(2.0 * x.r)
        + er * (st * x3 - ct * x2)
        + emr * (-st * x6 - ct * x5)
    )
    dxt = None
    if x.xi_tilde is not None:
        dxt = _xi_block_v(x.xi_tilde, er, emr, x1, ct, st)
    return XiState(dxi, dr, ds, dxt)


@dataclass(frozen=True)
class FirstIntegrals:
    """The three conserved quantities of a flow solution."""

    M: float
    E: float
    A: float

    def __post_init__(self):
        object.__setattr__(self, "M", float(self.M))
        object.__setattr__(self, "E", float(self.E))
        object.__setattr__(self, "A", float(self.A))
        if self.M < 0 or self.E < 0:
            raise ValueError("M and E are sums of squares and cannot be negative")


def first_integrals_array(y, bmat, theta):
    """(M, E, A) fields over batched flat states; returns three arrays."""
    p, v1, v2, nu, r, s = _split(y)
    ct, st = np.cos(theta), np.sin(theta)
    xi = xi_of_array(y, bmat)
    x1, x2, x3 = xi[..., 0], xi[..., 1], xi[..., 2]
    x5, x6 = xi[..., 4], xi[..., 5]
    er = np.exp(r)
    emr = np.exp(-r)
    m = 0.5 * np.sum(xi * xi, axis=-1)
    e = 0.5 * (_dot(p, p) + _dot(v1, v1) + _dot(v2, v2) + _dot(nu, nu))
    a = (
        er * (ct * x2 - st * x3)
        - emr * (ct * x5 + st * x6)
        + 0.5 * s * s
        + np.cosh(2.0 * r)
        - 0.5 * x1 * x1
    )
    return m, e, a


def first_integrals(state: FrameState, params: SystemParams) -> FirstIntegrals:
    """Conserved quantities M, E, A evaluated at one state."""
    m, e, a = first_integrals_array(
        state.to_array(), params.B.matrix, params.theta
    )
    return FirstIntegrals(float(m), float(e), float(a))


_R_BOUND_MARGIN = 1e-6
_R_BOUND_FLOOR = 1e-6
_R_BOUND_CEIL = 50.0


def r_bound(M: float, A: float, r0: float) -> float:
    """Rigorous trap R for |r| along any solution with integrals (M, A).

    Returns the smallest R (up to a fixed 1e-6 margin honoring the strict
    inequality) with cosh(2R) > A + 4M cosh(R) + M^2/2 and R > |r0|, found
    by bisection of g(R) = cosh(2R) - A - 4M cosh(R) - M^2/2 on
    [max(|r0|, 1e-6), 50].
    """

    def g(x):
        return math.cosh(2.0 * x) - A - 4.0 * M * math.cosh(x) - 0.5 * M * M

    lo = max(abs(r0), _R_BOUND_FLOOR)
    hi = _R_BOUND_CEIL
    if g(lo) > 0.0:
        cand = lo + _R_BOUND_MARGIN
        if g(cand) > 0.0:
            return cand
        lo = cand
    if g(hi) <= 0.0:
        raise ValueError(f"no admissible bound below R={hi} for M={M}, A={A}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-13:
            break
    return hi + _R_BOUND_MARGIN
