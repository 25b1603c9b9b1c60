"""Kernel fields of the stability operator, the s-vanishing conditions and
their generating families, and the point-symmetry diagnostic.

On a solution grid the two torus kernel fields are definitional
pass-throughs of stored data: the in-phase field is twice the first
pairing (dr/du) and its quarter-turn is twice s (dr/dv).  They are served
from those arrays bit-for-bit rather than re-derived by differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SkewMatrix4, Tolerances
from .integrate import SurfaceGrid

__all__ = [
    "SeedConditionError",
    "NullityFields",
    "nullity_fields",
    "f_B_field",
    "h_theta_field",
    "stability_residual",
    "s_vanishing_family",
    "check_s_conditions",
    "SConditionCheck",
    "symmetry_defect",
]


class SeedConditionError(ValueError):
    """Seed violates the pairing conditions required by a diagnostic."""


def f_B_field(grid: SurfaceGrid, b_tilde: SkewMatrix4) -> np.ndarray:
    """Nodewise rotation-kernel field <B~ p, nu>."""
    bp = np.matmul(b_tilde.matrix, grid.points[..., :, None])[..., 0]
    return np.sum(bp * grid.normals, axis=-1)


def h_theta_field(grid: SurfaceGrid, theta_prime: float) -> np.ndarray:
    """Torus kernel field at probe angle theta_prime.

    Computed from the solution identities rather than grid differencing:
    at the grid's own angle it is exactly twice the first pairing, a
    quarter turn later exactly twice s, and in between the rotation
    combination cos(dt) 2*xi1 + sin(dt) 2*s with dt = theta_prime - theta.
    """
    dt = float(theta_prime) - grid.params.theta
    if dt == 0.0:
        return 2.0 * grid.xi_values[..., 0]
    return math.cos(dt) * 2.0 * grid.xi_values[..., 0] + math.sin(
        dt
    ) * 2.0 * grid.s_values


@dataclass(frozen=True)
class NullityFields:
    """Per-node kernel candidates and the curvature field a = e^{2r}."""

    f_b: np.ndarray
    h_theta: np.ndarray
    h_theta_perp: np.ndarray
    a: np.ndarray


def nullity_fields(grid: SurfaceGrid, b_tilde: SkewMatrix4) -> NullityFields:
    """Assemble the kernel fields; h slots are exact copies of the stored
    solution data (2*xi1 and 2*s nodewise)."""
    return NullityFields(
        f_b=f_B_field(grid, b_tilde),
        h_theta=2.0 * grid.xi_values[..., 0],
        h_theta_perp=2.0 * grid.s_values,
        a=np.exp(2.0 * grid.r_values),
    )


def stability_residual(grid: SurfaceGrid, f: np.ndarray) -> float:
    """Max interior residual of the second-variation operator on f.

    The surface Laplacian is a * (flat 5-point Laplacian) by conformality,
    so the residual is |-a Lap(f) - 2 a^2 f - 2 f|, O(du^2) for true
    kernel elements.
    """
    if grid.nu < 3 or grid.nv < 3:
        raise ValueError("stability residual needs at least 3 nodes per axis")
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.nu, grid.nv):
        raise ValueError(f"field shape {f.shape} does not match grid")
    lap = (f[2:, 1:-1] - 2.0 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / grid.du**2 + (
        f[1:-1, 2:] - 2.0 * f[1:-1, 1:-1] + f[1:-1, :-2]
    ) / grid.dv**2
    a = np.exp(2.0 * grid.r_values[1:-1, 1:-1])
    f_in = f[1:-1, 1:-1]
    return float(np.abs(-a * lap - 2.0 * a * a * f_in - 2.0 * f_in).max())


def s_vanishing_family(
    theta: float,
    r0: float,
    lam: float = 0.0,
    b: tuple[float, float] | None = None,
) -> SkewMatrix4:
    """Matrices whose flow keeps s identically zero from the standard seed.

    Returns the affine family member base + lam * direction for the given
    (theta, r0).  Passing b = (b1, b2) instead selects the two-parameter
    family available only at r0 = 0 (the stabilizer of the flat torus
    through e1 with normal e4).
    """
    if b is not None:
        if r0 != 0.0:
            raise ValueError("the (b1, b2) family requires r0 = 0")
        b1, b2 = (float(x) for x in b)
        return SkewMatrix4.from_matrix(
            np.array(
                [
                    [0.0, b1, b2, 0.0],
                    [-b1, 0.0, 0.0, b1],
                    [-b2, 0.0, 0.0, -b2],
                    [0.0, -b1, b2, 0.0],
                ]
            )
        )
    er = math.exp(r0)
    emr = math.exp(-r0)
    ct, st = math.cos(theta), math.sin(theta)
    base = np.array(
        [
            [0.0, -er * ct, er * st, 0.0],
            [er * ct, 0.0, 0.0, -emr * ct],
            [-er * st, 0.0, 0.0, -emr * st],
            [0.0, emr * ct, emr * st, 0.0],
        ]
    )
    direction = np.array(
        [
            [0.0, emr * st, -emr * ct, 0.0],
            [-emr * st, 0.0, 0.0, er * st],
            [emr * ct, 0.0, 0.0, er * ct],
            [0.0, -er * st, -er * ct, 0.0],
        ]
    )
    return SkewMatrix4.from_matrix(base + float(lam) * direction)


@dataclass(frozen=True)
class SConditionCheck:
    """Outcome of the five s-vanishing conditions with per-condition defects."""

    passed: bool
    defects: dict


def check_s_conditions(
    B: SkewMatrix4,
    theta: float,
    r0: float,
    tol: float | Tolerances | None = None,
) -> SConditionCheck:
    """Decide whether the flow from the seed (e1, e2, e3, e4, r0, 0) keeps
    s identically zero.

    B must be expressed in the basis of that seed; for a general seed frame
    conjugate B through the frame matrix first.  In pairing coordinates the
    five conditions read: xi1 = 0, xi4 = 0, ds/dv = 0, ds/du = 0 and
    d(xi4)/dv = 0 at the seed; at the identity frame the pairing values
    reduce to signed matrix entries (xi1 = -b3, xi2 = b1, xi3 = b2,
    xi4 = -b4, xi5 = -b5, xi6 = -b6), which turns the derivative conditions
    into the three linear entry conditions of the classification.
    """
    if tol is None:
        tol = Tolerances().integral_tol
    elif isinstance(tol, Tolerances):
        tol = tol.integral_tol
    from .core import identity_frame
    from .dynamics import xi_of

    xi = xi_of(identity_frame(r0, 0.0), B)
    x1, x2, x3, x4, x5, x6 = xi
    er, emr = math.exp(r0), math.exp(-r0)
    ct, st = math.cos(theta), math.sin(theta)
    ds_dv = -2.0 * math.sinh(2.0 * r0) + er * (st * x3 - ct * x2) + emr * (
        -st * x6 - ct * x5
    )
    ds_du = er * (-ct * x3 - st * x2) + emr * (ct * x6 - st * x5)
    dxi4_dv = er * (st * x6 - ct * x5) + emr * (-ct * x2 - st * x3)
    defects = {
        "b3": abs(x1),
        "b4": abs(x4),
        "a": abs(ds_dv),
        "b": abs(ds_du),
        "c": abs(dxi4_dv),
    }
    return SConditionCheck(
        passed=all(d < tol for d in defects.values()), defects=defects
    )


def symmetry_defect(grid: SurfaceGrid, seed_tol: float = 1e-12) -> float:
    """Max |r(u,v) - r(-u,-v)| over an origin-symmetric grid.

    Requires the window to be symmetric about the origin and the seed to
    satisfy xi1 = s = xi4 = 0 there; those conditions force all odd
    derivatives of r to vanish at the origin.
    """
    u_hi = grid.u0 + (grid.nu - 1) * grid.du
    v_hi = grid.v0 + (grid.nv - 1) * grid.dv
    if abs(grid.u0 + u_hi) > 1e-9 or abs(grid.v0 + v_hi) > 1e-9:
        raise ValueError("grid window is not symmetric about the origin")
    from .dynamics import xi_of

    xi = xi_of(grid.seed, grid.params.B)
    conditions = {"xi1": xi[0], "s": grid.seed.s, "xi4": xi[3]}
    for name, value in conditions.items():
        if abs(value) > seed_tol:
            raise SeedConditionError(
                f"seed violates {name}(0,0)=0: value {value:.6e}"
            )
    r = grid.r_values
    return float(np.abs(r - r[::-1, ::-1]).max())
