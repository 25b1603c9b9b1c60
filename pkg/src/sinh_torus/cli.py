"""Config-driven command line: integrate, verify, nullity, export, bound.

One JSON document describes a run (system data, seed, window, resolution,
step, tolerances, output names); every command echoes the resolved config
into its report header so outputs are reproducible byte for byte.  Exit
codes: 0 all checks pass, 1 verification or geometry failure, 2 usage or
config error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    FrameState,
    SkewMatrix4,
    SystemParams,
    Tolerances,
    frame_matrix,
    identity_frame,
    orthonormality_defect,
    skew_from_params,
)
from .dynamics import first_integrals, r_bound
from .integrate import (
    IntegrationDivergedError,
    IntegratorOptions,
    SurfaceGrid,
    commutator_defect,
    invariant_drift_report,
    make_grid,
)
from .lawson_hsiang import (
    LHParams,
    lh_periods,
    lh_state,
    lh_state_at,
    lh_system_params,
)
from .nullity import (
    SeedConditionError,
    check_s_conditions,
    f_B_field,
    h_theta_field,
    stability_residual,
    symmetry_defect,
)
from .surface import (
    PoleProximityError,
    conformality_defect,
    export_mesh,
    gauss_map_defect,
    principal_curvature_defect,
    sinh_gordon_residual,
)

__all__ = ["ConfigError", "RunConfig", "load_config", "main", "parse_angle"]

_ORACLE_AGREEMENT_TOL = 1e-6
_S_FLATNESS_TOL = 1e-6
_SYMMETRY_TOL = 1e-6

_ANGLE_RE = re.compile(
    r"^\s*([+-]?)\s*(\d+(?:\.\d+)?)?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$"
)


class ConfigError(ValueError):
    """Invalid configuration; carries the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def parse_angle(value, key: str = "theta") -> float:
    """Accept radians as a number or a 'pi/4'-style fraction literal."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _ANGLE_RE.match(value)
        if m:
            sign = -1.0 if m.group(1) == "-" else 1.0
            coef = float(m.group(2)) if m.group(2) else 1.0
            den = float(m.group(3)) if m.group(3) else 1.0
            if den == 0:
                raise ConfigError(key, "zero denominator in angle literal")
            return sign * coef * math.pi / den
        try:
            return float(value)
        except ValueError:
            raise ConfigError(key, f"cannot parse angle {value!r}") from None
    raise ConfigError(key, f"cannot parse angle {value!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description."""

    params: SystemParams
    seed: FrameState
    lh: LHParams | None
    window: tuple[float, float, float, float]
    resolution: tuple[int, int]
    opts: IntegratorOptions
    tol: Tolerances
    output: dict
    pole: np.ndarray | None
    resolved: dict


def _parse_seed(spec, tol: Tolerances):
    """Seed forms: 'clifford <r0>', 'lawson-hsiang <m> <k> [variant]', or a
    list of 18 reals."""
    if isinstance(spec, str):
        tokens = spec.split()
        if not tokens:
            raise ConfigError("seed", "empty seed string")
        if tokens[0] == "clifford":
            if len(tokens) > 2:
                raise ConfigError("seed", "clifford form is 'clifford [r0]'")
            try:
                r0 = float(tokens[1]) if len(tokens) == 2 else 0.0
            except ValueError:
                raise ConfigError("seed", f"bad r0 {tokens[1]!r}") from None
            return identity_frame(r0, 0.0), None
        if tokens[0] == "lawson-hsiang":
            if len(tokens) not in (3, 4):
                raise ConfigError(
                    "seed", "form is 'lawson-hsiang <m> <k> [variant]'"
                )
            try:
                m, k = float(tokens[1]), float(tokens[2])
            except ValueError:
                raise ConfigError("seed", "m and k must be numbers") from None
            variant = tokens[3] if len(tokens) == 4 else "u-along-y"
            try:
                lh = LHParams(m, k, variant)
            except ValueError as exc:
                raise ConfigError("seed", str(exc)) from None
            return lh_state(lh, 0.0, 0.0), lh
        raise ConfigError("seed", f"unknown seed kind {tokens[0]!r}")
    if isinstance(spec, (list, tuple)):
        if len(spec) != 18:
            raise ConfigError("seed", f"explicit seed needs 18 reals, got {len(spec)}")
        try:
            state = FrameState.from_array(np.asarray(spec, dtype=float))
        except (TypeError, ValueError) as exc:
            raise ConfigError("seed", str(exc)) from None
        defect = orthonormality_defect(state)
        if defect >= tol.frame_tol:
            raise ConfigError(
                "seed", f"frame defect {defect:.3e} exceeds frame_tol"
            )
        return state, None
    raise ConfigError("seed", f"cannot parse seed {spec!r}")


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")

    known = {
        "params",
        "seed",
        "window",
        "resolution",
        "step",
        "max_arc",
        "tolerances",
        "output",
        "pole",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown configuration key")

    tol_raw = raw.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        raise ConfigError("tolerances", "must be an object")
    try:
        tol = Tolerances(
            frame_tol=float(tol_raw.get("frame_tol", 1e-8)),
            integral_tol=float(tol_raw.get("integral_tol", 1e-8)),
            residual_tol=float(tol_raw.get("residual_tol", 1e-3)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("tolerances", str(exc)) from None

    if "seed" not in raw:
        raise ConfigError("seed", "missing")
    seed, lh = _parse_seed(raw["seed"], tol)

    if "params" in raw:
        praw = raw["params"]
        if not isinstance(praw, dict):
            raise ConfigError("params", "must be an object with 'b' and 'theta'")
        b = praw.get("b")
        if not isinstance(b, (list, tuple)) or len(b) != 6:
            raise ConfigError("params.b", "need six reals (b1..b6)")
        try:
            bmat = skew_from_params(*(float(x) for x in b))
        except (TypeError, ValueError) as exc:
            raise ConfigError("params.b", str(exc)) from None
        theta = parse_angle(praw.get("theta", 0.0), "params.theta")
        params = SystemParams(bmat, theta)
    elif lh is not None:
        params = lh_system_params(lh)
    else:
        params = SystemParams(skew_from_params(0, 0, 0, 0, 0, 0), 0.0)

    wraw = raw.get("window", {})
    if not isinstance(wraw, dict):
        raise ConfigError("window", "must be an object")
    try:
        window = (
            float(wraw.get("u_min", -1.0)),
            float(wraw.get("u_max", 1.0)),
            float(wraw.get("v_min", -1.0)),
            float(wraw.get("v_max", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("window", str(exc)) from None
    if not (window[1] > window[0] and window[3] > window[2]):
        raise ConfigError("window", "window must be nonempty")

    rraw = raw.get("resolution", {})
    if not isinstance(rraw, dict):
        raise ConfigError("resolution", "must be an object")
    try:
        resolution = (int(rraw.get("nu", 41)), int(rraw.get("nv", 41)))
    except (TypeError, ValueError) as exc:
        raise ConfigError("resolution", str(exc)) from None
    if resolution[0] < 2 or resolution[1] < 2:
        raise ConfigError("resolution", "need at least 2 nodes per axis")

    try:
        opts = IntegratorOptions(
            step=float(raw.get("step", 1e-3)),
            max_arc=float(raw.get("max_arc", 100.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("step", str(exc)) from None

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output", "must be an object of file names")

    pole = None
    if "pole" in raw:
        try:
            pole = np.asarray(raw["pole"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError("pole", str(exc)) from None
        if pole.shape != (4,):
            raise ConfigError("pole", "need four components")

    resolved = {
        "params": {
            "b": [params.B.b1, params.B.b2, params.B.b3, params.B.b4,
                  params.B.b5, params.B.b6],
            "theta": params.theta,
        },
        "seed": raw["seed"],
        "window": {
            "u_min": window[0],
            "u_max": window[1],
            "v_min": window[2],
            "v_max": window[3],
        },
        "resolution": {"nu": resolution[0], "nv": resolution[1]},
        "step": opts.step,
        "max_arc": opts.max_arc,
        "tolerances": {
            "frame_tol": tol.frame_tol,
            "integral_tol": tol.integral_tol,
            "residual_tol": tol.residual_tol,
        },
    }
    if pole is not None:
        resolved["pole"] = list(pole)

    return RunConfig(
        params=params,
        seed=seed,
        lh=lh,
        window=window,
        resolution=resolution,
        opts=opts,
        tol=tol,
        output=output,
        pole=pole,
        resolved=resolved,
    )


def _header(cfg: RunConfig, command: str) -> list[str]:
    blob = json.dumps(cfg.resolved, sort_keys=True)
    return [f"# sinh-torus {command}", f"# config {blob}"]


def _write_lines(path: Path, lines: list[str]):
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


class _Report:
    """Accumulates CHECK/INFO lines and the overall pass flag."""

    def __init__(self, cfg: RunConfig, command: str):
        self.lines = _header(cfg, command)
        self.ok = True

    def check(self, name: str, value: float, tol: float, note: str = ""):
        passed = value < tol
        self.ok = self.ok and passed
        suffix = f" {note}" if note else ""
        self.lines.append(
            f"CHECK {name}: {'PASS' if passed else 'FAIL'} "
            f"value={value:.6e} tol={tol:.6e}{suffix}"
        )

    def info(self, text: str):
        self.lines.append(f"INFO {text}")


def _build_grid(cfg: RunConfig) -> SurfaceGrid:
    return make_grid(
        cfg.window, cfg.resolution, cfg.seed, cfg.params, cfg.opts, cfg.tol
    )


def cmd_integrate(cfg: RunConfig, outdir: Path) -> int:
    grid = _build_grid(cfg)
    rep = invariant_drift_report(grid)

    lines = _header(cfg, "integrate")
    lines.append(
        "# u v p0 p1 p2 p3 v10 v11 v12 v13 v20 v21 v22 v23 n0 n1 n2 n3 r s"
    )
    for i in range(grid.nu):
        for j in range(grid.nv):
            u, v = grid.uv_at(i, j)
            vals = [u, v, *grid.data[i, j]]
            lines.append(" ".join(f"{x:.17g}" for x in vals))
    _write_lines(outdir / cfg.output.get("grid", "grid.txt"), lines)

    tol_of = {
        "M": cfg.tol.integral_tol,
        "E": cfg.tol.integral_tol,
        "A": cfg.tol.integral_tol,
        "frame": cfg.tol.frame_tol,
    }
    csv = ["quantity,max_drift,tolerance,pass"]
    all_ok = True
    for name, drift in rep.rows():
        passed = drift < tol_of[name]
        all_ok = all_ok and passed
        csv.append(f"{name},{drift:.17g},{tol_of[name]:.17g},{str(passed).lower()}")
    _write_lines(outdir / cfg.output.get("drift", "drift.csv"), csv)
    return 0 if all_ok else 1


def cmd_verify(cfg: RunConfig, outdir: Path) -> int:
    grid = _build_grid(cfg)
    rep = _Report(cfg, "verify")

    drift = invariant_drift_report(grid)
    rep.check("drift_M", drift.m_drift, cfg.tol.integral_tol)
    rep.check("drift_E", drift.e_drift, cfg.tol.integral_tol)
    rep.check("drift_A", drift.a_drift, cfg.tol.integral_tol)
    rep.check("frame_drift", drift.frame_drift, cfg.tol.frame_tol)

    conf = conformality_defect(grid)
    rep.check("conformality_field", conf.field_based, cfg.tol.frame_tol)
    rep.check("conformality_fd", conf.finite_difference, cfg.tol.residual_tol)
    rep.check("principal_curvature", principal_curvature_defect(grid), cfg.tol.frame_tol)
    rep.check("gauss_map", gauss_map_defect(grid), cfg.tol.frame_tol)
    rep.check("sinh_gordon_residual", sinh_gordon_residual(grid), cfg.tol.residual_tol)

    u_min, u_max, v_min, v_max = cfg.window
    for tag, (u, v) in (
        ("pp", (0.5 * u_max, 0.5 * v_max)),
        ("mm", (0.5 * u_min, 0.5 * v_min)),
    ):
        value = commutator_defect(u, v, cfg.seed, cfg.params, cfg.opts)
        rep.check(f"commutator_{tag}", value, cfg.tol.integral_tol)

    rep.check(
        "stability_f_B",
        stability_residual(grid, f_B_field(grid, cfg.params.B)),
        cfg.tol.residual_tol,
    )
    rep.check(
        "stability_h_theta",
        stability_residual(grid, h_theta_field(grid, cfg.params.theta)),
        cfg.tol.residual_tol,
    )

    if cfg.lh is not None:
        u_period, v_period = lh_periods(cfg.lh.m, cfg.lh.k)
        rep.info(f"u_period={u_period:.12e}")
        rep.info(f"v_period={v_period:.12e}")
        gap = 0.0
        for i in range(grid.nu):
            for j in range(grid.nv):
                u, v = grid.uv_at(i, j)
                want = lh_state_at(cfg.lh, u, v).to_array()
                gap = max(gap, float(np.abs(grid.data[i, j] - want).max()))
        rep.check("closed_form_agreement", gap, _ORACLE_AGREEMENT_TOL)

    rep.lines.append(f"RESULT {'PASS' if rep.ok else 'FAIL'}")
    _write_lines(outdir / cfg.output.get("report", "verify.txt"), rep.lines)
    sys.stdout.write("\n".join(rep.lines) + "\n")
    return 0 if rep.ok else 1


def cmd_nullity(cfg: RunConfig, outdir: Path) -> int:
    grid = _build_grid(cfg)
    rep = _Report(cfg, "nullity")

    if abs(cfg.seed.s) < 1e-9:
        b_seed = cfg.params.B.conjugated(frame_matrix(cfg.seed))
        result = check_s_conditions(b_seed, cfg.params.theta, cfg.seed.r, cfg.tol)
        worst = max(result.defects, key=lambda k: result.defects[k])
        note = (
            ""
            if result.passed
            else f"(condition {worst} defect {result.defects[worst]:.3g})"
        )
        rep.lines.append(
            f"CHECK s-vanishing: {'PASS' if result.passed else 'FAIL'} {note}".rstrip()
        )
        rep.ok = rep.ok and result.passed
        for name in ("b3", "b4", "a", "b", "c"):
            rep.info(f"condition {name} defect={result.defects[name]:.6e}")
        max_s = float(np.abs(grid.s_values).max())
        rep.info(f"max|s|={max_s:.6e} over window")
        if result.passed:
            rep.check("s_flatness", max_s, _S_FLATNESS_TOL)
    else:
        rep.info(f"s-vanishing: skipped (seed has s={cfg.seed.s:.3e})")

    rng = np.random.default_rng(0)
    rep.check(
        "stability_f_B",
        stability_residual(grid, f_B_field(grid, cfg.params.B)),
        cfg.tol.residual_tol,
    )
    for idx in range(2):
        b_probe = skew_from_params(*rng.uniform(-1.0, 1.0, 6))
        rep.check(
            f"stability_f_B_probe{idx}",
            stability_residual(grid, f_B_field(grid, b_probe)),
            cfg.tol.residual_tol,
        )
    rep.check(
        "stability_h_theta",
        stability_residual(grid, h_theta_field(grid, cfg.params.theta)),
        cfg.tol.residual_tol,
    )

    try:
        rep.check("symmetry", symmetry_defect(grid), _SYMMETRY_TOL)
    except (ValueError, SeedConditionError) as exc:
        rep.info(f"symmetry: skipped ({exc})")

    rep.lines.append(f"RESULT {'PASS' if rep.ok else 'FAIL'}")
    _write_lines(outdir / cfg.output.get("report", "nullity.txt"), rep.lines)
    sys.stdout.write("\n".join(rep.lines) + "\n")
    return 0 if rep.ok else 1


def cmd_export(cfg: RunConfig, outdir: Path) -> int:
    grid = _build_grid(cfg)
    path = outdir / cfg.output.get("mesh", "mesh.obj")
    nverts, nfaces = export_mesh(grid, cfg.pole, path)
    sys.stdout.write(f"wrote {path} ({nverts} vertices, {nfaces} faces)\n")
    return 0


def cmd_bound(cfg: RunConfig, outdir: Path) -> int:
    fi = first_integrals(cfg.seed, cfg.params)
    bound = r_bound(fi.M, fi.A, cfg.seed.r)
    lines = _header(cfg, "bound")
    lines.append(f"INFO M={fi.M:.12e}")
    lines.append(f"INFO E={fi.E:.12e}")
    lines.append(f"INFO A={fi.A:.12e}")
    lines.append(f"INFO r0={cfg.seed.r:.12e}")
    lines.append(f"INFO r_bound={bound:.12e}")
    _write_lines(outdir / cfg.output.get("report", "bound.txt"), lines)
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


_COMMANDS = {
    "integrate": cmd_integrate,
    "verify": cmd_verify,
    "nullity": cmd_nullity,
    "export": cmd_export,
    "bound": cmd_bound,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sinh-torus",
        description="Integrate and verify minimal-torus solutions on S^3.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--out", default=".", help="output directory")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](cfg, outdir)
    except PoleProximityError as exc:
        sys.stderr.write(f"export error: {exc}\n")
        return 1
    except IntegrationDivergedError as exc:
        sys.stderr.write(f"integration error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
