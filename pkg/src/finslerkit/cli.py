"""Command-line entry point.

    finslerkit <command> --config PATH [--format text|json] [--seed N]
               [--samples N] [--tol X] [--method M] [--orthonormalize]

Exit status: 0 when every asserted check passes, 1 on a failed check or a
computation error, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable

import numpy as np

from . import derivatives as dd
from . import motion as mo
from . import ortho
from .config import ConfigError, SpaceConfig, load_config
from .errors import FinslerError
from .norms import homogeneity_residual, sample_directions
from .report import Report

COMMANDS: dict[str, Callable[[SpaceConfig, Report], None]] = {}


def command(name: str):
    def register(fn):
        COMMANDS[name] = fn
        return fn
    return register


def _samples(cfg: SpaceConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    drawn = sample_directions(cfg.norm, cfg.samples, rng) if cfg.samples else np.zeros((0, cfg.dimension))
    if cfg.directions is not None:
        drawn = np.vstack([cfg.directions, drawn])
    return drawn


def _working_basis(cfg: SpaceConfig) -> ortho.Basis:
    return ortho.orthonormalize(cfg.norm, cfg.basis, reorder=cfg.reorder, method=cfg.method)


@command("identities")
def cmd_identities(cfg: SpaceConfig, rep: Report) -> None:
    pts = _samples(cfg)
    rep.results["sample_count"] = len(pts)
    rng = np.random.default_rng(cfg.seed + 1)
    lams = rng.uniform(0.1, 10.0, size=len(pts))
    hom = max(homogeneity_residual(cfg.norm, v, lam) for v, lam in zip(pts, lams))
    rep.check("homogeneity", hom, cfg.tolerances["homogeneity"])
    methods = ["hyperdual", "fd"] if cfg.method in ("auto", "analytic") else [cfg.method]
    for method in methods:
        tol = cfg.tolerances[f"identity_{method}"]
        for r in dd.check_euler_identities(cfg.norm, pts, method=method, tol=tol):
            rep.check(f"{method}.{r.name}", r.max_residual, r.tolerance)
            if "f_level_max_residual" in r.extra:
                rep.observe(f"{method}.{r.name}.f_level", r.extra["f_level_max_residual"])
    if "hyperdual" in methods and "fd" in methods:
        hd = dd.metrics_at(cfg.norm, pts, "hyperdual")
        fd = dd.metrics_at(cfg.norm, pts, "fd")
        scale = np.abs(hd).reshape(len(pts), -1).max(axis=1)
        rel = (np.abs(hd - fd).reshape(len(pts), -1).max(axis=1) / scale).max() if len(pts) else 0.0
        rep.check("metric_cross_path", rel, 1e-5)


@command("orthogonalize")
def cmd_orthogonalize(cfg: SpaceConfig, rep: Report) -> None:
    orth = ortho.orthogonalize(cfg.norm, cfg.basis, reorder=cfg.reorder, method=cfg.method)
    unit = ortho.normalize(cfg.norm, orth)
    prof = ortho.metric_profile(cfg.norm, unit, cfg.method)
    tol = cfg.tolerances["orthonormal"]
    rep.check("upper_defect", prof.upper_defect, tol)
    rep.check("diagonal_defect", prof.diagonal_defect, tol)
    src = cfg.basis.vectors if orth.order is None else cfg.basis.vectors[list(orth.order)]
    rep.check("span_defect", ortho.span_defect(src, unit.vectors), cfg.tolerances["span"])
    rep.results["orthogonal_basis"] = orth.vectors
    rep.results["orthonormal_basis"] = unit.vectors
    rep.results["signature"] = list(unit.signature)
    if unit.order is not None:
        rep.results["input_order"] = list(unit.order)


@command("profile")
def cmd_profile(cfg: SpaceConfig, rep: Report) -> None:
    basis = _working_basis(cfg) if cfg.orthonormalize else cfg.basis
    prof = ortho.metric_profile(cfg.norm, basis, cfg.method)
    tol = cfg.tolerances["orthonormal"] if prof.method != "fd" else max(cfg.tolerances["orthonormal"], 1e-5)
    rep.check("upper_defect", prof.upper_defect, tol)
    rep.check("diagonal_defect", prof.diagonal_defect, tol)
    if prof.indefinite:
        rep.results["diagonal_convention"] = "|G_kk| = 1 (indefinite extension)"
    rep.results["basis"] = basis.vectors
    rep.results["signature"] = list(prof.signature)
    rep.results["G"] = prof.G
    rep.results["P"] = prof.P


def _motion_system(cfg: SpaceConfig):
    basis = _working_basis(cfg)
    system = mo.assemble_motion_constraints(cfg.norm, basis, cfg.method, tol=_profile_tol(cfg))
    algebra = mo.solve_lie_algebra(system, cfg.tolerances["rank"])
    return basis, system, algebra


def _profile_tol(cfg: SpaceConfig) -> float:
    return max(cfg.tolerances["orthonormal"], 1e-5) if cfg.method == "fd" else cfg.tolerances["orthonormal"]


@command("motions")
def cmd_motions(cfg: SpaceConfig, rep: Report) -> None:
    basis, system, algebra = _motion_system(cfg)
    n = cfg.dimension
    rep.results["basis"] = basis.vectors
    rep.results["rank"] = system.rank
    rep.results["dimension"] = algebra.dimension
    rep.results["generators"] = algebra.generators
    tol = cfg.tolerances["residual"]
    for i, g in enumerate(algebra.generators):
        rep.check(f"generator[{i}].residual", system.residual(g), tol)
    rep.check("cartan_term", system.cartan_magnitude, cfg.tolerances["cartan"] * (1.0 + system.cartan_scale))
    if cfg.norm.constant_metric:
        rep.check("dimension_defect", abs(algebra.dimension - n * (n - 1) // 2), 0)


@command("quasimotions")
def cmd_quasimotions(cfg: SpaceConfig, rep: Report) -> None:
    basis, system, algebra = _motion_system(cfg)
    quasi = mo.assemble_quasimotion_constraints(cfg.norm, basis, cfg.method, tol=_profile_tol(cfg))
    qalg = mo.solve_lie_algebra(quasi, cfg.tolerances["rank"])
    cmp = mo.compare_algebras(system, quasi, cfg.tolerances["angle"], cfg.tolerances["rank"])
    rep.results["motion_dimension"] = cmp.dimension_a
    rep.results["quasimotion_dimension"] = cmp.dimension_b
    rep.results["quasimotion_generators"] = qalg.generators
    rep.results["quasimotion_coordinate_generators"] = [mo.coordinate_generator(g) for g in qalg.generators]
    rep.check("dimension_mismatch", abs(cmp.dimension_a - cmp.dimension_b), 0)
    rep.check("max_principal_angle", cmp.max_angle, cfg.tolerances["angle"])


@command("drift")
def cmd_drift(cfg: SpaceConfig, rep: Report) -> None:
    basis, system, algebra = _motion_system(cfg)
    orders, consts = [], []
    for i, g in enumerate(algebra.generators):
        d = mo.verify_first_order_preservation(cfg.norm, basis, g, mo.EPS_LADDER, cfg.method,
                                               tol=_profile_tol(cfg), min_order=cfg.tolerances["min_order"])
        rep.check(f"generator[{i}].order", d.order, cfg.tolerances["min_order"], upper=False)
        orders.append(d.order)
        consts.append(d.constant)
        rep.results[f"generator[{i}].deviations"] = np.array(d.deviations)
    rep.results["eps"] = np.array(mo.EPS_LADDER)
    rep.results["orders"] = np.array(orders)
    rep.results["constants"] = np.array(consts)


@command("bracket")
def cmd_bracket(cfg: SpaceConfig, rep: Report) -> None:
    basis, system, algebra = _motion_system(cfg)
    table = mo.bracket_table(algebra, system)
    rep.results["dimension"] = algebra.dimension
    rep.results["residual_table"] = table
    worst = float(table.max()) if table.size else 0.0
    if cfg.norm.constant_metric:
        rep.check("bracket_closure", worst, cfg.tolerances["bracket"])
        consts, fit = mo.structure_constants(algebra)
        rep.check("structure_constant_fit", fit, cfg.tolerances["bracket"])
    else:
        rep.observe("bracket_closure", worst)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finslerkit", description="Minkowski-space (Finsler) toolkit")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON space configuration")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, help="override the sampling seed")
    p.add_argument("--samples", type=int, help="override the number of random directions")
    p.add_argument("--tol", type=float, help="override the command's main tolerance")
    p.add_argument("--method", choices=dd.METHODS, help="derivative route")
    p.add_argument("--orthonormalize", action="store_true",
                   help="profile: orthonormalize the configured basis first")
    p.add_argument("--output", help="write the report here instead of stdout")
    return p


_TOL_KEYS = {
    "identities": ("identity_hyperdual", "identity_fd"),
    "orthogonalize": ("orthonormal",),
    "profile": ("orthonormal",),
    "motions": ("residual",),
    "quasimotions": ("angle",),
    "drift": ("orthonormal",),
    "bracket": ("bracket",),
}


def _apply_overrides(cfg: SpaceConfig, args: argparse.Namespace) -> None:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.samples is not None:
        if args.samples < 0:
            raise ConfigError("--samples", "must be non-negative")
        cfg.samples = args.samples
    if args.method is not None:
        cfg.method = args.method
    if args.orthonormalize:
        cfg.orthonormalize = True
    if args.tol is not None:
        if args.tol < 0:
            raise ConfigError("--tol", "must be non-negative")
        for key in _TOL_KEYS[args.command]:
            cfg.tolerances[key] = args.tol


def run(argv: list[str] | None = None) -> tuple[Report | None, int]:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None, 2
    rep = Report(
        command=args.command,
        inputs={"config": args.config, "norm": cfg.norm.to_config(), "seed": cfg.seed,
                "samples": cfg.samples, "method": cfg.method, "basis": cfg.basis.vectors.tolist()},
    )
    try:
        COMMANDS[args.command](cfg, rep)
    except FinslerError as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
    text = rep.render(args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return rep, rep.exit_code


def main(argv: list[str] | None = None) -> int:
    _, code = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
