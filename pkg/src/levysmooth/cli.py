"""Batch experiment runner.

Subcommands: classify, smoothing-run, resolvent-check, sde-simulate,
generator-check, maximizer-check, list-catalog.  Every run writes
result.json (schema-validated, with the config hash embedded), CSV tables
with unit-annotated headers, and a log of all resolved defaults.

Exit codes: 0 success, 2 completed with hypothesis-violation warnings,
1 hard error.
"""

from __future__ import annotations

import argparse
import datetime
import importlib.resources
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import classify, experiments, symbols as sym
from .config import EXPERIMENT_KINDS, SYMBOL_KINDS, RunConfig, load_config
from .errors import LevysmoothError
from .hoh import EXPRESSION_CATALOG
from .semigroup import ContourSpec, SdeSpec, mc_semigroup
from .experiments import generator_consistency, maximizer_check, resolvent_decay, smoothing_rate

SCHEMA_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        return {"re": float(np.real(obj)), "im": float(np.imag(obj))}
    return obj


def _load_schema() -> dict:
    ref = importlib.resources.files("levysmooth") / "schemas" / "result.schema.json"
    return json.loads(ref.read_text())


def write_result(out_dir: Path, cfg: RunConfig, results: dict, warnings: list,
                 resolved: dict, timestamp: bool = True) -> Path:
    import jsonschema

    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "resolved_defaults": _jsonable(resolved),
        "results": _jsonable(results),
        "warnings": list(warnings),
    }
    if timestamp:
        doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    jsonschema.validate(doc, _load_schema())
    path = out_dir / "result.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def write_csv(path: Path, cfg: RunConfig, header: str, rows):
    with open(path, "w") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row) + "\n")


def write_log(out_dir: Path, cfg: RunConfig, resolved: dict, jobs: int):
    lines = [
        f"config_hash = {cfg.config_hash()}",
        f"experiment = {cfg.experiment}",
        f"seed = {cfg.seed}",
        f"jobs_ceiling = {jobs}",
        f"grid = d={cfg.grid.d} L={cfg.grid.L} n={cfg.grid.n}",
        f"psi = {cfg.psi.name() if cfg.psi else 'none'}",
        f"q = {cfg.q.name() if cfg.q else 'identity'}",
        f"sigma = {cfg.coeffs.sigma[0].name}",
        f"b = {cfg.coeffs.b[0].name}",
    ]
    for k, v in sorted(resolved.items()):
        lines.append(f"{k} = {v}")
    (out_dir / "run.log").write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# experiment dispatchers


def run_classify(cfg: RunConfig, out_dir: Path):
    p = cfg.params
    k = int(p.get("k", 0))
    window = (float(p.get("xi_lo", 1e2)), float(p.get("xi_hi", 1e5)))
    report = classify.estimate_bg_index(cfg.psi, k=k, window=window)
    sample = classify.default_sector_sample(cfg.psi.dim, window[0], window[1])
    sector = classify.sector_kappa(cfg.psi, sample)
    rng = np.random.default_rng(cfg.seed)
    pts = rng.uniform(-5, 5, size=16 if cfg.psi.dim == 1 else (16, 2))
    nd = classify.check_negative_definite(cfg.psi, pts)

    results = {
        "indices": {
            "s": report.s,
            "s_plus": report.s_plus,
            "s_minus": report.s_minus,
            "k": report.order_k,
            "fit_window": list(report.fit_window),
            "per_alpha": [
                {"alpha": list(a), "exponent": lam, "residual": r}
                for a, lam, r in report.per_alpha
            ],
        },
        "sector": {
            "sectorial": sector.sectorial,
            "kappa": sector.kappa,
            "theta": sector.theta,
            "omega": sector.omega,
            "sample": sector.grid_description,
        },
        "negative_definite": bool(nd.is_negative_definite),
        "min_eigenvalue": nd.min_eigenvalue,
    }
    resolved = {"k": k, "window": window, "n_definite_points": 16}
    warnings = [] if report.reliable() else ["index fit residual above 0.1"]
    return results, warnings, resolved


def run_smoothing(cfg: RunConfig, out_dir: Path, contour_overrides: dict):
    p = cfg.params
    engine = p.get("engine", "multiplier")
    rho = float(p.get("rho", 0.0))
    n_t = int(p.get("n_t", 12))
    t_grid = None
    if "t_min" in p or "t_max" in p:
        t_grid = np.logspace(
            math.log10(float(p.get("t_min", 1e-3))),
            math.log10(float(p.get("t_max", 1.0))),
            n_t,
        )
    spec = ContourSpec(**contour_overrides)
    mc_spec = None
    if engine == "mc":
        mc_spec = SdeSpec(
            driver=cfg.psi,
            coeff=cfg.coeffs,
            step=float(p.get("step", 0.01)),
            paths=int(p.get("paths", 10000)),
            seed=cfg.seed,
        )
    res = smoothing_rate(
        cfg.psi,
        cfg.q,
        cfg.coeffs,
        rho=rho,
        u=None,
        grid=cfg.grid,
        t_grid=t_grid,
        engine=engine,
        borderline=bool(p.get("borderline", False)),
        contour_spec=spec,
        mc_spec=mc_spec,
        n_t=n_t,
    )
    logr = np.log(res.ratios)
    logt = np.log(res.t_values)
    local = np.full(len(res.t_values), float("nan"))
    local[1:] = -(np.diff(logr) / np.diff(logt))
    write_csv(
        out_dir / "norms.csv",
        cfg,
        "t (time),norm (H^rho),ratio (gain, dimensionless),local_slope (dimensionless)",
        [
            (t, n, r, "" if np.isnan(s) else repr(float(s)))
            for t, n, r, s in zip(res.t_values, res.norms, res.ratios, local)
        ],
    )
    results = {
        "rho": res.rho,
        "t_values": res.t_values,
        "norms": res.norms,
        "norm_ratios": res.norm_ratios,
        "ratios": res.ratios,
        "ratio_kind": res.ratio_kind,
        "gamma_fit": res.gamma_fit,
        "gamma_predicted": res.gamma_predicted,
        "fit_residual": res.fit_residual,
        "constants": res.constants,
        "s1": res.s1,
        "s2": res.s2,
        "theta": res.theta,
        "engine": res.engine,
        "window": list(res.window),
        "flags": list(res.flags),
        "small_xi": res.small_xi,
        "oracle_envelope": res.oracle_envelope,
    }
    warnings = [f for f in res.flags if f == "hypothesis_violated_s2_ge_s1"]
    resolved = {
        "engine": engine,
        "rho": rho,
        "n_t": n_t,
        "u_spectrum": "bracket^-(rho+1) broadband" if engine != "mc" else "log-flat modes",
        "contour": contour_overrides or "defaults",
    }
    return results, warnings, resolved


def run_resolvent(cfg: RunConfig, out_dir: Path):
    p = cfg.params
    rho = float(p.get("rho", 0.0))
    res = resolvent_decay(
        cfg.psi,
        cfg.q,
        cfg.coeffs,
        rho,
        None,
        grid=cfg.grid,
        lam_range=(float(p.get("lambda_lo", 1e1)), float(p.get("lambda_hi", 1e4))),
        n_points=int(p.get("n_points", 16)),
    )
    for i, ray in enumerate(res.rays):
        write_csv(
            out_dir / f"ray{i}.csv",
            cfg,
            "lambda (modulus),ratio (gain, dimensionless)",
            list(zip(ray["lambda_values"], ray["ratios"])),
        )
    results = {
        "rho": rho,
        "epsilon_minus_1": res.epsilon_minus_1,
        "s1": res.s1,
        "s2": res.s2,
        "rays": [
            {
                "angle": r["angle"],
                "slope": r["slope"],
                "residual": r["residual"],
                "lambda_values": r["lambda_values"],
                "ratios": r["ratios"],
            }
            for r in res.rays
        ],
    }
    return results, [], {"rho": rho, "rays": [r["angle"] for r in res.rays]}


def run_sde(cfg: RunConfig, out_dir: Path):
    p = cfg.params
    t = float(p.get("t", 0.1))
    xi0 = float(p.get("xi0", 1.0))
    sde = SdeSpec(
        driver=cfg.psi,
        coeff=cfg.coeffs,
        step=float(p.get("step", 0.01)),
        paths=int(p.get("paths", 10000)),
        seed=cfg.seed,
    )
    x_grid = np.linspace(-float(p.get("x_max", 3.0)), float(p.get("x_max", 3.0)),
                         int(p.get("n_x", 13)))
    res = mc_semigroup(sde, lambda x: np.exp(1j * xi0 * x), t, x_grid)
    write_csv(
        out_dir / "mc.csv",
        cfg,
        "x (state),re_mean (dimensionless),im_mean (dimensionless),"
        "stderr (dimensionless),n_excluded (paths)",
        [
            (x, m.real, m.imag, s, int(ne))
            for x, m, s, ne in zip(res.x, res.mean, res.stderr, res.n_excluded)
        ],
    )
    results = {
        "t": t,
        "xi0": xi0,
        "x": res.x,
        "mean": res.mean,
        "stderr": res.stderr,
        "n_excluded": res.n_excluded,
        "paths": res.paths,
    }
    return results, [], {"t": t, "xi0": xi0, "step": sde.step, "paths": sde.paths}


def run_generator_check(cfg: RunConfig, out_dir: Path):
    p = cfg.params
    t_small = float(p.get("t_small", 0.01))
    sde = SdeSpec(
        driver=cfg.psi,
        coeff=cfg.coeffs,
        step=float(p.get("step", t_small)),
        paths=int(p.get("paths", 100000)),
        seed=cfg.seed,
    )
    x_set = p.get("x_set", [-1.5, -0.5, 0.5, 1.5])
    xi_set = p.get("xi_set", [0.0, 0.5, 1.0, 2.0])
    rep = generator_consistency(sde, x_set, xi_set, t_small)
    write_csv(
        out_dir / "generator.csv",
        cfg,
        "x (state),xi (frequency),re_est (rate),im_est (rate),re_target (rate),"
        "im_target (rate),bias_bound (rate),stderr (rate),inside (bool)",
        [
            (pt.x, pt.xi, pt.estimate.real, pt.estimate.imag, pt.target.real,
             pt.target.imag, pt.bias_bound, pt.stderr, pt.inside_band)
            for pt in rep.points
        ],
    )
    results = {
        "passed": rep.passed,
        "max_deviation": rep.max_deviation,
        "n_points": len(rep.points),
        "t_small": t_small,
    }
    warnings = [] if rep.passed else ["generator identity outside its error band"]
    return results, warnings, {"t_small": t_small, "paths": sde.paths}


def run_maximizer(cfg: RunConfig, out_dir: Path):
    p = cfg.params
    s1 = float(p.get("s1", 2.0))
    s2 = float(p.get("s2", 1.0))
    lams = p.get("lambdas", [1.0, 4.0, 16.0])
    rows = []
    for lam in lams:
        chk = maximizer_check(s1, s2, float(lam))
        rows.append(
            {
                "lambda": float(lam),
                "analytic": chk.analytic,
                "numeric": chk.numeric,
                "relative_gap": chk.relative_gap,
            }
        )
    results = {"s1": s1, "s2": s2, "checks": rows}
    return results, [], {"s1": s1, "s2": s2, "lambdas": lams}


# ---------------------------------------------------------------------------
# entry point


def list_catalog() -> str:
    lines = ["symbols:"]
    for k in SYMBOL_KINDS:
        lines.append(f"  {k}")
    lines.append("coefficient fields:")
    for k in sorted(EXPRESSION_CATALOG):
        lines.append(f"  {k}")
    lines.append("  <number> (constant)")
    lines.append("experiments:")
    for k in EXPERIMENT_KINDS:
        lines.append(f"  {k}")
    return "\n".join(lines)


_SUBCOMMAND_TO_KIND = {
    "classify": "classify",
    "smoothing-run": "smoothing",
    "resolvent-check": "resolvent",
    "sde-simulate": "sde",
    "generator-check": "generator-check",
    "maximizer-check": "maximizer",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levysmooth", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMAND_TO_KIND:
        sp = subs.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None, help="output directory override")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=1, help="worker ceiling")
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
        if name == "smoothing-run":
            sp.add_argument("--theta-prime", type=float, default=None)
            sp.add_argument("--rho", type=float, default=None)
            sp.add_argument("--n-ray", type=int, default=200)
            sp.add_argument("--n-arc", type=int, default=64)
    subs.add_parser("list-catalog")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-catalog":
        print(list_catalog())
        return 0

    try:
        cfg = load_config(args.config, overrides=args.override, seed=args.seed)
        expected = _SUBCOMMAND_TO_KIND[args.command]
        if cfg.experiment != expected:
            raise LevysmoothError(
                f"config experiment.kind = {cfg.experiment!r} does not match "
                f"subcommand {args.command!r}"
            )
        out_dir = Path(args.out) if args.out else Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        if cfg.experiment == "classify":
            results, warnings, resolved = run_classify(cfg, out_dir)
        elif cfg.experiment == "smoothing":
            contour = {}
            if getattr(args, "theta_prime", None) is not None:
                contour["theta_prime"] = args.theta_prime
            if getattr(args, "rho", None) is not None:
                contour["rho"] = args.rho
            if getattr(args, "n_ray", 200) != 200:
                contour["n_ray"] = args.n_ray
            if getattr(args, "n_arc", 64) != 64:
                contour["n_arc"] = args.n_arc
            results, warnings, resolved = run_smoothing(cfg, out_dir, contour)
        elif cfg.experiment == "resolvent":
            results, warnings, resolved = run_resolvent(cfg, out_dir)
        elif cfg.experiment == "sde":
            results, warnings, resolved = run_sde(cfg, out_dir)
        elif cfg.experiment == "generator-check":
            results, warnings, resolved = run_generator_check(cfg, out_dir)
        else:
            results, warnings, resolved = run_maximizer(cfg, out_dir)

        write_result(out_dir, cfg, results, warnings, resolved)
        write_log(out_dir, cfg, resolved, args.jobs)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        return 2 if warnings else 0
    except LevysmoothError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
