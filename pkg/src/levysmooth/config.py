"""Run configuration: TOML parsing, validation, and catalog resolution.

A config file has blocks [psi], [q], [coefficients], [grid], [experiment],
[output], plus a top-level seed.  Every catalog name and numeric domain is
validated before any computation; errors name the offending key.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import symbols as sym
from .errors import ConfigError, DescriptorInvalidError
from .hoh import (
    EXPRESSION_CATALOG,
    CoefficientField,
    ScalarExpression,
    constant_expression,
    expression,
)
from .spectral import GridSpec

SYMBOL_KINDS = (
    "alpha_stable",
    "brownian",
    "meixner",
    "nig",
    "subordinated_drift",
    "power",
    "bessel_power",
    "one",
)

EXPERIMENT_KINDS = (
    "classify",
    "smoothing",
    "resolvent",
    "sde",
    "generator-check",
    "maximizer",
)


@dataclass
class RunConfig:
    """Validated configuration of one experiment run."""

    psi: Optional[sym.SymbolDescriptor]
    q: Optional[sym.SymbolDescriptor]
    coeffs: CoefficientField
    grid: GridSpec
    experiment: str
    params: dict
    output_dir: str
    output_formats: tuple
    seed: int
    raw: dict = field(repr=False, default_factory=dict)

    def config_hash(self) -> str:
        return hash_config(self.raw)


def hash_config(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _get(block: dict, key: str, default=None, required=False, where=""):
    if key in block:
        return block[key]
    if required:
        raise ConfigError(f"missing required key {where}{key}", key=f"{where}{key}")
    return default


def descriptor_from_block(block: dict, where: str) -> sym.SymbolDescriptor:
    """Build a symbol descriptor from a config table like
    { kind = "alpha_stable", alpha = 1.5, dim = 1 }."""
    kind = _get(block, "kind", required=True, where=where)
    if kind not in SYMBOL_KINDS:
        raise ConfigError(
            f"unknown symbol kind {kind!r} at {where}kind; choices: {SYMBOL_KINDS}",
            key=f"{where}kind",
        )
    dim = int(_get(block, "dim", 1, where=where))
    try:
        if kind == "alpha_stable":
            return sym.alpha_stable(_get(block, "alpha", required=True, where=where), dim)
        if kind == "brownian":
            return sym.brownian(dim)
        if kind == "meixner":
            return sym.meixner(
                _get(block, "m", 0.0, where=where),
                _get(block, "delta", required=True, where=where),
                _get(block, "a", required=True, where=where),
                _get(block, "b", 0.0, where=where),
            )
        if kind == "nig":
            return sym.nig(
                _get(block, "m", 0.0, where=where),
                _get(block, "delta", required=True, where=where),
                _get(block, "a", required=True, where=where),
                _get(block, "b", required=True, where=where),
            )
        if kind == "subordinated_drift":
            return sym.subordinated_drift(_get(block, "alpha", required=True, where=where))
        if kind == "power":
            p = float(_get(block, "p", required=True, where=where))
            if not 0.0 < p <= 2.0:
                raise ConfigError(
                    f"power exponent must lie in (0, 2] at {where}p", key=f"{where}p"
                )
            return sym.power_symbol(p, dim)
        if kind == "bessel_power":
            return sym.bessel_power(float(_get(block, "p", required=True, where=where)))
        if kind == "one":
            return sym.constant_one()
    except DescriptorInvalidError as exc:
        raise ConfigError(f"invalid parameters for {where}: {exc}", key=where) from exc
    raise ConfigError(f"unhandled kind {kind!r}", key=f"{where}kind")


def _expression_from(value, key: str) -> ScalarExpression:
    if isinstance(value, str):
        if value not in EXPRESSION_CATALOG:
            raise ConfigError(
                f"unknown coefficient expression {value!r} at {key}; "
                f"choices: {sorted(EXPRESSION_CATALOG)} or a number",
                key=key,
            )
        return expression(value)
    if isinstance(value, (int, float)):
        return constant_expression(float(value))
    raise ConfigError(f"coefficient at {key} must be a catalog name or a number", key=key)


def coefficients_from_block(block: dict, dim: int) -> CoefficientField:
    sig = _expression_from(_get(block, "sigma", 1.0), "coefficients.sigma")
    bb = _expression_from(_get(block, "b", 1.0), "coefficients.b")
    cf = CoefficientField(
        sigma=(sig,) * dim,
        b=(bb,) * dim,
        dim=dim,
        c_lo=_get(block, "sigma_lo", None),
        c_hi=_get(block, "sigma_hi", None),
        deriv_ceiling=_get(block, "deriv_ceiling", 100.0),
    )
    return cf


def grid_from_block(block: dict) -> GridSpec:
    try:
        return GridSpec(
            d=int(_get(block, "d", 1)),
            L=float(_get(block, "L", 20.0)),
            n=int(_get(block, "n", 4096)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid grid block: {exc}", key="grid") from exc


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply dotted key=value overrides, parsing values as TOML scalars."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value", key=item)
        key, value = item.split("=", 1)
        try:
            parsed = tomllib.loads(f"v = {value}")["v"]
        except tomllib.TOMLDecodeError:
            parsed = value
        node = raw
        parts = key.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {key!r} crosses a scalar", key=key)
        node[parts[-1]] = parsed
    return raw


def load_config(path, overrides: Optional[list[str]] = None, seed: Optional[int] = None) -> RunConfig:
    """Read and validate a TOML run configuration."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", key=str(path))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}", key=str(path))
    if overrides:
        raw = apply_overrides(raw, overrides)
    return parse_config(raw, seed_override=seed)


def parse_config(raw: dict, seed_override: Optional[int] = None) -> RunConfig:
    if not raw:
        raise ConfigError("config is empty", key="<root>")
    exp_block = raw.get("experiment")
    if not isinstance(exp_block, dict):
        raise ConfigError("missing [experiment] block", key="experiment")
    kind = _get(exp_block, "kind", required=True, where="experiment.")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"unknown experiment kind {kind!r}; choices: {EXPERIMENT_KINDS}",
            key="experiment.kind",
        )
    params = {k: v for k, v in exp_block.items() if k != "kind"}

    grid = grid_from_block(raw.get("grid", {}))
    psi = descriptor_from_block(raw["psi"], "psi.") if "psi" in raw else None
    q = descriptor_from_block(raw["q"], "q.") if "q" in raw else None
    if kind in ("classify", "smoothing", "resolvent", "sde", "generator-check") and psi is None:
        raise ConfigError(f"experiment {kind!r} requires a [psi] block", key="psi")

    coeffs = coefficients_from_block(raw.get("coefficients", {}), grid.d)
    out_block = raw.get("output", {})
    seed = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)

    for key in ("rho", "t_min", "t_max"):
        if key in params and not isinstance(params[key], (int, float)):
            raise ConfigError(f"experiment.{key} must be numeric", key=f"experiment.{key}")

    return RunConfig(
        psi=psi,
        q=q,
        coeffs=coeffs,
        grid=grid,
        experiment=kind,
        params=params,
        output_dir=str(_get(out_block, "directory", "results")),
        output_formats=tuple(_get(out_block, "formats", ["json", "csv"])),
        seed=seed,
        raw=raw,
    )
