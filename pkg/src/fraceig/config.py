"""Strict JSON configuration: unknown keys rejected, defaults made explicit.

``resolve_config`` turns a raw document into constructed objects plus a
fully-resolved echo dict (every default materialized); re-parsing the
echo reproduces the same configuration, which is the reproducibility
contract of the CLI.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import datums
from .directions import DirectionSet, SubspaceSet, make_direction_set, make_subspace_set
from .errors import ConfigError
from .geometry import Domain, ExteriorDatum, Grid
from .operators import OperatorSpec
from .quad1d import LineQuadrature, build_quadrature
from .special import FractionalOrder

__all__ = ["ResolvedConfig", "load_config", "resolve_config", "DEFAULTS"]

DEFAULTS = {
    "quadrature": {"delta": None, "T": None, "nodes_per_decade": 16,
                   "tail_mode": "zero_tail"},
    "directions": {"M": 32, "subspace_M": 8},
    "solver": {"tol": None, "max_iter": 1000000, "damping": 0.9,
               "initial_guess": None},
    "rhs": {"constant": 0.0},
}


def _check_keys(section: dict, allowed, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return section[key]


def _build_domain(cfg: dict) -> Domain:
    shape = _require(cfg, "shape", "domain")
    if shape == "interval":
        _check_keys(cfg, ("shape", "a", "b"), "domain")
        return Domain.interval(_require(cfg, "a", "domain"), _require(cfg, "b", "domain"))
    if shape == "ball":
        _check_keys(cfg, ("shape", "center", "radius"), "domain")
        return Domain.ball(_require(cfg, "center", "domain"),
                           _require(cfg, "radius", "domain"))
    if shape == "box":
        _check_keys(cfg, ("shape", "lo", "hi"), "domain")
        return Domain.box(_require(cfg, "lo", "domain"), _require(cfg, "hi", "domain"))
    raise ConfigError(f"unknown domain shape {shape!r}")


def _build_operator(cfg: dict) -> OperatorSpec:
    _check_keys(cfg, ("kind", "s", "coefficients", "pucci_low", "pucci_high"),
                "operator")
    kind = _require(cfg, "kind", "operator")
    order = FractionalOrder(float(_require(cfg, "s", "operator")))
    coeffs = cfg.get("coefficients")
    return OperatorSpec(
        kind=kind,
        order=order,
        coefficients=None if coeffs is None else tuple(coeffs),
        pucci_low=cfg.get("pucci_low"),
        pucci_high=cfg.get("pucci_high"),
    )


def _build_datum(cfg: dict, where: str = "datum") -> ExteriorDatum:
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where} must be a JSON object")
    if "sum" in cfg:
        _check_keys(cfg, ("sum",), where)
        parts = cfg["sum"]
        if not isinstance(parts, list) or not parts:
            raise ConfigError(f"{where}.sum must be a nonempty list")
        return datums.add(*[_build_datum(p, f"{where}.sum[{i}]")
                            for i, p in enumerate(parts)])
    _check_keys(cfg, ("builtin", "params", "scale"), where)
    name = _require(cfg, "builtin", where)
    if name not in datums.BUILTIN_DATUMS:
        raise ConfigError(
            f"unknown datum builtin {name!r}; choose from "
            f"{sorted(datums.BUILTIN_DATUMS)}"
        )
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{where}.params must be a JSON object")
    try:
        datum = datums.BUILTIN_DATUMS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for datum {name!r}: {exc}") from exc
    k = cfg.get("scale", 1.0)
    return datum if k == 1.0 else datums.scale(datum, float(k))


def _build_rhs(cfg: dict):
    _check_keys(cfg, ("constant", "builtin", "params"), "rhs")
    if "builtin" in cfg:
        datum = _build_datum({k: v for k, v in cfg.items() if k != "constant"},
                             "rhs")
        return datum
    return float(cfg.get("constant", 0.0))


@dataclass
class ResolvedConfig:
    """Constructed objects plus the fully-resolved echo document."""

    domain: Domain
    grid: Grid
    spec: OperatorSpec
    quadrature: LineQuadrature
    directions: DirectionSet
    subspaces: Optional[SubspaceSet]
    datum: Optional[ExteriorDatum]
    rhs: object
    solver: dict
    points: Optional[np.ndarray]
    study: Optional[dict]
    echo: dict


TOP_KEYS = ("domain", "grid", "operator", "quadrature", "directions", "datum",
            "rhs", "solver", "points", "study")


def load_config(path) -> dict:
    """Parse a JSON config file; malformed JSON reports line/column."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} "
            f"column {exc.colno}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a JSON object")
    return raw


def resolve_config(raw: dict, need: str = "eval") -> ResolvedConfig:
    """Validate strictly, construct objects, and produce the resolved echo.

    ``need`` is "eval" (requires datum + points), "solve" (datum + rhs +
    solver) or "study" (requires only the study section; other sections
    are optional parameter carriers).
    """
    _check_keys(raw, TOP_KEYS, "config")

    study = raw.get("study")
    if need == "study":
        if study is None:
            raise ConfigError("study command needs a 'study' section")
        _check_keys(study, ("name", "params"), "study")
        name = _require(study, "name", "study")
        params = study.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("study.params must be a JSON object")
        echo = {"study": {"name": name, "params": params}}
        return ResolvedConfig(
            domain=None, grid=None, spec=None, quadrature=None, directions=None,
            subspaces=None, datum=None, rhs=None, solver=None, points=None,
            study={"name": name, "params": params}, echo=echo,
        )

    domain = _build_domain(_require(raw, "domain", "config"))
    grid_cfg = _require(raw, "grid", "config")
    _check_keys(grid_cfg, ("counts",), "grid")
    grid = Grid(domain, _require(grid_cfg, "counts", "grid"))
    spec = _build_operator(_require(raw, "operator", "config"))

    qcfg = {**DEFAULTS["quadrature"], **raw.get("quadrature", {})}
    _check_keys(qcfg, DEFAULTS["quadrature"], "quadrature")
    delta = qcfg["delta"] if qcfg["delta"] is not None else float(np.max(grid.h))
    T = qcfg["T"] if qcfg["T"] is not None else 8.0 * domain.diameter
    quadrature = build_quadrature(spec.order, delta, T,
                                  qcfg["nodes_per_decade"], qcfg["tail_mode"])

    dcfg = {**DEFAULTS["directions"], **raw.get("directions", {})}
    _check_keys(dcfg, DEFAULTS["directions"], "directions")
    directions = make_direction_set(domain.dimension, int(dcfg["M"]))
    subspaces = None
    if spec.requires_subspaces(domain.dimension):
        subspaces = make_subspace_set(int(dcfg["subspace_M"]), int(dcfg["M"]))

    datum = None
    if "datum" in raw:
        datum = _build_datum(raw["datum"])
    elif need in ("eval", "solve"):
        raise ConfigError(f"{need} command needs a 'datum' section")

    rhs_cfg = raw.get("rhs", dict(DEFAULTS["rhs"]))
    rhs = _build_rhs(rhs_cfg)

    scfg = {**DEFAULTS["solver"], **raw.get("solver", {})}
    _check_keys(scfg, DEFAULTS["solver"], "solver")

    points = None
    if "points" in raw:
        points = np.atleast_2d(np.asarray(raw["points"], dtype=float))
        if points.shape[-1] != domain.dimension:
            raise ConfigError(
                f"points have dimension {points.shape[-1]}, domain has "
                f"{domain.dimension}"
            )
    elif need == "eval":
        raise ConfigError("eval command needs a 'points' list")

    echo = {
        "domain": dict(raw["domain"]),
        "grid": {"counts": list(grid.counts)},
        "operator": {
            "kind": spec.kind,
            "s": spec.s,
            **({"coefficients": list(spec.coefficients)}
               if spec.coefficients else {}),
            **({"pucci_low": spec.pucci_low, "pucci_high": spec.pucci_high}
               if spec.pucci_low is not None else {}),
        },
        "quadrature": {"delta": quadrature.delta, "T": quadrature.T,
                       "nodes_per_decade": int(qcfg["nodes_per_decade"]),
                       "tail_mode": quadrature.tail_mode},
        "directions": {"M": int(dcfg["M"]), "subspace_M": int(dcfg["subspace_M"])},
        "rhs": dict(rhs_cfg),
        "solver": dict(scfg),
    }
    if "datum" in raw:
        echo["datum"] = raw["datum"]
    if points is not None:
        echo["points"] = [list(map(float, p)) for p in points]
    if study is not None:
        echo["study"] = dict(study)

    return ResolvedConfig(
        domain=domain, grid=grid, spec=spec, quadrature=quadrature,
        directions=directions, subspaces=subspaces, datum=datum, rhs=rhs,
        solver=scfg, points=points, study=study, echo=echo,
    )
