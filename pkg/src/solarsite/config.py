"""Strict scenario configuration parsing.

Configs are JSON with nested sections; unknown keys are errors so a typo in
a stakeholder config fails fast instead of silently using a default.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .reclass import (AscendingBands, AzimuthClasses, CRITERION_IDS,
                      DescendingBands, GradeRule, ProximityBands)


class ConfigError(Exception):
    pass


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class CriterionSource:
    id: str
    grid: str | None = None            # direct raster path
    derive: str | None = None          # "slope" | "aspect"
    derive_from: str | None = None     # DEM path for derivation
    points: str | None = None          # sample point CSV (kriged)
    kriging: dict | None = None
    distance_from: str | None = None   # source mask path (distance transform)


@dataclass(frozen=True)
class ConstraintConfig:
    name: str
    mask: str
    buffer: float = 0.0


@dataclass
class ScenarioConfig:
    criteria: list[CriterionSource]
    weights: dict[str, float] | None
    matrix: Any | None                 # inline rows or a matrix file path
    constraints: list[ConstraintConfig]
    rules: dict[str, GradeRule]
    class_breaks: list[float]
    energy: dict[str, float]

    def canonical(self) -> dict:
        """Round-trippable plain-dict form (serialize(load(c)) idempotent)."""
        return _to_dict(self)


_RULE_KINDS = {
    "ascending": (AscendingBands, {"origin", "delta"}),
    "descending": (DescendingBands, {"origin", "delta"}),
    "azimuth": (AzimuthClasses, set()),
    "proximity": (ProximityBands, {"max", "delta", "buffer"}),
}


def _parse_rule(raw: dict, where: str) -> GradeRule:
    if "kind" not in raw:
        raise ConfigError(f"{where}: rule needs a 'kind'")
    kind = raw["kind"]
    if kind not in _RULE_KINDS:
        raise ConfigError(f"{where}: unknown rule kind {kind!r}")
    cls, params = _RULE_KINDS[kind]
    _check_keys(raw, params | {"kind"}, where)
    return cls(**{k: v for k, v in raw.items() if k != "kind"})


def _rule_to_dict(rule: GradeRule) -> dict:
    if isinstance(rule, AscendingBands):
        return {"kind": "ascending", "origin": rule.origin, "delta": rule.delta}
    if isinstance(rule, DescendingBands):
        return {"kind": "descending", "origin": rule.origin, "delta": rule.delta}
    if isinstance(rule, ProximityBands):
        return {"kind": "proximity", "max": rule.max, "delta": rule.delta,
                "buffer": rule.buffer}
    return {"kind": "azimuth"}


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(raw, {"criteria", "weights", "matrix", "constraints", "rules",
                      "class_breaks", "energy"}, "config")
    if "criteria" not in raw or not raw["criteria"]:
        raise ConfigError("config needs a non-empty 'criteria' section")

    criteria = []
    for cid, src in raw["criteria"].items():
        if cid not in CRITERION_IDS:
            raise ConfigError(f"unknown criterion id {cid!r}")
        _check_keys(src, {"grid", "derive", "from", "points", "kriging",
                          "distance_from"}, f"criteria.{cid}")
        entry = CriterionSource(
            cid, grid=src.get("grid"), derive=src.get("derive"),
            derive_from=src.get("from"), points=src.get("points"),
            kriging=src.get("kriging"), distance_from=src.get("distance_from"))
        n_sources = sum(x is not None for x in
                        (entry.grid, entry.derive, entry.points, entry.distance_from))
        if n_sources != 1:
            raise ConfigError(f"criteria.{cid}: exactly one source directive required")
        if entry.derive is not None:
            if entry.derive not in ("slope", "aspect"):
                raise ConfigError(f"criteria.{cid}: derive must be 'slope' or 'aspect'")
            if entry.derive_from is None:
                raise ConfigError(f"criteria.{cid}: derive needs a 'from' DEM path")
        if entry.kriging is not None:
            _check_keys(entry.kriging, {"kind", "n_bins", "max_lag"},
                        f"criteria.{cid}.kriging")
        criteria.append(entry)

    weights = raw.get("weights")
    matrix = raw.get("matrix")
    if (weights is None) == (matrix is None):
        raise ConfigError("config needs exactly one of 'weights' or 'matrix'")
    if weights is not None:
        ids = {c.id for c in criteria}
        if set(weights) != ids:
            raise ConfigError("weights must cover exactly the configured criteria")

    constraints = []
    for c in raw.get("constraints", []):
        _check_keys(c, {"name", "mask", "buffer"}, "constraints entry")
        if "name" not in c or "mask" not in c:
            raise ConfigError("constraint entries need 'name' and 'mask'")
        constraints.append(ConstraintConfig(c["name"], c["mask"],
                                            float(c.get("buffer", 0.0))))

    rules: dict[str, GradeRule] = {}
    for cid, r in raw.get("rules", {}).items():
        if cid not in CRITERION_IDS:
            raise ConfigError(f"rules: unknown criterion id {cid!r}")
        rules[cid] = _parse_rule(r, f"rules.{cid}")

    breaks = [float(b) for b in raw.get("class_breaks", [1, 3, 5, 7, 9])]

    energy = dict(raw.get("energy", {}))
    _check_keys(energy, {"sf", "eta", "daylight_hours", "sr_override"}, "energy")

    return ScenarioConfig(criteria, weights, matrix, constraints, rules, breaks, energy)


def load_config(path) -> ScenarioConfig:
    with open(path) as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return parse_config(raw)


def _to_dict(cfg: ScenarioConfig) -> dict:
    crit = {}
    for c in cfg.criteria:
        entry: dict = {}
        if c.grid is not None:
            entry["grid"] = c.grid
        if c.derive is not None:
            entry["derive"] = c.derive
            entry["from"] = c.derive_from
        if c.points is not None:
            entry["points"] = c.points
            if c.kriging is not None:
                entry["kriging"] = c.kriging
        if c.distance_from is not None:
            entry["distance_from"] = c.distance_from
        crit[c.id] = entry
    out: dict = {"criteria": crit}
    if cfg.weights is not None:
        out["weights"] = cfg.weights
    if cfg.matrix is not None:
        out["matrix"] = cfg.matrix
    if cfg.constraints:
        out["constraints"] = [
            {"name": c.name, "mask": c.mask, **({"buffer": c.buffer} if c.buffer else {})}
            for c in cfg.constraints
        ]
    if cfg.rules:
        out["rules"] = {cid: _rule_to_dict(r) for cid, r in cfg.rules.items()}
    out["class_breaks"] = cfg.class_breaks
    if cfg.energy:
        out["energy"] = cfg.energy
    return out
