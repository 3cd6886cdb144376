"""Experiment configuration: a single JSON document per experiment.

The schema is validated eagerly with key-path diagnostics, and unknown keys
are rejected so that a typo cannot silently drop part of an experiment.
``"inf"`` is the spelling of N = infinity in JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .norms import AsymNorm1D, EuclideanNorm, MinkowskiNorm, RandersNorm
from .space import Domain, WeightedSpace, build_space

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the key path."""


def _fail(path: str, message: str):
    raise ConfigError(f"config key {path!r}: {message}")


def _expect_mapping(obj, path: str, allowed: set, required: set = frozenset()):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        _fail(path, f"unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}")
    missing = required - set(obj)
    if missing:
        _fail(path, f"missing required keys {sorted(missing)}")
    return obj


def _number(obj, path: str, allow_inf: bool = False) -> float:
    if allow_inf and obj in ("inf", "Infinity"):
        return math.inf
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        _fail(path, f"expected a number, got {obj!r}")
    return float(obj)


def _parse_norm(obj, path: str) -> MinkowskiNorm:
    _expect_mapping(obj, path, {"variant", "matrix", "drift", "alpha", "beta"},
                    {"variant"})
    variant = obj["variant"]
    try:
        if variant == "euclidean":
            _expect_mapping(obj, path, {"variant", "matrix"}, {"matrix"})
            return EuclideanNorm(np.array(obj["matrix"], dtype=float))
        if variant == "randers":
            _expect_mapping(obj, path, {"variant", "matrix", "drift"},
                            {"matrix", "drift"})
            return RandersNorm(np.array(obj["matrix"], dtype=float),
                               np.array(obj["drift"], dtype=float))
        if variant == "asym1d":
            _expect_mapping(obj, path, {"variant", "alpha", "beta"},
                            {"alpha", "beta"})
            return AsymNorm1D(_number(obj["alpha"], path + ".alpha"),
                              _number(obj["beta"], path + ".beta"))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        _fail(path, str(exc))
    _fail(path + ".variant", f"unknown norm variant {variant!r}")


def _parse_domain(obj, path: str) -> Domain:
    _expect_mapping(obj, path, {"geometry", "lengths", "resolution"},
                    {"geometry", "lengths", "resolution"})
    try:
        return Domain(geometry=obj["geometry"],
                      lengths=tuple(obj["lengths"]),
                      resolution=tuple(obj["resolution"]))
    except (ValueError, TypeError) as exc:
        _fail(path, str(exc))


@dataclass
class FlowConfig:
    u0: str
    tau: float
    t_end: float
    tol: float = 1e-10
    max_iter: int = 50
    stride: int = 1


@dataclass
class IdentityConfig:
    resolutions: List[int] = field(default_factory=lambda: [128, 256])
    a_values: List[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    h_expr: Optional[str] = None  # default: a smooth single mode on the circle


@dataclass
class ExperimentConfig:
    domain: Domain
    norm: MinkowskiNorm
    psi: str
    n_values: List[float]
    checkers: Optional[List[str]]
    bank_seed: int
    bank_size: int
    flow: Optional[FlowConfig]
    identities: IdentityConfig
    tol_sweep: float
    raw: dict

    def build_space(self) -> WeightedSpace:
        return build_space(self.domain, self.norm, self.psi)


_TOP_KEYS = {"space", "n_values", "checkers", "bank", "flow", "identities",
             "tolerances"}


def parse_config(doc: dict) -> ExperimentConfig:
    _expect_mapping(doc, "<root>", _TOP_KEYS, {"space"})

    space_obj = _expect_mapping(doc["space"], "space",
                                {"domain", "norm", "psi"}, {"domain", "norm"})
    domain = _parse_domain(space_obj["domain"], "space.domain")
    norm = _parse_norm(space_obj["norm"], "space.norm")
    if norm.dim != domain.dim:
        _fail("space.norm", f"norm dimension {norm.dim} does not match domain "
                            f"dimension {domain.dim}")
    psi = space_obj.get("psi", "0")
    if not isinstance(psi, str):
        _fail("space.psi", "expected an expression string")

    n_values = [_number(v, f"n_values[{i}]", allow_inf=True)
                for i, v in enumerate(doc.get("n_values", []))]
    for i, N in enumerate(n_values):
        if not (N < 0 or N >= domain.dim):
            _fail(f"n_values[{i}]", f"N = {N} is inadmissible "
                                    f"(need N < 0 or N >= {domain.dim})")

    checkers = doc.get("checkers")
    if checkers is not None:
        if not isinstance(checkers, list) or not all(isinstance(c, str) for c in checkers):
            _fail("checkers", "expected a list of checker names")
        from .inequalities import CHECKER_IDS
        unknown = [c for c in checkers if c not in CHECKER_IDS]
        if unknown:
            _fail("checkers", f"unknown checkers {unknown}; "
                              f"available: {sorted(CHECKER_IDS)}")

    bank = _expect_mapping(doc.get("bank", {}), "bank", {"seed", "size"})
    bank_seed = int(_number(bank.get("seed", 0), "bank.seed"))
    bank_size = int(_number(bank.get("size", 12), "bank.size"))
    if bank_size < 1:
        _fail("bank.size", "must be >= 1")

    flow = None
    if "flow" in doc:
        fobj = _expect_mapping(doc["flow"], "flow",
                               {"u0", "tau", "t_end", "tol", "max_iter", "stride"},
                               {"u0", "tau", "t_end"})
        if not isinstance(fobj["u0"], str):
            _fail("flow.u0", "expected an expression string")
        flow = FlowConfig(
            u0=fobj["u0"],
            tau=_number(fobj["tau"], "flow.tau"),
            t_end=_number(fobj["t_end"], "flow.t_end"),
            tol=_number(fobj.get("tol", 1e-10), "flow.tol"),
            max_iter=int(_number(fobj.get("max_iter", 50), "flow.max_iter")),
            stride=int(_number(fobj.get("stride", 1), "flow.stride")),
        )
        if flow.tau <= 0 or flow.t_end <= 0:
            _fail("flow", "tau and t_end must be positive")

    iobj = _expect_mapping(doc.get("identities", {}), "identities",
                           {"resolutions", "a_values", "h_expr"})
    identities = IdentityConfig()
    if "resolutions" in iobj:
        res = iobj["resolutions"]
        if (not isinstance(res, list) or len(res) != 2
                or not all(isinstance(r, int) and r >= 8 for r in res)
                or not res[0] < res[1]):
            _fail("identities.resolutions", "expected two increasing integers >= 8")
        identities.resolutions = list(res)
    if "a_values" in iobj:
        identities.a_values = [_number(a, f"identities.a_values[{i}]")
                               for i, a in enumerate(iobj["a_values"])]
        if any(a <= 0 for a in identities.a_values):
            _fail("identities.a_values", "exponents must be positive")
    if "h_expr" in iobj:
        if not isinstance(iobj["h_expr"], str):
            _fail("identities.h_expr", "expected an expression string")
        identities.h_expr = iobj["h_expr"]

    tol_obj = _expect_mapping(doc.get("tolerances", {}), "tolerances", {"sweep"})
    tol_sweep = _number(tol_obj.get("sweep", 2e-2), "tolerances.sweep")

    return ExperimentConfig(domain=domain, norm=norm, psi=psi, n_values=n_values,
                            checkers=checkers, bank_seed=bank_seed,
                            bank_size=bank_size, flow=flow, identities=identities,
                            tol_sweep=tol_sweep, raw=doc)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: line {exc.lineno}, "
                          f"{exc.msg}") from exc
    return parse_config(doc)
