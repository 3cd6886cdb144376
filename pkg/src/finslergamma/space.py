"""Discretized flat weighted Minkowski spaces.

A space is a uniform tensor grid over a 1D or 2D flat domain, a single
Minkowski norm (constant across the domain), and a weight Psi sampled at
the nodes.  The reference measure assigns each node the cell mass

    m_i = exp(-Psi(x_i)) * w_i,        sum_i m_i = 1 after normalization,

where w_i is the node's cell volume (trapezoid-style lumping: half cells at
non-periodic boundary nodes).  Shifting Psi by a constant therefore leaves
the space unchanged.

Scalar fields are flat arrays of shape (M,); vector and covector fields are
arrays of shape (M, dim), M the node count.  Spaces are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .norms import MinkowskiNorm

__all__ = ["Domain", "WeightedSpace", "build_space", "integrate", "asym_distance",
           "scalar_field_from_expression"]

MIN_RESOLUTION = 8

_GEOMETRIES = {"interval": False, "circle": True, "box": False, "torus": True}

# Namespace for Psi / initial-datum expressions evaluated on the grid.
_EXPR_NAMES = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "tanh": np.tanh, "cosh": np.cosh,
    "sinh": np.sinh, "pi": np.pi, "e": np.e,
}


@dataclass(frozen=True)
class Domain:
    """Flat computational domain: geometry name, side lengths, nodes per axis.

    Geometries: ``interval`` / ``box`` are no-flux with vertex-centered nodes
    on [-L/2, L/2]; ``circle`` / ``torus`` are periodic on [0, L).
    """

    geometry: str
    lengths: tuple
    resolution: tuple

    def __post_init__(self):
        if self.geometry not in _GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        lengths = tuple(float(L) for L in np.atleast_1d(self.lengths))
        resolution = tuple(int(r) for r in np.atleast_1d(self.resolution))
        dim = 1 if self.geometry in ("interval", "circle") else 2
        if len(lengths) != dim or len(resolution) != dim:
            raise ValueError(f"{self.geometry} needs {dim} length(s) and resolution(s)")
        if any(L <= 0 for L in lengths):
            raise ValueError("side lengths must be positive")
        if any(r < MIN_RESOLUTION for r in resolution):
            raise ValueError(f"resolution must be >= {MIN_RESOLUTION} per axis")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "resolution", resolution)

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def periodic(self) -> bool:
        return _GEOMETRIES[self.geometry]

    def axis_coords(self, axis: int) -> np.ndarray:
        L, n = self.lengths[axis], self.resolution[axis]
        if self.periodic:
            return (L / n) * np.arange(n)
        return -L / 2 + (L / (n - 1)) * np.arange(n)

    def axis_spacing(self, axis: int) -> float:
        L, n = self.lengths[axis], self.resolution[axis]
        return L / n if self.periodic else L / (n - 1)


class WeightedSpace:
    """Grid + norm + normalized weighted measure; see module docstring."""

    def __init__(self, domain: Domain, norm: MinkowskiNorm, psi: np.ndarray):
        if norm.dim != domain.dim:
            raise ValueError(f"norm dimension {norm.dim} != domain dimension {domain.dim}")
        self.domain = domain
        self.norm = norm
        self.shape = domain.resolution
        self.n_nodes = int(np.prod(self.shape))

        psi = np.asarray(psi, dtype=float).reshape(self.n_nodes)
        if not np.all(np.isfinite(psi)):
            raise ValueError("Psi has non-finite values on the grid")
        self.psi = psi

        axes = [domain.axis_coords(a) for a in range(domain.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.coords = np.stack([g.reshape(-1) for g in mesh], axis=1)
        self.h = tuple(domain.axis_spacing(a) for a in range(domain.dim))

        cell = np.ones(self.shape)
        if not domain.periodic:
            for a in range(domain.dim):
                sl = [slice(None)] * domain.dim
                for edge in (0, -1):
                    sl[a] = edge
                    cell[tuple(sl)] *= 0.5
        cell *= float(np.prod(self.h))
        mass = np.exp(-psi) * cell.reshape(-1)
        total = mass.sum()
        if not (total > 0 and np.isfinite(total)):
            raise ValueError("total mass is zero or non-finite")
        self.cell_mass = mass / total

        self.psi_field = psi  # alias kept for clarity in callers

    @property
    def dim(self) -> int:
        return self.domain.dim

    def node_index(self, point: Sequence[float]) -> int:
        """Index of the grid node nearest to ``point``."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        d2 = np.sum((self.coords - p[None, :]) ** 2, axis=1)
        return int(np.argmin(d2))

    def constant_field(self, value: float = 0.0) -> np.ndarray:
        return np.full(self.n_nodes, float(value))

    def field_from_expression(self, expr: str) -> np.ndarray:
        return scalar_field_from_expression(self, expr)

    def displacement(self, i: int, j: int) -> np.ndarray:
        """Representative displacement(s) from node i to node j.

        Periodic axes return all lattice translates that can realize the
        minimum, as an array of candidate vectors.
        """
        delta = self.coords[j] - self.coords[i]
        shifts = [(-L, 0.0, L) if self.domain.periodic else (0.0,)
                  for L in self.domain.lengths]
        out = []
        for combo in np.stack(np.meshgrid(*shifts, indexing="ij"), axis=-1).reshape(-1, self.dim):
            out.append(delta + combo)
        return np.array(out)


def scalar_field_from_expression(space: WeightedSpace, expr: str) -> np.ndarray:
    """Evaluate a closed-form expression of x (and y in 2D) at the nodes."""
    names = dict(_EXPR_NAMES)
    names["x"] = space.coords[:, 0]
    if space.dim == 2:
        names["y"] = space.coords[:, 1]
    try:
        with np.errstate(all="ignore"):
            values = eval(expr, {"__builtins__": {}}, names)  # noqa: S307 - config-local expressions
    except Exception as exc:
        raise ValueError(f"cannot evaluate expression {expr!r}: {exc}") from exc
    field = np.broadcast_to(np.asarray(values, dtype=float), (space.n_nodes,)).copy()
    if not np.all(np.isfinite(field)):
        raise ValueError(f"expression {expr!r} produced non-finite values")
    return field


def build_space(domain: Domain, norm: MinkowskiNorm,
                psi: Union[str, Callable, np.ndarray, float] = 0.0) -> WeightedSpace:
    """Construct a validated WeightedSpace; ``psi`` may be an expression
    string, a callable of the node coordinates, a nodal array, or a constant."""
    if isinstance(psi, str):
        axes = [domain.axis_coords(a) for a in range(domain.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        names = dict(_EXPR_NAMES)
        names["x"] = mesh[0].reshape(-1)
        if domain.dim == 2:
            names["y"] = mesh[1].reshape(-1)
        try:
            with np.errstate(all="ignore"):
                values = eval(psi, {"__builtins__": {}}, names)  # noqa: S307
        except Exception as exc:
            raise ValueError(f"cannot evaluate Psi expression {psi!r}: {exc}") from exc
        psi_arr = np.broadcast_to(np.asarray(values, dtype=float),
                                  (int(np.prod(domain.resolution)),)).copy()
    elif callable(psi):
        axes = [domain.axis_coords(a) for a in range(domain.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([g.reshape(-1) for g in mesh], axis=1)
        psi_arr = np.asarray(psi(*(coords[:, a] for a in range(domain.dim))), dtype=float)
    else:
        psi_arr = np.broadcast_to(np.asarray(psi, dtype=float),
                                  (int(np.prod(domain.resolution)),)).copy()
    return WeightedSpace(domain, norm, psi_arr)


def integrate(space: WeightedSpace, f: np.ndarray) -> float:
    """Integral of a scalar field against the normalized reference measure."""
    return float(space.cell_mass @ np.asarray(f, dtype=float))


def asym_distance(space: WeightedSpace, i: int, j: int) -> float:
    """Asymmetric distance d(x_i, x_j) = F(x_j - x_i) in flat space.

    Geodesics of a constant norm are straight lines; periodic axes minimize
    over lattice translates.  d(j, i) may differ from d(i, j).
    """
    candidates = space.displacement(i, j)
    return float(np.min(space.norm.values(candidates)))
