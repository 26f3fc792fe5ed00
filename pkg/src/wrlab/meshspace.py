"""Uniform grid on [0, 1] and the weighted product space behind it.

State vectors are plain numpy arrays of length n + 1.  The entries are nodal
samples of the bulk component on the open interval, and the two end entries
double as the boundary trace values.  The discrete inner product therefore
weights interior nodes with trapezoid weights for the Lebesgue part and adds
a unit weight at each endpoint for the surface (counting) measure, so that

    <1, 1>_M = (volume of the interval) + (measure of the two endpoints) = 3

holds exactly on every grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh of the unit interval with n cells and n + 1 nodes."""

    n: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise DimensionError(f"grid needs at least 2 cells, got n={self.n}")
        object.__setattr__(self, "h", 1.0 / self.n)
        object.__setattr__(self, "nodes", np.linspace(0.0, 1.0, self.n + 1))

    @property
    def size(self) -> int:
        """Number of nodes, i.e. the length of a state vector."""
        return self.n + 1

    def midpoints(self) -> np.ndarray:
        """Cell midpoints, where coefficient functions are sampled."""
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


@dataclass(frozen=True)
class MassWeights:
    """Diagonal mass weights of the product space L2(0,1) x C^2.

    ``interior`` holds the trapezoid weights of the Lebesgue measure,
    ``boundary`` the unit endpoint weights of the counting measure, and
    ``w`` their sum, which is the diagonal of the mass matrix.
    """

    grid: Grid1D
    w: np.ndarray = field(init=False, repr=False)
    interior: np.ndarray = field(init=False, repr=False)
    boundary: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = self.grid.h
        interior = np.full(self.grid.size, h)
        interior[0] = interior[-1] = h / 2.0
        boundary = np.zeros(self.grid.size)
        boundary[0] = boundary[-1] = 1.0
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "w", interior + boundary)

    def matrix(self) -> np.ndarray:
        """Dense diagonal mass matrix (mostly for tests and adjoints)."""
        return np.diag(self.w)


def mass_weights(grid: Grid1D) -> MassWeights:
    """Build the diagonal mass weights for ``grid``."""
    return MassWeights(grid)


def as_state(u, grid: Grid1D) -> np.ndarray:
    """Validate and convert ``u`` to a state vector on ``grid``."""
    arr = np.asarray(u)
    if arr.ndim != 1 or arr.shape[0] != grid.size:
        raise DimensionError(
            f"state vector must have length {grid.size}, got shape {arr.shape}"
        )
    if not np.issubdtype(arr.dtype, np.number):
        raise DomainError(f"state vector must be numeric, got dtype {arr.dtype}")
    return arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)


def inner_product(u, v, weights: MassWeights):
    """Weighted inner product <u, v>_M = sum_i w_i u_i conj(v_i)."""
    grid = weights.grid
    uu = as_state(u, grid)
    vv = as_state(v, grid)
    value = np.sum(weights.w * uu * np.conj(vv))
    if not np.iscomplexobj(uu) and not np.iscomplexobj(vv):
        return float(value.real)
    return complex(value)


def norm(u, weights: MassWeights) -> float:
    """Norm induced by :func:`inner_product`."""
    uu = as_state(u, weights.grid)
    return float(np.sqrt(np.sum(weights.w * np.abs(uu) ** 2)))


@dataclass(frozen=True)
class LatticeParts:
    """Pointwise lattice decomposition of a real state vector."""

    positive_part: np.ndarray
    negative_part: np.ndarray
    modulus: np.ndarray


def lattice_ops(u, grid: Grid1D) -> LatticeParts:
    """Positive part, negative part and modulus of a real state vector.

    The decomposition satisfies u = u+ - u-, |u| = u+ + u-, and u+ * u- = 0
    entrywise.  Complex input is rejected: the lattice structure lives on
    the real part of the space only.
    """
    uu = as_state(u, grid)
    if np.iscomplexobj(uu):
        raise DomainError("lattice operations are defined for real vectors only")
    positive = np.maximum(uu, 0.0)
    negative = np.maximum(-uu, 0.0)
    return LatticeParts(positive, negative, positive + negative)
