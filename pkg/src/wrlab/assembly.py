"""Assembly of the discrete form, coupling blocks and generator matrix.

The bulk operator is discretized with conforming P1 elements on the uniform
grid; all coefficient integrals use one midpoint quadrature point per cell.
The mass matrix is the lumped diagonal of :class:`~wrlab.meshspace.MassWeights`,
whose endpoint entries carry both the half-cell trapezoid weight and the unit
surface weight.  With the coupling blocks folded in, the generator is

    G = -M^{-1} (K_q - B_h),

so that <G u, v>_M = -(form of u against v) holds exactly at the matrix
level.  For the pure second-derivative case this reproduces the classical
second-order finite-difference stencil in the interior, and the eigenvalue
error of the coupled problem decays like h**2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import (
    CoefficientError,
    ConfigurationError,
    DimensionError,
    ResolventError,
)
from .meshspace import Grid1D, MassWeights, as_state, mass_weights


def _as_function(value) -> Callable[[np.ndarray], np.ndarray]:
    """Lift constants to callables; pass callables through."""
    if callable(value):
        return value
    const = float(value)
    return lambda x: np.full_like(np.asarray(x, dtype=float), const)


def _sample(fn, pts):
    out = np.asarray(fn(np.asarray(pts, dtype=float)), dtype=float)
    if out.shape != np.shape(pts):
        out = np.broadcast_to(out, np.shape(pts)).astype(float)
    return out


@dataclass(frozen=True)
class CoefficientSet:
    """Bulk coefficients of the form integral a u' v' + b u' v + c u v'.

    ``c_prime`` is the derivative of ``c`` as supplied by the caller; it is
    trusted (used by the conservativity certificate) and never checked
    against a numerical derivative.  ``eta`` is the ellipticity floor: the
    diffusion coefficient must satisfy a >= eta > 0 at every quadrature
    point.
    """

    a: Callable = 1.0
    b: Callable = 0.0
    c: Callable = 0.0
    c_prime: Callable = 0.0
    eta: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "a", _as_function(self.a))
        object.__setattr__(self, "b", _as_function(self.b))
        object.__setattr__(self, "c", _as_function(self.c))
        object.__setattr__(self, "c_prime", _as_function(self.c_prime))
        object.__setattr__(self, "eta", float(self.eta))


def constant_coefficients(a=1.0, b=0.0, c=0.0) -> CoefficientSet:
    """Constant-coefficient set with eta = a / 2 and exact c_prime = 0."""
    return CoefficientSet(a=a, b=b, c=c, c_prime=0.0, eta=float(a) / 2.0)


def assemble_q(grid: Grid1D, coeffs: CoefficientSet) -> np.ndarray:
    """Tridiagonal P1 stiffness-plus-drift matrix of the bulk form.

    Raises CoefficientError if eta <= 0 or the diffusion coefficient drops
    below eta at a quadrature point.  For b = c = 0 the matrix annihilates
    constants exactly.
    """
    if coeffs.eta <= 0.0:
        raise CoefficientError(f"ellipticity floor must be positive, got {coeffs.eta}")
    mids = grid.midpoints()
    am = _sample(coeffs.a, mids)
    bm = _sample(coeffs.b, mids)
    cm = _sample(coeffs.c, mids)
    if np.any(am < coeffs.eta):
        worst = int(np.argmin(am))
        raise CoefficientError(
            f"diffusion coefficient {am[worst]:.6g} at x={mids[worst]:.6g} "
            f"violates the ellipticity floor {coeffs.eta}"
        )

    h = grid.h
    d = am / h
    n = grid.n
    main = np.zeros(n + 1)
    main[:-1] += d - bm / 2.0 - cm / 2.0
    main[1:] += d + bm / 2.0 + cm / 2.0
    upper = -d + bm / 2.0 - cm / 2.0
    lower = -d - bm / 2.0 + cm / 2.0
    return np.diag(main) + np.diag(upper, 1) + np.diag(lower, -1)


# ---------------------------------------------------------------------------
# non-local coupling blocks
# ---------------------------------------------------------------------------

@dataclass
class NonlocalCoupling:
    """Coupling operator in block form on bulk x boundary states.

    B11: (n+1, n+1) acting on nodal bulk values,
    B12: (n+1, 2) from boundary to bulk,
    B21: (2, n+1) from bulk to boundary (quadrature weights folded in, so
         B21 @ ones approximates the kernel integral over the interval),
    B22: (2, 2) boundary-to-boundary.
    """

    grid: Grid1D
    B11: np.ndarray
    B12: np.ndarray
    B21: np.ndarray
    B22: np.ndarray
    descriptor: dict = field(default_factory=lambda: {"kind": "dense"})

    def __post_init__(self):
        size = self.grid.size
        self.B11 = np.asarray(self.B11, dtype=float)
        self.B12 = np.asarray(self.B12, dtype=float)
        self.B21 = np.asarray(self.B21, dtype=float)
        self.B22 = np.asarray(self.B22, dtype=float)
        shapes = {
            "B11": (self.B11, (size, size)),
            "B12": (self.B12, (size, 2)),
            "B21": (self.B21, (2, size)),
            "B22": (self.B22, (2, 2)),
        }
        for name, (arr, want) in shapes.items():
            if arr.shape != want:
                raise DimensionError(
                    f"{name} must have shape {want}, got {arr.shape}"
                )

    def apply_blocks(self, u1, u2):
        """Apply the block operator to (bulk, boundary) data."""
        u1 = np.asarray(u1)
        u2 = np.asarray(u2)
        return self.B11 @ u1 + self.B12 @ u2, self.B21 @ u1 + self.B22 @ u2

    def apply_ones(self):
        """Image of the constant-one state under the block operator."""
        ones_bulk = np.ones(self.grid.size)
        ones_bdry = np.ones(2)
        return self.apply_blocks(ones_bulk, ones_bdry)


def _trace_matrix(grid: Grid1D) -> np.ndarray:
    tr = np.zeros((2, grid.size))
    tr[0, 0] = 1.0
    tr[1, -1] = 1.0
    return tr


def build_kernel_blocks(grid: Grid1D, descriptor: dict) -> NonlocalCoupling:
    """Build coupling blocks from a descriptor document.

    Supported kinds:

    ``{"kind": "zero"}``
        all blocks zero.
    ``{"kind": "dense", "B11": ..., "B12": ..., "B21": ..., "B22": ...}``
        explicit matrices; omitted blocks default to zero.
    ``{"kind": "separable", "f": form, "g": [g0, g1], "blocks": [...]}``
        integral blocks from the product kernel k(x, z) = f(x) g(z); the
        bulk-to-boundary block carries the trapezoid quadrature weights.
        ``blocks`` selects a subset of ("B12", "B21"), default both.
    ``{"kind": "preset", "name": ..., ...}``
        named configurations: "skew" (separable pair with the
        bulk-to-boundary block negated, so the coupling is skew-adjoint in
        the weighted product), "example-6.10" (boundary difference block),
        and "example-8.1" (boundary rotation of strength ``tau``).
    """
    if not isinstance(descriptor, dict) or "kind" not in descriptor:
        raise ConfigurationError(f"descriptor must be a dict with 'kind': {descriptor!r}")
    kind = descriptor["kind"]
    size = grid.size
    zero = {
        "B11": np.zeros((size, size)),
        "B12": np.zeros((size, 2)),
        "B21": np.zeros((2, size)),
        "B22": np.zeros((2, 2)),
    }

    if kind == "zero":
        _reject_unknown(descriptor, {"kind"})
        return NonlocalCoupling(grid, descriptor=dict(descriptor), **zero)

    if kind == "dense":
        _reject_unknown(descriptor, {"kind", "B11", "B12", "B21", "B22"})
        blocks = dict(zero)
        for name in ("B11", "B12", "B21", "B22"):
            if name in descriptor:
                blocks[name] = np.asarray(descriptor[name], dtype=float)
        return NonlocalCoupling(grid, descriptor={"kind": "dense"}, **blocks)

    if kind == "separable":
        _reject_unknown(descriptor, {"kind", "f", "g", "blocks"})
        return _separable_blocks(grid, descriptor, skew=False)

    if kind == "preset":
        name = descriptor.get("name")
        if name == "skew":
            _reject_unknown(descriptor, {"kind", "name", "f", "g"})
            return _separable_blocks(grid, descriptor, skew=True)
        if name == "example-6.10":
            _reject_unknown(descriptor, {"kind", "name"})
            blocks = dict(zero)
            blocks["B22"] = np.array([[1.0, -1.0], [-1.0, 1.0]])
            return NonlocalCoupling(grid, descriptor=dict(descriptor), **blocks)
        if name == "example-8.1":
            _reject_unknown(descriptor, {"kind", "name", "tau"})
            if "tau" not in descriptor:
                raise ConfigurationError("preset example-8.1 needs a 'tau' value")
            tau = float(descriptor["tau"])
            blocks = dict(zero)
            blocks["B22"] = tau * np.array([[0.0, 1.0], [-1.0, 0.0]])
            return NonlocalCoupling(grid, descriptor=dict(descriptor), **blocks)
        raise ConfigurationError(f"unknown preset name: {name!r}")

    raise ConfigurationError(f"unknown descriptor kind: {kind!r}")


def _reject_unknown(descriptor, allowed):
    unknown = set(descriptor) - set(allowed)
    if unknown:
        raise ConfigurationError(
            f"unknown descriptor keys {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _separable_blocks(grid, descriptor, *, skew):
    if "f" not in descriptor or "g" not in descriptor:
        raise ConfigurationError("separable kernels need 'f' and 'g'")
    f = _as_function(descriptor["f"])
    g = np.asarray(descriptor["g"], dtype=float)
    if g.shape != (2,):
        raise ConfigurationError(f"'g' must have two entries, got shape {g.shape}")
    which = tuple(descriptor.get("blocks", ("B12", "B21")))
    if not set(which) <= {"B12", "B21"}:
        raise ConfigurationError(f"'blocks' may contain only B12/B21, got {which}")

    fx = _sample(f, grid.nodes)
    weights = mass_weights(grid)
    size = grid.size
    blocks = {
        "B11": np.zeros((size, size)),
        "B12": np.zeros((size, 2)),
        "B21": np.zeros((2, size)),
        "B22": np.zeros((2, 2)),
    }
    if "B12" in which:
        blocks["B12"] = np.outer(fx, g)
    if "B21" in which:
        sign = -1.0 if skew else 1.0
        blocks["B21"] = sign * np.outer(g, fx * weights.interior)
    desc = dict(descriptor)
    desc["f"] = "callable" if callable(descriptor["f"]) else descriptor["f"]
    return NonlocalCoupling(grid, descriptor=desc, **blocks)


def effective_matrix(coupling: NonlocalCoupling, weights: MassWeights) -> np.ndarray:
    """Fold the coupling blocks into one (n+1)-square matrix B_h.

    Testing the coupling against nodal basis functions weights bulk rows
    with the trapezoid weights and boundary rows with the unit surface
    weights, so that v^T B_h u equals the discrete pairing <B u, v>_M.
    """
    tr = _trace_matrix(coupling.grid)
    bulk = coupling.B11 + coupling.B12 @ tr
    bdry = coupling.B21 + coupling.B22 @ tr
    return weights.interior[:, None] * bulk + tr.T @ bdry


# ---------------------------------------------------------------------------
# generator
# ---------------------------------------------------------------------------

@dataclass
class DiscreteGenerator:
    """Assembled matrices of the coupled evolution problem."""

    grid: Grid1D
    weights: MassWeights
    coeffs: CoefficientSet
    coupling: NonlocalCoupling
    K_q: np.ndarray
    B_h: np.ndarray
    A_form: np.ndarray
    G: np.ndarray

    @property
    def size(self) -> int:
        return self.grid.size


def assemble_generator(
    grid: Grid1D, coeffs: CoefficientSet, coupling: NonlocalCoupling
) -> DiscreteGenerator:
    """Assemble K_q, fold in the coupling, and form G = -M^{-1}(K_q - B_h)."""
    if coupling.grid.n != grid.n:
        raise DimensionError(
            f"coupling was built for n={coupling.grid.n}, grid has n={grid.n}"
        )
    weights = mass_weights(grid)
    K_q = assemble_q(grid, coeffs)
    B_h = effective_matrix(coupling, weights)
    A_form = K_q - B_h
    G = -A_form / weights.w[:, None]
    return DiscreteGenerator(grid, weights, coeffs, coupling, K_q, B_h, A_form, G)


def solve_neumann(gen: DiscreteGenerator, lam, f, g):
    """Solve the bulk resolvent problem with prescribed conormal data.

    Finds u with (lam + L) u = f weakly on the interval and conormal
    derivative g = (g_0, g_1) at the endpoints; the boundary coupling
    plays no role here.  The right-hand side pairs f with the trapezoid
    weights and g with the endpoint traces.  Singular or inconsistent
    systems raise ResolventError carrying lam.
    """
    grid = gen.grid
    f_nodal = as_state(f, grid)
    g = np.asarray(g, dtype=float)
    if g.shape != (2,):
        raise DimensionError(f"conormal data must have two entries, got {g.shape}")
    w_in = gen.weights.interior
    mat = gen.K_q + float(lam) * np.diag(w_in)
    rhs = w_in * f_nodal + _trace_matrix(grid).T @ g

    try:
        lu, piv = scipy.linalg.lu_factor(mat)
    except scipy.linalg.LinAlgError as exc:
        raise ResolventError(
            f"shifted system is singular at lam={lam}", lam=lam
        ) from exc
    # reciprocal condition estimate: lam sitting on (or within roundoff
    # of) the discrete bulk spectrum makes the shifted matrix numerically
    # singular even when LU formally succeeds
    rcond = scipy.linalg.lapack.dgecon(lu, np.linalg.norm(mat, 1))[0]
    if rcond < 1e-13:
        raise ResolventError(
            f"shifted system at lam={lam} is numerically singular "
            f"(rcond = {rcond:.3e})",
            lam=lam,
        )
    u = scipy.linalg.lu_solve((lu, piv), rhs)
    residual = np.linalg.norm(mat @ u - rhs)
    scale = np.linalg.norm(rhs) + np.linalg.norm(mat, np.inf) * np.linalg.norm(u)
    if not np.all(np.isfinite(u)) or residual > 1e-8 * max(scale, 1.0):
        raise ResolventError(
            f"resolvent solve failed at lam={lam}: residual {residual:.3e}",
            lam=lam,
        )
    return u


def conormal_of(gen: DiscreteGenerator, u, Lu):
    """Weak conormal derivative of u at the two endpoints.

    Tests the bulk form against the endpoint basis functions and removes
    the lumped interior contribution of Lu; equals (a u' + c u) times the
    outer normal up to O(h) consistency error.
    """
    grid = gen.grid
    uu = as_state(u, grid)
    lu = as_state(Lu, grid)
    ku = gen.K_q @ uu
    w_in = gen.weights.interior
    g0 = ku[0] - w_in[0] * lu[0]
    g1 = ku[-1] - w_in[-1] * lu[-1]
    return float(g0), float(g1)
