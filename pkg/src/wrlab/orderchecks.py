"""Certificates for positivity, sub-Markov and Markov properties.

The characterization is algebraic and runs entirely on the coupling
blocks: the semigroup is positive iff the off-diagonal blocks are
entrywise nonnegative and the diagonal blocks have nonnegative
off-diagonal entries (the positive minimum principle for matrices, i.e.
the Metzler sign pattern).  It is sub-Markov iff in addition the coupling
applied to the constant-one state is dominated by the drift terms, with
equality characterizing the Markov (conservative) case.  The certificates
below return the witnesses of every violated inequality so empirical
checks can be compared entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import CoefficientSet, NonlocalCoupling
from .errors import DimensionError, PreconditionError
from .meshspace import Grid1D


@dataclass(frozen=True)
class PmpResult:
    """Outcome of the positive-minimum-principle sign check."""

    passed: bool
    worst: tuple | None  # (i, j, value) of the most negative off-diagonal


def pmp_check(B, tol=1e-10) -> PmpResult:
    """Check the Metzler sign pattern: off-diagonal entries >= -tol.

    This is equivalent to exp(t B) being entrywise nonnegative for all
    t >= 0, and to B + ||B|| I being entrywise nonnegative.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise DimensionError(f"pmp_check needs a square matrix, got {B.shape}")
    off = B.copy()
    np.fill_diagonal(off, np.inf)
    i, j = np.unravel_index(np.argmin(off), off.shape)
    value = off[i, j]
    if not np.isfinite(value):
        # 1x1 matrix: no off-diagonal entries to check
        return PmpResult(True, None)
    return PmpResult(bool(value >= -tol), (int(i), int(j), float(value)))


@dataclass(frozen=True)
class PositivityCertificate:
    """Blockwise positivity conditions with violation witnesses."""

    positive: bool
    witnesses: tuple


def certify_positive(coupling: NonlocalCoupling, tol=1e-10) -> PositivityCertificate:
    """Certify positivity of the generated semigroup from the blocks.

    Off-diagonal blocks must be entrywise nonnegative; diagonal blocks
    must satisfy the positive minimum principle.  Each violation is
    reported as (block, (i, j), value).
    """
    witnesses = []
    for name in ("B12", "B21"):
        block = getattr(coupling, name)
        if block.size and block.min() < -tol:
            i, j = np.unravel_index(np.argmin(block), block.shape)
            witnesses.append((name, (int(i), int(j)), float(block[i, j])))
    for name in ("B11", "B22"):
        res = pmp_check(getattr(coupling, name), tol)
        if not res.passed:
            i, j, value = res.worst
            witnesses.append((name, (i, j), value))
    return PositivityCertificate(not witnesses, tuple(witnesses))


@dataclass(frozen=True)
class OrderCertificate:
    """Nested certificate: markov implies sub_markov implies positive."""

    positive: bool
    sub_markov: bool
    markov: bool
    tolerance: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "positive": self.positive,
            "sub_markov": self.sub_markov,
            "markov": self.markov,
            "tolerance": self.tolerance,
            "details": {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.details.items()
            },
        }


def certify_markov(
    coeffs: CoefficientSet,
    coupling: NonlocalCoupling,
    grid: Grid1D,
    tol=1e-10,
) -> OrderCertificate:
    """Certify positivity, the sub-Markov property and conservativity.

    Beyond positivity, the sub-Markov property requires at every node

        c'(x_i) + (B11 1)_i + (B12 1)_i <= 0,

    and at the two endpoints

        (B21 1)_m + (B22 1)_m <= (c nu)_m = (-c(0), c(1)),

    where the supplied derivative c' is trusted.  The Markov case is
    equality in both, within tol.  Slack vectors are reported in details.
    """
    pos = certify_positive(coupling, tol)

    nodes = grid.nodes
    cp = np.asarray(coeffs.c_prime(nodes), dtype=float)
    cp = np.broadcast_to(cp, nodes.shape).astype(float)
    c_ends = np.asarray(coeffs.c(np.array([0.0, 1.0])), dtype=float)
    c_ends = np.broadcast_to(c_ends, (2,)).astype(float)
    c_nu = np.array([-c_ends[0], c_ends[1]])

    bulk_ones, bdry_ones = coupling.apply_ones()
    bulk_slack = cp + bulk_ones          # must be <= 0
    bdry_slack = bdry_ones - c_nu        # must be <= 0

    sub = bool(
        pos.positive
        and bulk_slack.max() <= tol
        and bdry_slack.max() <= tol
    )
    markov = bool(
        sub
        and np.abs(bulk_slack).max() <= tol
        and np.abs(bdry_slack).max() <= tol
    )

    return OrderCertificate(
        positive=pos.positive,
        sub_markov=sub,
        markov=markov,
        tolerance=float(tol),
        details={
            "positivity_witnesses": list(pos.witnesses),
            "bulk_slack_max": float(bulk_slack.max()),
            "bulk_slack_min": float(bulk_slack.min()),
            "boundary_slack": bdry_slack,
        },
    )


def check_domination(G1, G2, tol=1e-10) -> bool:
    """Entrywise criterion for 0 <= exp(t G1) <= exp(t G2) for all t >= 0.

    Requires G1 to be Metzler and G2 - G1 entrywise nonnegative (within
    tol).  The exponential order then follows from the series of
    exp(t(G1 + ||G1|| I)) and termwise comparison.
    """
    G1 = np.asarray(G1, dtype=float)
    G2 = np.asarray(G2, dtype=float)
    if G1.shape != G2.shape:
        raise DimensionError(f"shape mismatch: {G1.shape} vs {G2.shape}")
    if not pmp_check(G1, tol).passed:
        return False
    return bool((G2 - G1).min() >= -tol)


def irreducibility_probe(G, t=1.0, tol=1e-12) -> bool:
    """Probe irreducibility: every entry of exp(t G) strictly positive.

    Only meaningful for Metzler matrices (positive semigroups); other
    input raises PreconditionError.  A single strictly positive
    exponential certifies irreducibility; block-triangular reducible
    structure leaves exact zeros for every t.
    """
    from .semigroup import expm

    G = np.asarray(G, dtype=float)
    res = pmp_check(G, 1e-12)
    if not res.passed:
        raise PreconditionError(
            f"irreducibility probe needs a Metzler matrix; offending entry "
            f"{res.worst}"
        )
    if t <= 0.0:
        raise PreconditionError(f"probe time must be positive, got {t}")
    return bool(expm(G, t).min() > tol)
