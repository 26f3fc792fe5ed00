"""Spectra, spectral projections and eventual-positivity verdicts.

Eigenvalue problems are posed for the generator matrix G in the geometry of
the weighted product space: left eigenvectors are returned as M-adjoint
eigenvectors psi, so that <v_j, psi_i>_M is the biorthogonal pairing whose
conditioning detects defective (Jordan-type) eigenvalues.  Whenever the form
matrix is symmetric the solver switches to the similarity-symmetrized
problem, which makes the computed spectrum exactly real.

A dominant real eigenvalue with strictly positive right and M-adjoint
eigenvectors certifies eventual strong positivity of the semigroup; the
verdict records which part of that characterization fails otherwise.
Spectral projections onto boxes are computed independently of the
eigensolver by contour integration of the resolvent, so rank counts can be
cross-validated against eigenvalue counts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import DiscreteGenerator
from .errors import ContourError, NumericalError, PreconditionError

#: default number of retained leading eigenvalues
DEFAULT_COUNT = 8

#: relative residual allowed for retained eigenpairs
RESIDUAL_TOL = 1e-8

#: pairing threshold below which an eigenvalue is flagged as defective
BIORTHOGONALITY_TOL = 1e-6


@dataclass
class SpectrumReport:
    """Leading eigenvalues of a generator with both families of vectors.

    ``eigenvalues`` holds the retained leading part (descending real
    part, conjugates adjacent); ``all_eigenvalues`` the complete computed
    spectrum for counting purposes.  ``right_vectors[:, i]`` is normalized
    to unit M-norm and ``left_vectors[:, i]`` is the matching M-adjoint
    eigenvector.  ``gap`` is the distance from the spectral bound to the
    next distinct real part and ``dominant`` records whether the bound is
    attained by a unique real eigenvalue.
    """

    n: int
    count: int
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    all_eigenvalues: np.ndarray
    spectral_bound: float
    gap: float
    dominant: bool
    cluster_tol: float
    weights: np.ndarray
    residual_max: float
    symmetric_path: bool

    def m_inner(self, u, v):
        """<u, v>_M for vectors over this report's grid."""
        return np.vdot(v * self.weights, u)

    def pairing(self, i) -> float:
        """Normalized |<v_i, psi_i>_M|; near zero flags a defective pair."""
        v = self.right_vectors[:, i]
        psi = self.left_vectors[:, i]
        denom = np.sqrt(abs(self.m_inner(v, v)) * abs(self.m_inner(psi, psi)))
        return float(abs(self.m_inner(v, psi)) / denom)

    def top_cluster(self):
        """Indices of retained eigenvalues within cluster_tol of the bound."""
        lam0 = self.eigenvalues[0]
        return [
            i for i, lam in enumerate(self.eigenvalues)
            if abs(lam - lam0) <= self.cluster_tol
        ]

    def to_dict(self):
        return {
            "n": self.n,
            "count": self.count,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "spectral_bound": self.spectral_bound,
            "gap": self.gap,
            "dominant": self.dominant,
            "cluster_tol": self.cluster_tol,
            "residual_max": self.residual_max,
            "symmetric_path": self.symmetric_path,
        }


def spectrum(gen: DiscreteGenerator, count: int = DEFAULT_COUNT,
             cluster_tol: float | None = None) -> SpectrumReport:
    """Leading part of the spectrum of the generator.

    The default cluster tolerance is 1e-6 times the magnitude scale of the
    retained eigenvalues (not of the full matrix, whose norm grows like
    h**-2 and would swallow every spectral gap of interest).
    """
    G = gen.G
    size = gen.size
    count = int(min(max(count, 1), size))
    w = gen.weights.w
    sqrt_w = np.sqrt(w)

    A = gen.A_form
    asym = np.abs(A - A.T).max()
    symmetric = bool(asym <= 1e-12 * max(1.0, np.abs(A).max()))

    try:
        if symmetric:
            S = A / sqrt_w[:, None] / sqrt_w[None, :]
            theta, Y = scipy.linalg.eigh(S)
            # eigh sorts theta ascending, so -theta is already descending
            lam_all = (-theta).astype(complex)
            V = (Y / sqrt_w[:, None]).astype(complex)
            Psi = V.copy()
        else:
            lam_all, VL, VR = scipy.linalg.eig(G, left=True, right=True)
            order = np.lexsort((-lam_all.imag, -lam_all.real))
            lam_all = lam_all[order]
            V = VR[:, order]
            Psi = VL[:, order] / w[:, None]
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc

    # normalize right vectors to unit M-norm (left vectors keep their
    # LAPACK scaling; only pairing ratios are ever used)
    norms = np.sqrt(np.abs(np.sum(w[:, None] * np.abs(V) ** 2, axis=0)))
    V = V / norms[None, :]

    lam = lam_all[:count]
    V_keep = V[:, :count]
    Psi_keep = Psi[:, :count]

    g_norm = np.linalg.norm(G, np.inf)
    residuals = np.linalg.norm(G @ V_keep - V_keep * lam[None, :], axis=0)
    residual_max = float(residuals.max())
    if residual_max > RESIDUAL_TOL * max(g_norm, 1.0):
        raise NumericalError(
            f"eigenpair residual {residual_max:.3e} exceeds "
            f"{RESIDUAL_TOL:.0e} * ||G|| = {RESIDUAL_TOL * g_norm:.3e}"
        )

    if cluster_tol is None:
        scale = max(1.0, float(np.abs(lam).max()))
        cluster_tol = 1e-6 * scale
    cluster_tol = float(cluster_tol)

    bound = float(lam_all[0].real)
    lam0 = lam_all[0]
    cluster0 = np.abs(lam_all - lam0) <= cluster_tol
    outside = lam_all[~cluster0]
    gap = float(bound - outside.real.max()) if outside.size else 0.0
    dominant = bool(
        abs(lam0.imag) <= cluster_tol
        and int(cluster0.sum()) == 1
        and gap > cluster_tol
    )

    return SpectrumReport(
        n=gen.grid.n,
        count=count,
        eigenvalues=lam,
        right_vectors=V_keep,
        left_vectors=Psi_keep,
        all_eigenvalues=lam_all,
        spectral_bound=bound,
        gap=gap,
        dominant=dominant,
        cluster_tol=cluster_tol,
        weights=w,
        residual_max=residual_max,
        symmetric_path=symmetric,
    )


# ---------------------------------------------------------------------------
# dominance and simplicity
# ---------------------------------------------------------------------------

class Simplicity(enum.Enum):
    """Multiplicity classification of the leading eigenvalue."""

    AlgebraicallySimple = "AlgebraicallySimple"
    GeometricallySimpleOnly = "GeometricallySimpleOnly"
    Degenerate = "Degenerate"


@dataclass(frozen=True)
class DominanceReport:
    dominant: bool
    simple: Simplicity
    details: dict = field(default_factory=dict)


def classify_dominance(report: SpectrumReport) -> DominanceReport:
    """Judge dominance and simplicity of the leading eigenvalue.

    An isolated leading eigenvalue with healthy left-right pairing is
    AlgebraicallySimple; an isolated one whose pairing nearly vanishes is
    GeometricallySimpleOnly (a defective pair has collapsed onto one
    computed direction).  When several eigenvalues coalesce within
    cluster_tol the leading eigenvalue is flagged Degenerate; the details
    record whether the clustered eigenvectors are numerically parallel
    (Jordan-type defect) or independent (honest multiplicity).
    """
    cluster = report.top_cluster()
    details: dict = {"cluster_size": len(cluster)}
    if len(cluster) == 1:
        pairing = report.pairing(0)
        details["pairing"] = pairing
        simple = (
            Simplicity.AlgebraicallySimple
            if pairing > BIORTHOGONALITY_TOL
            else Simplicity.GeometricallySimpleOnly
        )
    else:
        pairings = [report.pairing(i) for i in cluster]
        details["pairing"] = min(pairings)
        cosines = []
        for a in cluster:
            for b in cluster:
                if a < b:
                    va = report.right_vectors[:, a]
                    vb = report.right_vectors[:, b]
                    cosines.append(abs(report.m_inner(va, vb)))
        details["max_vector_alignment"] = max(cosines) if cosines else 0.0
        simple = Simplicity.Degenerate
    return DominanceReport(report.dominant, simple, details)


# ---------------------------------------------------------------------------
# contour projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionResult:
    """Contour-integrated spectral projection onto a box."""

    rank: int
    projection: np.ndarray
    idempotency_residual: float
    count_inside: int
    box: tuple
    quad_points: int

    @property
    def consistent(self) -> bool:
        return self.rank == self.count_inside


def _box_segments(box):
    re0, re1, im0, im1 = box
    corners = [
        complex(re0, im0),
        complex(re1, im0),
        complex(re1, im1),
        complex(re0, im1),
    ]
    return list(zip(corners, corners[1:] + corners[:1]))


def _distance_to_segment(z, a, b):
    d = b - a
    t = ((z - a).real * d.real + (z - a).imag * d.imag) / abs(d) ** 2
    t = min(max(t, 0.0), 1.0)
    return abs(z - (a + t * d))


def spectral_projection_contour(
    gen: DiscreteGenerator,
    box,
    quad_points: int = 64,
    report: SpectrumReport | None = None,
    dist_tol: float = 1e-6,
    idem_tol: float = 1e-6,
) -> ProjectionResult:
    """Riesz projection onto the eigenvalues inside a rectangular box.

    Integrates the resolvent counterclockwise with Gauss-Legendre nodes on
    each edge (quad_points per edge) using one LU solve per node.  The
    eigenvalues must stay at least dist_tol away from the contour
    (checked against ``report``, which is computed on demand), and the
    result must satisfy ||P^2 - P|| <= idem_tol; an eigenvalue close
    enough to the contour to poison the quadrature raises ContourError
    either way.  The numerical rank is the number of singular values
    above 1/2, and is reported next to the eigenvalue count inside the
    box so the two independent routes can be compared.
    """
    G = gen.G
    eigs = (report.all_eigenvalues if report is not None
            else np.linalg.eigvals(G))
    segments = _box_segments(box)
    for lam in eigs:
        dist = min(_distance_to_segment(lam, a, b) for a, b in segments)
        if dist < dist_tol:
            raise ContourError(
                f"eigenvalue {lam} is within {dist:.3e} of the contour",
                eigenvalue=lam,
            )

    re0, re1, im0, im1 = box
    inside = np.sum(
        (eigs.real > re0) & (eigs.real < re1)
        & (eigs.imag > im0) & (eigs.imag < im1)
    )

    nodes, wts = np.polynomial.legendre.leggauss(int(quad_points))
    size = G.shape[0]
    eye = np.eye(size, dtype=complex)
    acc = np.zeros((size, size), dtype=complex)
    for a, b in segments:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        for x, wgt in zip(nodes, wts):
            z = mid + half * x
            try:
                R = scipy.linalg.solve(z * eye - G, eye)
            except scipy.linalg.LinAlgError as exc:
                raise ContourError(
                    f"resolvent solve failed on the contour at {z}",
                    eigenvalue=z,
                ) from exc
            acc += wgt * half * R
    P = acc / (2.0j * np.pi)

    svals = scipy.linalg.svdvals(P)
    rank = int(np.sum(svals > 0.5))
    idem = float(np.linalg.norm(P @ P - P, 2))
    if idem > idem_tol:
        closest = min(
            (min(_distance_to_segment(lam, a, b) for a, b in segments), lam)
            for lam in eigs
        )
        raise ContourError(
            f"projection is not idempotent (||P^2 - P|| = {idem:.3e} > "
            f"{idem_tol:.0e}); closest eigenvalue {closest[1]} sits "
            f"{closest[0]:.3e} from the contour",
            eigenvalue=closest[1],
        )
    return ProjectionResult(
        rank=rank,
        projection=P,
        idempotency_residual=idem,
        count_inside=int(inside),
        box=tuple(box),
        quad_points=int(quad_points),
    )


# ---------------------------------------------------------------------------
# eventual positivity
# ---------------------------------------------------------------------------

class VerdictReason(enum.Enum):
    """Why the spectral eventual-positivity test passed or failed."""

    DominantSimpleStrictEigvecs = "DominantSimpleStrictEigvecs"
    EigvecNotStrictlyPositive = "EigvecNotStrictlyPositive"
    EigvecSignChanging = "EigvecSignChanging"
    NotAlgebraicallySimple = "NotAlgebraicallySimple"
    ComplexDominantPair = "ComplexDominantPair"
    NoRealDominant = "NoRealDominant"


@dataclass(frozen=True)
class EventualPositivityVerdict:
    """Outcome of the spectral characterization of eventual positivity."""

    holds: bool
    reason: VerdictReason
    delta_primal: float
    delta_dual: float
    spectral_bound: float
    gap: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "holds": self.holds,
            "reason": self.reason.name,
            "delta_primal": self.delta_primal,
            "delta_dual": self.delta_dual,
            "spectral_bound": self.spectral_bound,
            "gap": self.gap,
        }


def _realize(vec):
    """Rotate a numerically real eigenvector onto the real axis."""
    idx = int(np.argmax(np.abs(vec)))
    phase = vec[idx] / abs(vec[idx])
    v = (vec / phase).real.copy()
    drop = np.abs((vec / phase).imag).max()
    if v[idx] < 0:
        v = -v
    return v, float(drop)


def eventual_positivity_spectral(
    gen: DiscreteGenerator,
    report: SpectrumReport | None = None,
    pos_tol: float = 1e-6,
) -> EventualPositivityVerdict:
    """Spectral test for eventual strong positivity of exp(t G).

    Requires a dominant, algebraically simple real leading eigenvalue
    whose right and M-adjoint eigenvectors are strictly positive after
    normalization; delta_primal and delta_dual report min/max component
    ratios of the two normalized eigenvectors (negative values measure
    sign changes).
    """
    rep = report if report is not None else spectrum(gen)
    lam0 = rep.eigenvalues[0]
    bound, gap = rep.spectral_bound, rep.gap

    def verdict(holds, reason, dp=0.0, dd=0.0, **details):
        return EventualPositivityVerdict(
            holds, reason, float(dp), float(dd), bound, gap, details
        )

    if abs(lam0.imag) > rep.cluster_tol:
        partner = (len(rep.eigenvalues) > 1
                   and abs(rep.eigenvalues[1] - lam0.conjugate()) <= rep.cluster_tol)
        reason = (VerdictReason.ComplexDominantPair if partner
                  else VerdictReason.NoRealDominant)
        return verdict(False, reason, lam=complex(lam0))

    if not rep.dominant:
        return verdict(False, VerdictReason.NotAlgebraicallySimple,
                       cluster=len(rep.top_cluster()))
    if rep.pairing(0) <= BIORTHOGONALITY_TOL:
        return verdict(False, VerdictReason.NotAlgebraicallySimple,
                       pairing=rep.pairing(0))

    v, v_drop = _realize(rep.right_vectors[:, 0])
    psi, psi_drop = _realize(rep.left_vectors[:, 0])
    delta_primal = float(v.min() / v.max())
    delta_dual = float(psi.min() / psi.max())
    details = {"imag_drop": max(v_drop, psi_drop)}

    worst = min(delta_primal, delta_dual)
    if worst < -pos_tol:
        return verdict(False, VerdictReason.EigvecSignChanging,
                       delta_primal, delta_dual, **details)
    if worst <= pos_tol:
        return verdict(False, VerdictReason.EigvecNotStrictlyPositive,
                       delta_primal, delta_dual, **details)
    return verdict(True, VerdictReason.DominantSimpleStrictEigvecs,
                   delta_primal, delta_dual, **details)


# ---------------------------------------------------------------------------
# dissipative regime
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DissipativeReport:
    """Spectral structure checks for drift-free dissipative couplings.

    For a symmetric bulk form perturbed by a dissipative coupling the
    spectral bound is nonpositive, the only possible spectrum on the
    imaginary axis is 0, and the bound vanishes exactly when the coupling
    annihilates the constant-one state (in which case the leading
    eigenvector is that constant).
    """

    spectral_bound: float
    bound_nonpositive: bool
    imaginary_axis_clean: bool
    coupling_kills_ones: bool
    bound_is_zero: bool
    kernel_iff_bound: bool
    ones_alignment: float | None
    tolerance: float

    @property
    def all_ok(self) -> bool:
        return (self.bound_nonpositive and self.imaginary_axis_clean
                and self.kernel_iff_bound)


def dissipative_regime_checks(
    gen: DiscreteGenerator,
    report: SpectrumReport | None = None,
    tol: float = 1e-8,
) -> DissipativeReport:
    """Verify the perturbation conclusions for a dissipative coupling.

    Preconditions (PreconditionError otherwise): the bulk form has no
    drift (b = c = 0 at the quadrature points) and the folded coupling
    matrix has nonpositive symmetric part, i.e. the perturbation is
    dissipative in the weighted product space.
    """
    mids = gen.grid.midpoints()
    b_vals = np.broadcast_to(np.asarray(gen.coeffs.b(mids), dtype=float), mids.shape)
    c_vals = np.broadcast_to(np.asarray(gen.coeffs.c(mids), dtype=float), mids.shape)
    if np.abs(b_vals).max() > 0.0 or np.abs(c_vals).max() > 0.0:
        raise PreconditionError("dissipative regime checks require b = c = 0")

    sym_part = 0.5 * (gen.B_h + gen.B_h.T)
    top = float(scipy.linalg.eigvalsh(sym_part).max())
    scale = max(1.0, float(np.abs(gen.B_h).max()))
    if top > tol * scale:
        raise PreconditionError(
            f"coupling is not dissipative: symmetric part reaches {top:.3e}"
        )

    rep = report if report is not None else spectrum(gen)
    bound = rep.spectral_bound

    lam = rep.all_eigenvalues
    mags = np.maximum(1.0, np.abs(lam))
    on_axis_nonreal = np.any(
        (np.abs(lam.real) <= tol * mags) & (np.abs(lam.imag) > tol * mags)
    )

    ones = np.ones(gen.size)
    g_ones = float(np.abs(gen.G @ ones).max())
    kills_ones = g_ones <= tol
    bound_zero = abs(bound) <= tol

    alignment = None
    if bound_zero:
        v = rep.right_vectors[:, 0]
        w = rep.weights
        num = abs(np.vdot(ones * w, v))
        den = np.sqrt(np.sum(w) * abs(np.vdot(v * w, v)))
        alignment = float(num / den)

    return DissipativeReport(
        spectral_bound=bound,
        bound_nonpositive=bound <= tol,
        imaginary_axis_clean=not bool(on_axis_nonreal),
        coupling_kills_ones=bool(kills_ones),
        bound_is_zero=bool(bound_zero),
        kernel_iff_bound=bool(kills_ones == bound_zero),
        ones_alignment=alignment,
        tolerance=float(tol),
    )
