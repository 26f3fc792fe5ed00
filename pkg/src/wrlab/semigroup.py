"""Time evolution, empirical positivity probes and asymptotic fits.

The propagator exp(tG) is available through two independent algorithms
(scaling-and-squaring and eigendecomposition) so that structure-sensitive
results can be cross-checked.  On top of it sit the empirical probes: direct
entrywise positivity of the propagator, eventual positivity of rescaled
trajectories over a horizon, and the asymptotic trichotomy (convergence to a
rank-one projection, exponential decay, exponential growth) verified by
fitting decay rates against the spectral data.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .assembly import DiscreteGenerator
from .errors import ConfigurationError, DomainError, NumericalError, ScalingError
from .meshspace import as_state
from .spectral import SpectrumReport, spectrum

#: condition-number ceiling for the eigendecomposition propagator path
EIG_COND_LIMIT = 1e12

#: fixed seed for random nonnegative probe states
PROBE_SEED = 1348


def expm(G, t: float, method: str = "pade") -> np.ndarray:
    """Propagator exp(t G) for t >= 0.

    method "pade" uses scaling-and-squaring (structure-blind, the default
    and the reference path); method "eig" diagonalizes G and exponentiates
    the eigenvalues, which is fast for repeated times but breaks down near
    defective couplings (NumericalError when the eigenvector basis has
    condition number beyond 1e12).  Non-finite entries in the result raise
    ScalingError advising the rescaled computation exp(-s t) exp(tG).
    """
    if t < 0:
        raise DomainError(f"propagator time must be nonnegative, got {t}")
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {G.shape}")

    if method == "pade":
        E = scipy.linalg.expm(G * t)
    elif method == "eig":
        lam, V = scipy.linalg.eig(G)
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond > EIG_COND_LIMIT:
            raise NumericalError(
                f"eigenvector basis condition {cond:.2e} exceeds "
                f"{EIG_COND_LIMIT:.0e}; matrix is near-defective, "
                "use method='pade'"
            )
        E = V @ (np.exp(lam * t)[:, None] * np.linalg.solve(V, np.eye(len(lam))))
        if np.isrealobj(G):
            drop = np.abs(E.imag).max()
            if drop > 1e-8 * max(1.0, np.abs(E.real).max()):
                raise NumericalError(
                    f"imaginary residue {drop:.3e} in real propagator"
                )
            E = E.real
    else:
        raise ConfigurationError(f"unknown propagator method {method!r}")

    if not np.all(np.isfinite(E)):
        raise ScalingError(
            f"exp(tG) overflowed at t = {t}; rescale: compute "
            "exp(-s t) exp(tG) with s the spectral bound"
        )
    return E


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class EvolutionTrace:
    """Sampled trajectory t -> exp(tG) u0 with summary statistics.

    mass is the weighted total <state, 1>_M; min_component and sup_norm
    track sign structure and magnitude.  times start at 0 and states[0]
    is the initial datum (possibly rescaled copies thereafter).
    """

    times: np.ndarray
    states: np.ndarray
    min_component: np.ndarray
    mass: np.ndarray
    sup_norm: np.ndarray

    def summary(self) -> dict:
        return {
            "samples": int(len(self.times)),
            "t_final": float(self.times[-1]),
            "min_component_final": float(self.min_component[-1]),
            "min_component_overall": float(self.min_component.min()),
            "mass_initial": float(self.mass[0]),
            "mass_final": float(self.mass[-1]),
            "sup_norm_final": float(self.sup_norm[-1]),
        }

    def csv_rows(self, include_states: bool = False):
        """Header row then one row per sample time."""
        header = ["t", "min_component", "mass", "sup_norm"]
        if include_states:
            header += [f"u{j}" for j in range(self.states.shape[1])]
        yield header
        for k in range(len(self.times)):
            row = [self.times[k], self.min_component[k],
                   self.mass[k], self.sup_norm[k]]
            if include_states:
                row += list(self.states[k])
            yield row


def evolve(gen: DiscreteGenerator, u0, t_final: float, samples: int = 64,
           method: str = "pade", rescale: float | None = None) -> EvolutionTrace:
    """Sample the trajectory exp(t G) u0 at uniform times in [0, t_final].

    One propagator for the sample step is computed and applied repeatedly.
    With rescale = s the stored states are exp(-s t) exp(tG) u0, which
    keeps sign structure visible when the semigroup grows or decays.
    """
    if t_final <= 0:
        raise DomainError(f"t_final must be positive, got {t_final}")
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples}")
    u = as_state(u0, gen.grid).astype(float)

    times = np.linspace(0.0, float(t_final), int(samples))
    dt = times[1] - times[0]
    E1 = expm(gen.G, dt, method=method)
    factor = float(np.exp(-rescale * dt)) if rescale is not None else 1.0

    states = np.empty((len(times), gen.size))
    states[0] = u
    for k in range(1, len(times)):
        u = factor * (E1 @ u)
        if not np.all(np.isfinite(u)):
            raise ScalingError(
                f"trajectory overflowed at t = {times[k]}; pass rescale="
                "spectral bound"
            )
        states[k] = u

    w = gen.weights.w
    return EvolutionTrace(
        times=times,
        states=states,
        min_component=states.min(axis=1),
        mass=states @ w,
        sup_norm=np.abs(states).max(axis=1),
    )


# ---------------------------------------------------------------------------
# positivity probes
# ---------------------------------------------------------------------------

class PositivityProbe(NamedTuple):
    holds: bool
    first_violation: tuple | None  # (t, row, col, value)


def empirical_positivity(gen: DiscreteGenerator,
                         times=(0.01, 0.1, 1.0, 10.0),
                         tol: float = 1e-10) -> PositivityProbe:
    """Check entrywise positivity of the propagator at sampled times.

    True iff every entry of exp(tG) is >= -tol at each sampled t; the
    first violation is reported as (t, row, col, value).
    """
    for t in times:
        E = expm(gen.G, float(t))
        idx = np.unravel_index(np.argmin(E), E.shape)
        value = float(E[idx])
        if value < -tol:
            return PositivityProbe(False, (float(t), int(idx[0]), int(idx[1]), value))
    return PositivityProbe(True, None)


@dataclass(frozen=True)
class EventualPositivityEmpirical:
    """Outcome of the rescaled-trajectory eventual-positivity probe.

    holds_up_to_horizon is true when every probe's tail ratio
    min_component/sup_norm stays at or above delta past the uniform t0;
    delta is half the observed tail infimum over all probes (nonpositive
    values record the failure margin).
    """

    holds_up_to_horizon: bool
    t0: float | None
    delta: float
    horizon: float
    probes: int
    samples: int
    spectral_bound: float
    worst_tail_ratio: float

    def to_dict(self):
        return {
            "holds_up_to_horizon": self.holds_up_to_horizon,
            "t0": self.t0,
            "delta": self.delta,
            "horizon": self.horizon,
            "probes": self.probes,
            "samples": self.samples,
            "spectral_bound": self.spectral_bound,
            "worst_tail_ratio": self.worst_tail_ratio,
        }


def empirical_eventual_positivity(
    gen: DiscreteGenerator,
    horizon: float | None = None,
    samples: int = 80,
    probes: int | None = None,
    report: SpectrumReport | None = None,
) -> EventualPositivityEmpirical:
    """Probe eventual strong positivity of the rescaled semigroup.

    Evolves exp(-s t) exp(tG) (s the spectral bound) applied to probe
    states: all canonical basis vectors when probes equals the state
    dimension (the default up to dimension 401), otherwise seeded random
    nonnegative vectors.  Default horizon is 20/gap when a spectral gap
    exists, else 50.  For each probe the sign ratio min/sup is tracked;
    the verdict holds when every tail infimum (second half of the horizon)
    is strictly positive, with delta half that infimum and t0 the first
    sampled time past which all ratios stay above delta.
    """
    rep = report if report is not None else spectrum(gen)
    s = rep.spectral_bound
    if horizon is None:
        horizon = 20.0 / rep.gap if rep.gap > 1e-12 else 50.0
    horizon = float(horizon)
    if horizon <= 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    samples = int(samples)
    if samples < 4:
        raise DomainError(f"need at least 4 samples, got {samples}")

    size = gen.size
    if probes is None:
        probes = size if size <= 401 else 64
    probes = int(probes)

    times = np.linspace(0.0, horizon, samples)
    dt = times[1] - times[0]
    F1 = np.exp(-s * dt) * expm(gen.G, dt)

    if probes == size:
        U = np.eye(size)
    else:
        rng = np.random.default_rng(PROBE_SEED)
        U = rng.random((size, probes))

    ratios = np.empty((samples, probes))
    cur = U.copy()
    for k in range(samples):
        if k > 0:
            cur = F1 @ cur
        sup = np.abs(cur).max(axis=0)
        sup = np.where(sup > 0, sup, 1.0)
        ratios[k] = cur.min(axis=0) / sup

    tail_start = samples // 2
    tail_inf = ratios[tail_start:].min(axis=0)
    worst = float(tail_inf.min())
    delta = 0.5 * worst
    if worst <= 0.0:
        return EventualPositivityEmpirical(
            False, None, delta, horizon, probes, samples, s, worst
        )

    # uniform t0: earliest sample past which every probe stays >= delta
    ok_from = samples - 1
    row_min = ratios.min(axis=1)
    for k in range(samples - 1, -1, -1):
        if row_min[k] >= delta:
            ok_from = k
        else:
            break
    return EventualPositivityEmpirical(
        True, float(times[ok_from]), delta, horizon, probes, samples, s, worst
    )


# ---------------------------------------------------------------------------
# asymptotic trichotomy
# ---------------------------------------------------------------------------

class AsymptoticKind(enum.Enum):
    ConvergesToProjection = "ConvergesToProjection"
    DecaysExponentially = "DecaysExponentially"
    GrowsExponentially = "GrowsExponentially"


@dataclass(frozen=True)
class AsymptoticClassification:
    """Fitted long-time behavior of the semigroup.

    rate is the fitted exponential rate of the monitored quantity: the
    decay rate of ||exp(tG) - P|| (positive, compared against the gap)
    for ConvergesToProjection, otherwise the signed slope of
    log||exp(tG)|| (compared against the spectral bound).  profile holds
    the pair (v, psi) of leading right and M-adjoint eigenvectors,
    normalized so that <v, psi>_M = 1, in the projection case.
    """

    kind: AsymptoticKind
    rate: float
    reference: float
    relative_error: float
    fit_residual: float
    window: tuple
    warning_not_metzler: bool
    profile: tuple | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind.name,
            "rate": self.rate,
            "reference": self.reference,
            "relative_error": self.relative_error,
            "fit_residual": self.fit_residual,
            "window": list(self.window),
            "warning_not_metzler": self.warning_not_metzler,
            "normalization": "profile pair scaled to <v, psi>_M = 1",
        }


def _fit_log_slope(times, values):
    """Least-squares slope of log(values) against times."""
    if np.any(values <= 0):
        raise NumericalError(
            "monitored norm hit zero during asymptotic fit; "
            f"values = {values.tolist()}"
        )
    y = np.log(values)
    A = np.vstack([times, np.ones_like(times)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), resid


def _window_norms(gen, t_lo, t_hi, npts, subtract=None):
    """Norms of exp(tG) (minus an optional matrix) on a uniform window."""
    times = np.linspace(t_lo, t_hi, npts)
    dt = times[1] - times[0]
    E = expm(gen.G, times[0])
    E_step = expm(gen.G, dt)
    vals = []
    for k in range(npts):
        if k > 0:
            E = E_step @ E
        target = E if subtract is None else E - subtract
        vals.append(np.linalg.norm(target, 2))
    return times, np.asarray(vals)


FIT_RESIDUAL_LIMIT = 0.1
FIT_POINTS = 12


def asymptotic_classify(gen: DiscreteGenerator, tol: float = 1e-8,
                        report: SpectrumReport | None = None
                        ) -> AsymptoticClassification:
    """Classify long-time behavior by the sign of the spectral bound s.

    |s| <= tol: verify convergence of exp(tG) to the rank-one projection
    <., psi>_M v at a fitted rate compared against the spectral gap.
    s < -tol (resp. s > tol): fit the decay (growth) rate of ||exp(tG)||
    and compare to s.  A log-linear fit residual above 0.1 raises
    NumericalError with the data.  Intended for positive configurations;
    a non-Metzler generator only sets the warning flag.
    """
    rep = report if report is not None else spectrum(gen)
    s = rep.spectral_bound
    gap = rep.gap

    offdiag = gen.G.copy()
    np.fill_diagonal(offdiag, np.inf)
    warning = bool(offdiag.min() < -1e-10)

    def construct(kind, rate, reference, resid, window, profile=None, **details):
        rel = abs(rate - reference) / max(abs(reference), tol)
        return AsymptoticClassification(
            kind=kind, rate=rate, reference=float(reference),
            relative_error=float(rel), fit_residual=resid,
            window=window, warning_not_metzler=warning,
            profile=profile, details=details,
        )

    if abs(s) <= tol:
        lam0 = rep.eigenvalues[0]
        if abs(lam0.imag) > rep.cluster_tol or not rep.dominant:
            raise NumericalError(
                "spectral bound is ~0 but the leading eigenvalue is not a "
                f"dominant simple real eigenvalue (lambda_1 = {lam0})"
            )
        if gap <= tol:
            raise NumericalError(f"no spectral gap below 0 (gap = {gap})")
        v = rep.right_vectors[:, 0]
        psi = rep.left_vectors[:, 0]
        pairing = np.vdot(psi * rep.weights, v)
        psi = psi / np.conj(pairing)
        P = np.outer(v, np.conj(psi) * rep.weights)
        if np.isrealobj(gen.G):
            P = P.real
        t_hi = 8.0 / gap
        times, vals = _window_norms(gen, 0.5 * t_hi, t_hi, FIT_POINTS,
                                    subtract=P)
        slope, resid = _fit_log_slope(times, vals)
        if resid > FIT_RESIDUAL_LIMIT:
            raise NumericalError(
                f"ambiguous projection fit: residual {resid:.3e}, "
                f"times {times.tolist()}, norms {vals.tolist()}"
            )
        return construct(
            AsymptoticKind.ConvergesToProjection, -slope, gap, resid,
            (times[0], times[-1]),
            profile=(v.real.copy(), psi.real.copy()),
            projection_residual=float(np.linalg.norm(P @ P - P, 2)),
        )

    rate_scale = abs(s)
    t_hi = 8.0 / rate_scale
    if gap > tol:
        t_hi = max(t_hi, 12.0 / gap)
    t_hi = min(t_hi, 600.0 / rate_scale)
    times, vals = _window_norms(gen, 0.5 * t_hi, t_hi, FIT_POINTS)
    slope, resid = _fit_log_slope(times, vals)
    if resid > FIT_RESIDUAL_LIMIT:
        raise NumericalError(
            f"ambiguous norm fit: residual {resid:.3e}, "
            f"times {times.tolist()}, norms {vals.tolist()}"
        )
    kind = (AsymptoticKind.DecaysExponentially if s < 0
            else AsymptoticKind.GrowsExponentially)
    return construct(kind, slope, s, resid, (times[0], times[-1]))
