"""Closed-form spectral analysis of the rotation-coupled boundary model.

This module treats the one-dimensional operator u -> -u'' on (0, 1) whose
boundary dynamics are coupled by the skew rotation of strength tau:

    u'(0) + tau * u(1) = lambda * u(0),
    -u'(1) - tau * u(0) = lambda * u(1).

Everything here is independent of any discretization.  Real eigenvalues
lambda = -mu**2 in the leading window solve tau_of_mu(mu) = |tau|, where
tau_of_mu is a strictly concave bump on (0, mu2_0); its value at mu_p (the
root of cot(mu) = mu) and its maximum at mu_s are the two thresholds that
separate the qualitative regimes of the semigroup:

    |tau| <  tau_p   leading eigenfunction strictly positive,
    |tau| =  tau_p   eigenfunction positive with a boundary zero,
    tau_p < |tau| < tau_s   leading eigenfunction changes sign,
    |tau| =  tau_s   the two leading eigenvalues collide (defective pair),
    tau_s < |tau| < tau_star   leading pair is complex conjugate.

The analysis window is the box G = (lambda2_0 - tau_star, tau_star) x
(-tau_star, tau_star) in the spectral plane; for |tau| < tau_star it
contains exactly two eigenvalues (counted with multiplicity).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, ContourError, DomainError, RootSearchError

#: tolerance for |tau| comparisons against the computed thresholds
EQ_TOL = 1e-9


# ---------------------------------------------------------------------------
# characteristic functions
# ---------------------------------------------------------------------------

def char_det(w, tau):
    """Determinant of the 2x2 boundary system for the ansatz exp(+-w x).

    Zeros w (with lambda = w**2, convention Im w >= 0) are exactly the
    eigenvalues of the coupled problem; w = 0 is a degenerate ansatz point
    and carries no information.  Entire in w, works for complex input.
    """
    w = complex(w)
    return 2.0 * (-tau * tau - w * w - w ** 4) * cmath.sinh(w) \
        - 4.0 * w ** 3 * cmath.cosh(w)


def char_det_lambda(lam, tau):
    """Entire characteristic function in the spectral-parameter plane.

    Equal to char_det(w, tau) / w for any square root w of lam; the
    division removes the spurious w = 0 zero, so the zeros of this
    function in C are exactly the eigenvalues.  Used for winding-number
    zero counts over boxes.
    """
    lam = complex(lam)
    if abs(lam) < 1e-12:
        # sinh(w)/w and cosh(w) by their even power series in lambda
        s = 1.0 + lam / 6.0 + lam * lam / 120.0 + lam ** 3 / 5040.0
        c = 1.0 + lam / 2.0 + lam * lam / 24.0 + lam ** 3 / 720.0
    else:
        w = cmath.sqrt(lam)
        s = cmath.sinh(w) / w
        c = cmath.cosh(w)
    return 2.0 * (-tau * tau - lam - lam * lam) * s - 4.0 * lam * c


def char_residual_mu(mu, tau):
    """Residual of the real-eigenvalue relation at lambda = -mu**2.

    Real eigenvalues in (lambda3_0, 0) correspond to roots mu > 0 of

        cot(mu) = (tau**2 - mu**2 + mu**4) / (2 mu**3).

    Raises DomainError at mu <= 0 and at the poles of the cotangent.
    """
    if mu <= 0.0:
        raise DomainError(f"mu must be positive, got {mu}")
    s = math.sin(mu)
    if abs(s) < 1e-12:
        raise DomainError(f"mu={mu} is too close to a pole of cot")
    return math.cos(mu) / s - (tau * tau - mu * mu + mu ** 4) / (2.0 * mu ** 3)


def tau_of_mu(mu):
    """Coupling strength |tau| at which lambda = -mu**2 is an eigenvalue.

    Defined as mu * sqrt(2 mu cot(mu) + 1 - mu**2) on the window
    (0, mu2_0]; the radicand vanishes exactly at the right endpoint.
    Strictly concave with a single interior maximum at mu_s.
    """
    if mu <= 0.0:
        raise DomainError(f"mu must be positive, got {mu}")
    radicand = 2.0 * mu / math.tan(mu) + 1.0 - mu * mu
    if radicand < 0.0:
        if radicand > -1e-12:
            radicand = 0.0
        else:
            raise DomainError(
                f"mu={mu} lies outside the real-eigenvalue window"
            )
    return mu * math.sqrt(radicand)


# ---------------------------------------------------------------------------
# scalar root finding: bisection on a checked bracket, then secant polish
# ---------------------------------------------------------------------------

def _bracketed_root(fn, lo, hi, *, polish_tol=1e-13, max_iter=200):
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise RootSearchError(
            f"no sign change on [{lo}, {hi}] (f: {flo:.3e} .. {fhi:.3e})"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-9:
            break
    # secant polish inside the remaining bracket
    x0, f0 = lo, flo
    x1, f1 = hi, fhi
    for _ in range(60):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (lo <= x2 <= hi):
            x2 = 0.5 * (lo + hi)
        f2 = fn(x2)
        if f2 == 0.0 or abs(x2 - x1) <= polish_tol * max(1.0, abs(x2)):
            return x2
        if flo * f2 < 0.0:
            hi = x2
        else:
            lo = x2
        x0, f0, x1, f1 = x1, f1, x2, f2
    return x1


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Thresholds:
    """The computed constants that organize the regime diagram.

    mu_p solves cot(mu) = mu; tau_p = tau_of_mu(mu_p) is the largest
    coupling with a positive leading eigenfunction.  mu_s maximizes
    tau_of_mu; tau_s is the coalescence coupling.  mu2_0 and mu3_0 are the
    first two positive roots of the uncoupled relation
    cot(mu) = (mu**2 - 1) / (2 mu), giving lambda2_0 and lambda3_0, and
    tau_star = |lambda3_0 - lambda2_0| / 2 bounds the validated range.
    residuals maps each defining equation to its absolute residual at the
    returned values.
    """

    mu_p: float
    tau_p: float
    mu_s: float
    tau_s: float
    mu2_0: float
    lambda2_0: float
    mu3_0: float
    lambda3_0: float
    tau_star: float
    residuals: dict

    def to_dict(self):
        return {
            "mu_p": self.mu_p,
            "tau_p": self.tau_p,
            "mu_s": self.mu_s,
            "tau_s": self.tau_s,
            "mu2_0": self.mu2_0,
            "lambda2_0": self.lambda2_0,
            "mu3_0": self.mu3_0,
            "lambda3_0": self.lambda3_0,
            "tau_star": self.tau_star,
            "residuals": dict(self.residuals),
        }


def _stationarity_residual(mu):
    # derivative condition for the maximum of tau_of_mu, cleared of the
    # square root: 1 = 2 mu^2 - 3 mu cot(mu) + mu^2 / sin(mu)^2
    s = math.sin(mu)
    return 2.0 * mu * mu - 3.0 * mu * math.cos(mu) / s + (mu / s) ** 2 - 1.0


def _uncoupled_residual(mu):
    # real-eigenvalue relation at tau = 0, cleared of the cot pole
    return 2.0 * mu * math.cos(mu) - (mu * mu - 1.0) * math.sin(mu)


@lru_cache(maxsize=1)
def compute_thresholds() -> Thresholds:
    """Compute all regime constants by bracketed root finding.

    Brackets are justified by monotonicity of the residuals on the stated
    intervals; each root is polished until the defining-equation residual
    is far below 1e-12.
    """
    mu_p = _bracketed_root(lambda m: math.cos(m) / math.sin(m) - m, 0.5, 1.2)
    mu_s = _bracketed_root(_stationarity_residual, 0.5, 1.3)
    mu2_0 = _bracketed_root(_uncoupled_residual, 1.0, 1.5)
    mu3_0 = _bracketed_root(_uncoupled_residual, math.pi + 0.1, 2.0 * math.pi - 0.5)

    tau_p = tau_of_mu(mu_p)
    tau_s = tau_of_mu(mu_s)
    lambda2_0 = -mu2_0 * mu2_0
    lambda3_0 = -mu3_0 * mu3_0
    tau_star = 0.5 * abs(lambda3_0 - lambda2_0)

    residuals = {
        "mu_p": abs(math.cos(mu_p) / math.sin(mu_p) - mu_p),
        "mu_s": abs(_stationarity_residual(mu_s)),
        "mu2_0": abs(char_residual_mu(mu2_0, 0.0)),
        "mu3_0": abs(char_residual_mu(mu3_0, 0.0)),
        "tau_p_radical_identity": abs(tau_p - math.sqrt(mu_p ** 2 + mu_p ** 4)),
        "tau_p_sine_identity": abs(tau_p - mu_p / math.sin(mu_p)),
        "tau_s_radical_identity": abs(
            tau_s - math.sqrt(2.0 * mu_s ** 3 / math.tan(mu_s) + mu_s ** 2 - mu_s ** 4)
        ),
        "tau_star_identity": abs(tau_star - 0.5 * (lambda2_0 - lambda3_0)),
    }

    ordering = (
        0.0 < mu_p < mu_s < mu2_0 < math.pi / 2.0 < math.pi < mu3_0
        and 0.0 < tau_p < tau_s < tau_star
    )
    if not ordering:
        raise RootSearchError("threshold ordering chain violated", residuals)

    return Thresholds(
        mu_p=mu_p,
        tau_p=tau_p,
        mu_s=mu_s,
        tau_s=tau_s,
        mu2_0=mu2_0,
        lambda2_0=lambda2_0,
        mu3_0=mu3_0,
        lambda3_0=lambda3_0,
        tau_star=tau_star,
        residuals=residuals,
    )


def analysis_box(thresholds: Thresholds | None = None):
    """The spectral box G = (lambda2_0 - tau*, tau*) x (-tau*, tau*)."""
    th = thresholds or compute_thresholds()
    return (th.lambda2_0 - th.tau_star, th.tau_star, -th.tau_star, th.tau_star)


# ---------------------------------------------------------------------------
# real eigenvalues
# ---------------------------------------------------------------------------

class RealEigenvalue(NamedTuple):
    """A real eigenvalue lambda = -mu**2; in_window marks mu < mu2_0."""

    lam: float
    mu: float
    in_window: bool


def real_eigenvalues(tau, *, include_deeper=True, deep_mu_max=3.0 * math.pi):
    """All real eigenvalues with mu up to ``deep_mu_max``, descending.

    The leading window (0, mu2_0) carries two roots of
    tau_of_mu(mu) = |tau| for |tau| < tau_s, one double root at
    |tau| = tau_s (within 1e-9), and none above.  Deeper real eigenvalues
    (the continuations of lambda3_0, lambda4_0, ...) are found by a scan
    of the pole-cleared relation on (mu2_0, deep_mu_max] and flagged
    in_window=False.
    """
    th = compute_thresholds()
    at = abs(float(tau))
    if at >= th.tau_star:
        raise DomainError(
            f"|tau|={at} is outside the validated range [0, {th.tau_star})"
        )

    roots: list[RealEigenvalue] = []
    if at <= EQ_TOL:
        roots.append(RealEigenvalue(0.0, 0.0, True))
        roots.append(RealEigenvalue(th.lambda2_0, th.mu2_0, True))
    elif abs(at - th.tau_s) <= EQ_TOL:
        roots.append(RealEigenvalue(-th.mu_s ** 2, th.mu_s, True))
    elif at < th.tau_s:
        left = _bracketed_root(lambda m: tau_of_mu(m) - at, 1e-10, th.mu_s)
        right = _bracketed_root(lambda m: tau_of_mu(m) - at, th.mu_s, th.mu2_0)
        roots.append(RealEigenvalue(-left * left, left, True))
        roots.append(RealEigenvalue(-right * right, right, True))

    if include_deeper:
        roots.extend(_deep_real_roots(at, th.mu2_0, deep_mu_max))

    roots.sort(key=lambda r: -r.lam)
    return roots


def _deep_real_roots(at, mu_start, mu_max):
    # scan the pole-cleared relation s(mu) = 2 mu^3 cos(mu)
    #   - sin(mu) (tau^2 - mu^2 + mu^4) for sign changes
    def cleared(mu):
        return 2.0 * mu ** 3 * math.cos(mu) \
            - math.sin(mu) * (at * at - mu * mu + mu ** 4)

    found = []
    grid = np.linspace(mu_start + 1e-8, mu_max, max(64, int((mu_max - mu_start) * 200)))
    vals = [cleared(m) for m in grid]
    for k in range(len(grid) - 1):
        if vals[k] == 0.0:
            mu = float(grid[k])
        elif vals[k] * vals[k + 1] < 0.0:
            mu = _bracketed_root(cleared, float(grid[k]), float(grid[k + 1]))
        else:
            continue
        # keep genuine roots of the original relation only (sin(mu) != 0)
        if abs(math.sin(mu)) > 1e-9 and abs(char_residual_mu(mu, at)) < 1e-6:
            found.append(RealEigenvalue(-mu * mu, mu, False))
    return found


# ---------------------------------------------------------------------------
# complex leading pair
# ---------------------------------------------------------------------------

def _char_det_grad(w, tau):
    w = complex(w)
    sh, ch = cmath.sinh(w), cmath.cosh(w)
    return (
        2.0 * (-2.0 * w - 4.0 * w ** 3) * sh
        + 2.0 * (-tau * tau - w * w - w ** 4) * ch
        - 12.0 * w * w * ch
        - 4.0 * w ** 3 * sh
    )


def _det_scale(w, tau):
    aw = abs(complex(w))
    return (
        2.0 * (tau * tau + aw * aw + aw ** 4) * abs(cmath.sinh(w))
        + 4.0 * aw ** 3 * abs(cmath.cosh(w))
        + 1.0
    )


def complex_leading_pair(tau, *, validate=True):
    """The conjugate pair of leading eigenvalues for tau_s < |tau| < tau*.

    Newton iteration on char_det in the w-plane (entire, no branch cuts)
    from a coarse seed grid over the half-disk Im w >= 0 that maps onto
    the analysis box; converged roots are mapped back by lambda = w**2.
    Returns (lam, conj(lam)) with Im lam > 0 first.  When ``validate`` is
    set, a winding-number count over the analysis box must equal 2.
    """
    th = compute_thresholds()
    at = abs(float(tau))
    if not (th.tau_s < at < th.tau_star):
        raise DomainError(
            f"complex leading pair exists for tau_s < |tau| < tau*, got |tau|={at}"
        )

    seeds = [
        complex(x, y)
        for x in np.linspace(-2.8, 2.8, 29)
        for y in np.linspace(0.05, 3.2, 14)
    ]
    candidates = []
    for w in seeds:
        for _ in range(60):
            g = char_det(w, at)
            dg = _char_det_grad(w, at)
            if dg == 0.0:
                break
            step = g / dg
            w = w - step
            if abs(step) <= 1e-14 * max(1.0, abs(w)):
                break
        if abs(char_det(w, at)) > 1e-10 * _det_scale(w, at):
            continue
        if w.imag < 0.0:
            w = -w
        lam = w * w
        if abs(w) < 1e-6 or abs(lam.imag) < 1e-10:
            continue
        if not (th.lambda2_0 - th.tau_star < lam.real <= 0.0
                and abs(lam.imag) < th.tau_star):
            continue
        lam = lam if lam.imag > 0.0 else lam.conjugate()
        if all(abs(lam - c) > 1e-8 * max(1.0, abs(lam)) for c in candidates):
            candidates.append(lam)

    if len(candidates) != 1:
        raise RootSearchError(
            f"expected one conjugate pair for |tau|={at}, found {len(candidates)}",
            diagnostics={"candidates": candidates},
        )
    lam = candidates[0]
    if validate:
        count = count_zeros_in_box(at)
        if count != 2:
            raise RootSearchError(
                f"winding count over the analysis box is {count}, expected 2",
                diagnostics={"lam": lam},
            )
    return lam, lam.conjugate()


def count_zeros_in_box(tau, box=None, samples_per_edge=256):
    """Number of eigenvalues inside a rectangle, by the argument principle.

    Tracks the continuous argument of char_det_lambda along the rectangle
    boundary (counterclockwise), with adaptive bisection whenever a step
    turns the phase by more than pi/2.  Raises ContourError if the
    characteristic function nearly vanishes on the path.
    """
    if box is None:
        box = analysis_box()
    re0, re1, im0, im1 = box
    corners = [
        complex(re0, im0),
        complex(re1, im0),
        complex(re1, im1),
        complex(re0, im1),
    ]

    def value(z):
        v = char_det_lambda(z, tau)
        if abs(v) < 1e-13 * (1.0 + abs(z)) :
            raise ContourError(
                f"characteristic function vanishes on the contour near {z}",
                eigenvalue=z,
            )
        return v

    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        # per-edge phase increments with adaptive refinement
        ts = np.linspace(0.0, 1.0, samples_per_edge + 1)
        vs = [value(a + t * (b - a)) for t in ts]
        stack = list(zip(ts[:-1], ts[1:], vs[:-1], vs[1:]))
        while stack:
            t0, t1, v0, v1 = stack.pop()
            dphi = cmath.phase(v1 / v0)
            if abs(dphi) > math.pi / 2.0:
                if t1 - t0 < 1e-12:
                    raise ContourError(
                        "phase tracking failed; an eigenvalue is on or "
                        f"extremely close to the contour near t={t0} on "
                        f"edge {a}->{b}"
                    )
                tm = 0.5 * (t0 + t1)
                vm = value(a + tm * (b - a))
                stack.append((t0, tm, v0, vm))
                stack.append((tm, t1, vm, v1))
                continue
            total += dphi
    count = total / (2.0 * math.pi)
    rounded = int(round(count))
    if abs(count - rounded) > 0.05:
        raise RootSearchError(
            f"winding number {count} is not close to an integer"
        )
    return rounded


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenfunctionSample:
    """Sampled leading eigenfunction with its zero structure.

    zero_kind is one of "none", "boundary", "interior"; zero is the
    location in [0, 1] or None.
    """

    tau: float
    mu: float
    lam: float
    x: np.ndarray
    values: np.ndarray
    zero: float | None
    zero_kind: str


def eigenfunction(tau, mu, samples=401) -> EigenfunctionSample:
    """Closed-form eigenfunction for the real eigenvalue lambda = -mu**2.

    Requires tau_of_mu(mu) = |tau| within 1e-8 (ConsistencyError
    otherwise).  For tau >= 0 the eigenfunction is

        v(x) = cos(mu x) - (tau cos mu + mu^2) / (mu + tau sin mu) * sin(mu x),

    for tau < 0 it is

        v(x) = sin(mu x)
             - (mu^2 sin mu - mu cos mu) / (mu sin mu + mu^2 cos mu + |tau|)
               * cos(mu x),

    and the single zero candidate in [0, 1] comes from the corresponding
    tangent relation.  At |tau| = tau_p the zero sits exactly on the
    boundary (x = 1 for tau > 0, x = 0 for tau < 0); it moves inside iff
    mu > mu_p.
    """
    tau = float(tau)
    mu = float(mu)
    x = np.linspace(0.0, 1.0, int(samples))

    if mu <= EQ_TOL:
        # the lambda = 0 eigenfunction of the uncoupled problem
        if abs(tau) > EQ_TOL:
            raise ConsistencyError("mu = 0 is an eigenvalue only at tau = 0")
        return EigenfunctionSample(tau, 0.0, 0.0, x, np.ones_like(x), None, "none")

    ft = tau_of_mu(mu)
    if abs(ft - abs(tau)) > 1e-8:
        raise ConsistencyError(
            f"(tau, mu) inconsistent: tau_of_mu({mu}) = {ft}, |tau| = {abs(tau)}"
        )

    boundary_tol = 1e-9
    if tau >= 0.0:
        coeff = (tau * math.cos(mu) + mu * mu) / (mu + tau * math.sin(mu))
        values = np.cos(mu * x) - coeff * np.sin(mu * x)
        ratio = (mu + ft * math.sin(mu)) / (mu * mu + ft * math.cos(mu))
        candidate = math.atan(ratio) / mu
        if candidate < 1.0 - boundary_tol:
            zero, kind = candidate, "interior"
        elif candidate <= 1.0 + boundary_tol:
            zero, kind = candidate, "boundary"
        else:
            zero, kind = None, "none"
    else:
        denom = mu * math.sin(mu) + mu * mu * math.cos(mu) + ft
        numer = mu * mu * math.sin(mu) - mu * math.cos(mu)
        coeff = numer / denom
        values = np.sin(mu * x) - coeff * np.cos(mu * x)
        candidate = math.atan(numer / denom) / mu
        if candidate < -boundary_tol:
            zero, kind = None, "none"
        elif candidate <= boundary_tol:
            zero, kind = candidate, "boundary"
        elif candidate <= 1.0 + boundary_tol:
            zero, kind = candidate, "interior"
        else:
            zero, kind = None, "none"

    return EigenfunctionSample(tau, mu, -mu * mu, x, values, zero, kind)


# ---------------------------------------------------------------------------
# regime classification
# ---------------------------------------------------------------------------

class Regime(enum.Enum):
    """Qualitative long-time behaviour as a function of |tau|."""

    PositiveSemigroup = "PositiveSemigroup"
    EventuallyStronglyPositive = "EventuallyStronglyPositive"
    BoundaryDegenerate = "BoundaryDegenerate"
    DominantSignChanging = "DominantSignChanging"
    JordanDefect = "JordanDefect"
    ComplexDominantPair = "ComplexDominantPair"
    OutOfValidatedRange = "OutOfValidatedRange"


@dataclass(frozen=True)
class RegimeClassification:
    """Regime label with the leading eigenvalues and zero location."""

    tau: float
    regime: Regime
    leading_eigenvalues: tuple
    eigenfunction_zero: float | None

    def to_dict(self):
        return {
            "tau": self.tau,
            "regime": self.regime.name,
            "leading_eigenvalues": [
                [complex(l).real, complex(l).imag] for l in self.leading_eigenvalues
            ],
            "eigenfunction_zero": self.eigenfunction_zero,
        }


def classify(tau) -> RegimeClassification:
    """Classify the coupling strength into its spectral regime.

    Threshold comparisons use the tolerance 1e-9; exactly at tau_p the
    label is BoundaryDegenerate, exactly at tau_s it is JordanDefect.
    """
    tau = float(tau)
    th = compute_thresholds()
    at = abs(tau)

    if at >= th.tau_star - EQ_TOL:
        return RegimeClassification(tau, Regime.OutOfValidatedRange, (), None)

    if at <= EQ_TOL:
        return RegimeClassification(
            tau, Regime.PositiveSemigroup, (0.0, th.lambda2_0), None
        )

    if abs(at - th.tau_s) <= EQ_TOL:
        lam = -th.mu_s ** 2
        sample = eigenfunction(math.copysign(th.tau_s, tau), th.mu_s)
        return RegimeClassification(
            tau, Regime.JordanDefect, (lam, lam), sample.zero
        )

    if at > th.tau_s:
        lam, lam_bar = complex_leading_pair(tau, validate=False)
        return RegimeClassification(
            tau, Regime.ComplexDominantPair, (lam, lam_bar), None
        )

    window = [r for r in real_eigenvalues(tau, include_deeper=False) if r.in_window]
    leading = tuple(r.lam for r in window)
    top = window[0]
    sample = eigenfunction(math.copysign(at, tau), top.mu)

    if abs(at - th.tau_p) <= EQ_TOL:
        zero = 1.0 if tau > 0 else 0.0
        return RegimeClassification(tau, Regime.BoundaryDegenerate, leading, zero)
    if at < th.tau_p:
        return RegimeClassification(
            tau, Regime.EventuallyStronglyPositive, leading, None
        )
    return RegimeClassification(
        tau, Regime.DominantSignChanging, leading, sample.zero
    )
